"""Gain, phase and disk dominance margins, the circle criterion and the
rate-shifted H-infinity norm.

A loop ``W`` closed with gain ``K`` (negative feedback, ``W / (1 + K W)``)
is strictly ``p2``-dominant with rate ``lam`` exactly when the Nyquist curve
of ``W_lam`` encircles ``-1/K`` clockwise ``p2 - p1`` times, where ``p1`` is
the number of poles of ``W_lam`` in the open right half-plane.  Everything
below is built on that count.

All reported intervals are open; their end points are gains or angles at
which the curve passes through the critical point.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._format import fmt
from .exceptions import DomarginError, PointOnCurve, RateOnPole
from .nyquist import (clockwise_encirclements, evaluate, real_axis_crossings,
                      sample_curve)
from .rational import pole_report, tf

__all__ = ['Disk', 'GainInterval', 'GainMarginReport', 'PhaseMarginReport',
           'DiskMarginReport', 'CircleCriterionResult', 'open_loop_degree',
           'gain_margins', 'phase_margins', 'disk_margin_check',
           'circle_criterion', 'hinf_lambda_norm', 'margin_vs_rate_sweep',
           'SweepResult', 'msd_family']

# a curve point within MEMBER_TOL * scale of a disk boundary intersects it
MEMBER_TOL = 1e-9


def _threads():
    env = os.environ.get('DOMARGIN_THREADS')
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _circle_clearance(z, center, radius):
    """Per-segment distance from a polyline to a closed disk (negative inside)."""
    a, b = z[:-1], z[1:]
    d = b - a
    L2 = np.abs(d) ** 2
    with np.errstate(invalid='ignore', divide='ignore'):
        t = np.where(L2 > 0, np.real((center - a) * np.conj(d)) / L2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(a + t * d - center) - radius


class Disk:
    """The critical region ``D(k1, k2)`` for ``k1 < k2``.

    * ``k1 k2 > 0``: closed disk whose diameter joins ``-1/k1`` and ``-1/k2``.
    * ``k1 k2 < 0``: complement of the closed disk whose boundary meets the
      real axis at ``-1/k1`` and ``-1/k2``.
    * ``k1 = 0``: open half-plane left of ``Re(s) = -1/k2``;
      ``k2 = 0``: open half-plane right of ``Re(s) = -1/k1``.
    """

    def __init__(self, k1, k2):
        k1, k2 = float(k1), float(k2)
        if not k1 < k2:
            raise ValueError(f"need k1 < k2, got ({k1}, {k2})")
        self.k1, self.k2 = k1, k2
        if k1 * k2 > 0:
            self.kind = 'bounded_disk'
        elif k1 * k2 < 0:
            self.kind = 'complement_of_disk'
        else:
            self.kind = 'half_plane'
        if self.kind != 'half_plane':
            a, b = -1.0 / k1, -1.0 / k2
            self.center = 0.5 * (a + b)
            self.radius = 0.5 * abs(a - b)
        else:
            self.line = -1.0 / k2 if k1 == 0 else -1.0 / k1
            # +1: the set lies right of the line, -1: left of it
            self.side = -1 if k1 == 0 else 1

    def __repr__(self):
        return f"Disk({self.k1:g}, {self.k2:g})"

    def clearance(self, z):
        """Signed distance from points `z` to the set; positive outside."""
        z = np.asarray(z, dtype=complex)
        if self.kind == 'bounded_disk':
            return np.abs(z - self.center) - self.radius
        if self.kind == 'complement_of_disk':
            return self.radius - np.abs(z - self.center)
        return self.side * (self.line - z.real)

    def contains(self, z, tol=0.0):
        """Membership, counting points within `tol` of the boundary as inside."""
        return self.clearance(z) <= tol

    def segment_clearance(self, z):
        """Smallest clearance over each segment ``z[k] -> z[k+1]``."""
        z = np.asarray(z, dtype=complex)
        a, b = z[:-1], z[1:]
        if self.kind == 'bounded_disk':
            return _circle_clearance(z, self.center, self.radius)
        # both remaining clearances are concave along a segment: ends suffice
        return np.minimum(self.clearance(a), self.clearance(b))

    def interior_point(self):
        """A point of the set (used for encirclement counts)."""
        if self.kind == 'bounded_disk':
            return complex(self.center)
        raise ValueError("unbounded set has no representative finite point")


def open_loop_degree(W, lam):
    """Number of poles of ``W_lam`` in the open right half-plane."""
    rep = pole_report(W, lam)
    if rep.count_on_line:
        raise RateOnPole(f"pole of W on Re(s) = {-lam + 0.0:g}")
    return rep.count_right_of_line


@dataclass(frozen=True)
class GainInterval:
    lo: float
    hi: float
    p2: int

    def __contains__(self, k):
        return self.lo < k < self.hi

    def __str__(self):
        return f"({fmt(self.lo)},{fmt(self.hi)})->p={self.p2}"


@dataclass(frozen=True)
class GainMarginReport:
    """Open K-intervals and the dominance degree of each closed loop.

    `degenerate` lists intervals on which the curve runs along the real
    axis, so every gain in them puts a closed-loop pole on the line.
    """
    intervals: tuple
    lam: float
    p1: int
    critical_gains: tuple = ()
    degenerate: tuple = ()

    def degree_at(self, k):
        for iv in self.intervals:
            if k in iv:
                return iv.p2
        return None

    def margin(self, p2):
        """All intervals on which the closed loop is ``p2``-dominant."""
        return [iv for iv in self.intervals if iv.p2 == p2]

    def to_text(self):
        lines = [f"gain margins (lambda = {fmt(self.lam)}, p1 = {self.p1})"]
        lines += [f"  {iv}" for iv in self.intervals]
        for lo, hi in self.degenerate:
            lines.append(f"  ({fmt(lo)},{fmt(hi)})->critical")
        return '\n'.join(lines)

    def to_csv(self):
        rows = ['k_lo,k_hi,p2']
        rows += [f"{fmt(iv.lo)},{fmt(iv.hi)},{iv.p2}" for iv in self.intervals]
        return '\n'.join(rows) + '\n'


def _k_of_c(c):
    """Gain whose critical point ``-1/K`` is `c` (``c = 0`` -> infinity)."""
    if c == 0:
        return math.inf
    return -1.0 / c


def gain_margins(W, lam, curve=None):
    """Partition the gain axis by the closed-loop dominance degree.

    The real-axis crossings of the Nyquist curve split the real line into
    open intervals on which the clockwise encirclement count of a point is
    constant; each is mapped to gains through ``K = -1/c``.

    Examples
    --------
    >>> rep = gain_margins(tf([1], [1, 5, 1]), 2.0)
    >>> [str(iv) for iv in rep.intervals]
    ['(-inf,5)->p=1', '(5,inf)->p=0']
    """
    p1 = open_loop_degree(W, lam)
    if curve is None:
        curve = sample_curve(W, lam)
    cs = list(real_axis_crossings(curve).values())
    # c = 0 maps to K = +-inf and must always be a break point
    breaks = sorted(set(cs) | {0.0})
    pieces = []     # (c_lo, c_hi, n_cw or None)
    edges = [-math.inf] + breaks + [math.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        if math.isinf(lo) or math.isinf(hi):
            n_cw = 0    # the ray reaches infinity without meeting the curve
        else:
            try:
                n_cw = clockwise_encirclements(curve, 0.5 * (lo + hi))
            except PointOnCurve:
                n_cw = None
        pieces.append((lo, hi, n_cw))

    # the mapping c -> -1/c is increasing on each sign-definite half line
    kint = []
    for lo, hi, n_cw in pieces:
        if hi <= 0:
            k_lo = 0.0 if math.isinf(lo) else -1.0 / lo
            k_hi = math.inf if hi == 0 else -1.0 / hi
        else:    # lo >= 0
            k_lo = -math.inf if lo == 0 else -1.0 / lo
            k_hi = 0.0 if math.isinf(hi) else -1.0 / hi
        kint.append((k_lo, k_hi, None if n_cw is None else p1 + n_cw))
    kint.sort()

    merged = []
    for k_lo, k_hi, p2 in kint:
        # K = 0 is not critical: both neighbours carry p2 = p1
        if merged and merged[-1][1] == 0.0 and k_lo == 0.0 and \
                merged[-1][2] == p2:
            merged[-1] = (merged[-1][0], k_hi, p2)
        else:
            merged.append((k_lo, k_hi, p2))
    intervals = tuple(GainInterval(a, b, p) for a, b, p in merged
                      if p is not None)
    degenerate = tuple((a, b) for a, b, p in merged if p is None)
    critical = tuple(sorted({_k_of_c(c) for c in cs if c != 0}))
    return GainMarginReport(intervals, float(lam), p1, critical, degenerate)


def _wrap(phi):
    """Wrap angles to (-pi, pi]."""
    out = np.mod(np.asarray(phi) + math.pi, 2 * math.pi) - math.pi
    return np.where(out <= -math.pi, out + 2 * math.pi, out)


@dataclass(frozen=True)
class PhaseMarginReport:
    """Open rotation intervals within (-pi, pi] that keep degree `p2`.

    An interval whose upper end is ``pi`` includes ``pi`` itself.
    """
    intervals: tuple
    k: float
    p2: int
    lam: float
    p1: int
    events: tuple = ()

    def contains(self, phi):
        phi = float(_wrap(phi))
        for lo, hi in self.intervals:
            if lo < phi < hi or (hi == math.pi and phi == math.pi):
                return True
        return False

    def is_full(self):
        return self.intervals == ((-math.pi, math.pi),)

    def to_text(self):
        lines = [f"phase margins (lambda = {fmt(self.lam)}, K = {fmt(self.k)}, "
                 f"p1 = {self.p1}, p2 = {self.p2})"]
        if not self.intervals:
            lines.append("  (empty)")
        for lo, hi in self.intervals:
            close = ']' if hi == math.pi else ')'
            lines.append(f"  ({fmt(lo)},{fmt(hi)}{close}")
        return '\n'.join(lines)

    def to_csv(self):
        rows = ['phi_lo,phi_hi']
        rows += [f"{fmt(lo)},{fmt(hi)}" for lo, hi in self.intervals]
        return '\n'.join(rows) + '\n'


def _magnitude_events(curve, level):
    """Frequencies where ``|W_lam(j omega)| = level`` on the sampled arc."""
    w, z = curve.omegas, curve.points
    g = np.abs(z) - level
    Wl = curve.system
    hits = list(w[g == 0.0])
    for k in np.flatnonzero(g[:-1] * g[1:] < 0):
        hits.append(brentq(lambda om: abs(complex(Wl(1j * om))) - level,
                           w[k], w[k + 1], xtol=1e-12 * w[k + 1],
                           rtol=4 * np.finfo(float).eps))
    return np.asarray(hits, dtype=float)


def phase_margins(W, lam, k, p2, curve=None):
    """Rotation angles ``phi`` keeping the loop ``p2``-dominant at gain `k`.

    Rotating the curve by ``exp(j phi)`` can only change the encirclement
    count of ``-1/k`` when a point of modulus ``1/|k|`` is rotated onto it,
    so the count is constant between those event angles.  Both the arc and
    its mirror contribute events.
    """
    k = float(k)
    if k == 0:
        raise ValueError("phase margins need a nonzero gain")
    p1 = open_loop_degree(W, lam)
    if curve is None:
        curve = sample_curve(W, lam)
    target = p2 - p1
    crit = -1.0 / k
    arg_crit = math.atan2(0.0, crit)
    om = _magnitude_events(curve, 1.0 / abs(k))
    vals = evaluate(curve.system, om) if om.size else np.zeros(0, complex)
    ev = np.concatenate([arg_crit - np.angle(vals), arg_crit + np.angle(vals)])
    v_inf = curve.value_at_infinity
    if v_inf != 0 and abs(abs(v_inf) - 1.0 / abs(k)) <= 1e-12 / abs(k):
        ev = np.append(ev, arg_crit - np.angle(v_inf))
    ev = np.unique(np.round(_wrap(ev), 13)) if ev.size else ev
    ev = ev[ev > -math.pi]
    edges = [-math.pi] + list(ev) + [math.pi]
    if ev.size and ev[-1] == math.pi:
        edges = edges[:-1]

    def count(phi):
        # rotating the curve by phi == rotating the point by -phi
        return clockwise_encirclements(curve, crit * complex(math.cos(phi),
                                                             -math.sin(phi)))

    good = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        if count(0.5 * (lo + hi)) == target:
            if good and good[-1][1] == lo and lo not in ev:
                good[-1] = (good[-1][0], hi)
            else:
                good.append((lo, hi))
    return PhaseMarginReport(tuple((float(a), float(b)) for a, b in good), k,
                             int(p2), float(lam), p1, tuple(float(e) for e in ev))


@dataclass(frozen=True)
class DiskMarginReport:
    holds: bool
    min_distance: float
    encirclements_cw: int
    p2: int
    p1: int
    disk: Disk
    lam: float
    touch_omega: float = math.nan

    def to_text(self):
        verdict = 'holds' if self.holds else 'fails'
        return '\n'.join([
            f"disk margin D({fmt(self.disk.k1)},{fmt(self.disk.k2)}) "
            f"[{self.disk.kind}] (lambda = {fmt(self.lam)}): {verdict}",
            f"  p1 = {self.p1}, target p2 = {self.p2}, "
            f"clockwise encirclements = {self.encirclements_cw}",
            f"  min_distance = {fmt(self.min_distance)}",
        ])

    def to_csv(self):
        return ('k1,k2,kind,holds,min_distance,encirclements_cw,p1,p2\n'
                f"{fmt(self.disk.k1)},{fmt(self.disk.k2)},{self.disk.kind},"
                f"{int(self.holds)},{fmt(self.min_distance)},"
                f"{self.encirclements_cw},{self.p1},{self.p2}\n")


def _clearance(curve, disk):
    """Minimum clearance of the closed curve from the set and where it occurs."""
    z = curve.closed_polygon()
    closed = np.append(z, z[0])
    seg = disk.segment_clearance(closed)
    i = int(np.argmin(seg))
    # report the closer end of the worst segment
    ends = disk.clearance(closed[i:i + 2])
    i = i + int(np.argmin(ends)) if i + 1 < z.size else i
    m = curve.points.size
    # polygon vertex i maps back to arc index |i - (m - 1)|
    j = min(abs(i - (m - 1)), m - 1)
    return float(seg[i]), float(curve.omegas[j])


def disk_margin_check(W, lam, disk, p2, curve=None):
    """Check whether ``D(k1, k2)`` is a ``p2``-disk margin with rate `lam`.

    The curve must stay clear of the set (points within ``1e-9 * scale`` of
    the boundary count as touching) and encircle it clockwise ``p2 - p1``
    times.  A bounded curve encircles an unbounded set zero times, so
    half-plane and complement sets require ``p2 == p1``.
    """
    if not isinstance(disk, Disk):
        disk = Disk(*disk)
    p1 = open_loop_degree(W, lam)
    if curve is None:
        curve = sample_curve(W, lam)
    clear, om = _clearance(curve, disk)
    intersects = clear <= MEMBER_TOL * curve.scale
    if disk.kind == 'bounded_disk':
        try:
            n_cw = clockwise_encirclements(curve, disk.interior_point())
        except PointOnCurve:
            n_cw = 0
    else:
        n_cw = 0
    holds = (not intersects) and n_cw == p2 - p1
    return DiskMarginReport(holds, max(0.0, clear) if not intersects else 0.0,
                            n_cw, int(p2), p1, disk, float(lam), om)


@dataclass(frozen=True)
class CircleCriterionResult:
    p: int
    satisfied: bool
    conditions: dict = field(default_factory=dict)

    def to_text(self):
        lines = [f"circle criterion: {'satisfied' if self.satisfied else 'not satisfied'}"
                 f", p = {self.p}"]
        for key, val in self.conditions.items():
            lines.append(f"  {key}: {val}")
        return '\n'.join(lines)


def circle_criterion(W, lam, k1, k2, mode='literal', curve=None):
    """Circle criterion for strict ``p``-dominance of the Lure loop.

    Checks that ``W_lam`` has no poles on the imaginary axis, solves the
    encirclement condition about ``-1/k1`` for ``p`` and tests the curve
    against ``D(k1, k2)``.  Sector membership of the nonlinearity is the
    caller's job (see ``lure.verify_sector``).

    `mode` only matters when ``k1 k2 < 0``: ``'literal'`` requires the curve
    to lie in the set ``D(k1, k2)`` (the exterior of the disk);
    ``'classical'`` requires it to lie inside the bounded disk.
    """
    if mode not in ('literal', 'classical'):
        raise ValueError(f"unknown mode {mode!r}")
    disk = Disk(k1, k2)
    cond = {'disk_kind': disk.kind, 'mode': mode}
    rep = pole_report(W, lam)
    cond['no_poles_on_axis'] = rep.count_on_line == 0
    cond['q'] = rep.count_right_of_line
    if rep.count_on_line:
        return CircleCriterionResult(None, False, cond)
    if curve is None:
        curve = sample_curve(W, lam)
    tol = MEMBER_TOL * curve.scale
    clear, _ = _clearance(curve, disk)
    if disk.kind == 'complement_of_disk':
        if mode == 'literal':
            # curve inside D: clear of the closed bounded disk
            z = curve.closed_polygon()
            seg = _circle_clearance(np.append(z, z[0]), disk.center,
                                    disk.radius)
            placed = bool(seg.min() > tol)
        else:
            placed = clear > tol
    else:
        placed = clear > tol
    cond['curve_placement'] = placed
    if k1 == 0:
        n_cw = 0
    else:
        try:
            n_cw = clockwise_encirclements(curve, -1.0 / k1)
        except PointOnCurve:
            cond['encirclements'] = None
            return CircleCriterionResult(None, False, cond)
    cond['encirclements'] = n_cw
    p = rep.count_right_of_line + n_cw
    return CircleCriterionResult(p, bool(placed), cond)


def _golden_max(f, a, b, rtol=1e-10):
    """Golden-section search for a maximum of a unimodal `f` on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * max(abs(a), abs(b), 1e-300):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def hinf_lambda_norm(W, lam, curve=None):
    """``sup |W(j omega - lam)|`` over real ``omega``.

    The sampled maximum is refined by golden-section search around every
    local maximum of the sampled modulus; the feedthrough value at
    infinity is included as a candidate.
    """
    if curve is None:
        curve = sample_curve(W, lam)
    w, mag = curve.omegas, np.abs(curve.points)
    Wl = curve.system
    best = max(float(mag.max()), abs(curve.value_at_infinity))

    def f(om):
        return abs(complex(Wl(1j * om)))

    ext = np.concatenate([[-np.inf], mag, [-np.inf]])
    peaks = np.flatnonzero((ext[1:-1] >= ext[:-2]) & (ext[1:-1] >= ext[2:]))
    for k in peaks:
        lo = w[max(k - 1, 0)]
        hi = w[min(k + 1, w.size - 1)]
        if hi > lo:
            best = max(best, _golden_max(f, lo, hi)[1])
    return best


def msd_family(m=1.0, k=1.0):
    """``d -> 1 / (m s^2 + d s + k)``."""
    return lambda d: tf([1.0], [k, d, m])


@dataclass(frozen=True)
class SweepResult:
    rows: tuple          # (lam, param, k_upper) with nan for gaps
    optimal: dict        # param -> (lam*, k*)

    def to_csv(self, param_name='d'):
        out = [f"lambda,{param_name},k_upper"]
        out += [f"{fmt(a)},{fmt(b)},{fmt(c)}" for a, b, c in self.rows]
        return '\n'.join(out) + '\n'


def _upper_one_gain(W, lam):
    try:
        rep = gain_margins(W, lam)
    except (DomarginError, ValueError):
        return math.nan
    ends = [iv.hi for iv in rep.margin(1) if math.isfinite(iv.hi)]
    if not ends:
        ends = [iv.lo for iv in rep.margin(1) if math.isfinite(iv.lo)]
    return max(ends) if ends else math.nan


def margin_vs_rate_sweep(family, lambda_grid, param_grid, threads=None):
    """Finite end point of the 1-gain margin over a (rate, parameter) grid.

    `family` maps a parameter value to a transfer function.  Points where
    ``W_lam`` has a pole on the imaginary axis (or no 1-gain margin exists)
    are recorded as ``nan``.  Work is spread over `threads` workers (default
    from ``DOMARGIN_THREADS``); the result order is that of the grids.
    """
    jobs = [(float(lam), float(p)) for p in param_grid for lam in lambda_grid]
    n = threads or _threads()

    def run(job):
        lam, p = job
        return lam, p, _upper_one_gain(family(p), lam)

    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            rows = list(ex.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    optimal = {}
    for lam, p, ku in rows:
        if math.isnan(ku):
            continue
        if p not in optimal or ku > optimal[p][1]:
            optimal[p] = (float(lam), float(ku))
    return SweepResult(tuple(rows), optimal)

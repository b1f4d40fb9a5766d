"""Nyquist curve of the rate-shifted transfer function.

Only the arc ``omega >= 0`` is sampled.  The closed curve used for winding
numbers is that arc, its complex-conjugate mirror (``omega < 0``) and a
straight closing segment through the value at infinity.  Poles of
``W_lambda`` on the imaginary axis are rejected up front, so no indentation
is ever needed.

Windings are counted counterclockwise-positive; the clockwise count used in
dominance statements is the negation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _backend
from ._format import fmt
from .exceptions import NonIntegerWinding, PointOnCurve, RateOnPole
from .rational import pole_report, tf_shift

__all__ = ['NyquistCurve', 'Crossing', 'CrossingSet', 'sample_curve',
           'winding_number', 'clockwise_encirclements', 'real_axis_crossings',
           'evaluate']

N_GRID = 2000
MAX_TURN = 0.05           # rad, turning angle between consecutive chords
CHORD_FRACTION = 1 / 500  # of the curve scale
REL_STEP = 1e-12          # smallest relative frequency step
MAX_POINTS = 500_000
ON_CURVE_TOL = 1e-8       # relative to curve scale
RESIDUE_TOL = 0.1
DEDUP_TOL = 1e-9


def evaluate(Wl, omegas):
    """``W_lambda(j omega)`` for an array of frequencies."""
    return np.asarray(Wl(1j * np.asarray(omegas, dtype=float)), dtype=complex)


@dataclass(frozen=True, eq=False)
class NyquistCurve:
    """Sampled arc ``omega in [0, omega_max]`` of ``W_lambda(j omega)``."""
    system: object          # the shifted transfer function
    lam: float
    omegas: np.ndarray
    points: np.ndarray
    value_at_infinity: complex
    scale: float

    def closed_polygon(self):
        """Vertices of the full closed curve, ordered by increasing omega.

        Starts at ``conj(points[-1])`` (omega = -omega_max), runs through
        ``points[0]`` (omega = 0) to ``points[-1]`` and ends at the value at
        infinity; the polygon closes back to its first vertex.
        """
        z = self.points
        return np.concatenate([np.conj(z[:0:-1]), z,
                               [complex(self.value_at_infinity)]])

    def to_csv(self):
        lines = ['omega,re,im']
        for w, z in zip(self.omegas, self.points):
            lines.append(f"{fmt(w)},{fmt(z.real)},{fmt(z.imag)}")
        return '\n'.join(lines) + '\n'

    def refine(self, mask_fn, passes=8):
        """Bisect the arc segments flagged by ``mask_fn(omegas, points)``."""
        w, z = self.omegas, self.points
        for _ in range(passes):
            bad = np.asarray(mask_fn(w, z), dtype=bool)
            bad &= np.diff(w) > REL_STEP * w[1:]
            if not bad.any() or w.size > MAX_POINTS:
                break
            mid = 0.5 * (w[:-1][bad] + w[1:][bad])
            idx = np.flatnonzero(bad) + 1
            w = np.insert(w, idx, mid)
            z = np.insert(z, idx, evaluate(self.system, mid))
        return _make_curve(self.system, self.lam, w, z)


def _make_curve(Wl, lam, w, z):
    v_inf = complex(Wl.value_at_infinity())
    scale = float(max(np.abs(z).max(), abs(v_inf)))
    w = w.copy()
    z = z.copy()
    w.flags.writeable = False
    z.flags.writeable = False
    return NyquistCurve(Wl, float(lam), w, z, v_inf, scale)


def _adaptive(Wl, w, v_inf, max_turn, chord_fraction):
    z = evaluate(Wl, w)
    for _ in range(200):
        scale = max(np.abs(z).max(), abs(v_inf))
        d = np.diff(z)
        chord = np.abs(d)
        bad = chord > scale * chord_fraction
        tiny = chord <= 1e-14 * scale
        turn = np.abs(np.angle(d[1:] * np.conj(d[:-1])))
        turn[tiny[1:] | tiny[:-1]] = 0.0
        sharp = turn > max_turn
        bad[1:] |= sharp
        bad[:-1] |= sharp
        bad &= np.diff(w) > REL_STEP * w[1:]
        if not bad.any() or w.size > MAX_POINTS:
            break
        mid = 0.5 * (w[:-1][bad] + w[1:][bad])
        idx = np.flatnonzero(bad) + 1
        w = np.insert(w, idx, mid)
        z = np.insert(z, idx, evaluate(Wl, mid))
    return w, z


def sample_curve(W, lam=0.0, *, n_grid=N_GRID, max_turn=MAX_TURN,
                 chord_fraction=CHORD_FRACTION):
    """Sample the Nyquist arc of ``W_lam`` adaptively.

    The frequency range is ``[0, 1e3 (1 + max |pole of W_lam|)]`` on a
    logarithmic grid of `n_grid` points plus ``omega = 0``.  Segments are
    bisected while the curve turns by more than `max_turn` radians at a
    vertex or a chord is longer than ``chord_fraction * scale``.  If a
    strictly proper curve has not come within ``1e-3 * scale`` of zero at
    the top frequency, the range is extended by decades.

    Raises
    ------
    RateOnPole
        If ``W_lam`` has a pole on the imaginary axis.
    """
    if not W.is_proper():
        raise ValueError("transfer function must be proper")
    report = pole_report(W, lam)
    if report.count_on_line:
        raise RateOnPole(f"{report.count_on_line} pole(s) of W on "
                         f"Re(s) = {-lam + 0.0:g}")
    Wl = tf_shift(W, lam)
    poles = Wl.poles()
    mags = np.abs(np.concatenate([poles, Wl.zeros()]))
    mags = mags[mags > 0]
    w_hi = 1e3 * (1.0 + (np.abs(poles).max() if poles.size else 0.0))
    w_lo = 1e-3 * min(1.0, mags.min()) if mags.size else 1e-3
    v_inf = Wl.value_at_infinity()
    for _ in range(8):
        grid = np.concatenate([[0.0], np.logspace(np.log10(w_lo),
                                                  np.log10(w_hi), n_grid)])
        w, z = _adaptive(Wl, grid, v_inf, max_turn, chord_fraction)
        curve = _make_curve(Wl, lam, w, z)
        if not Wl.is_strictly_proper() or \
                abs(v_inf - z[-1]) <= 1e-3 * max(curve.scale, 1e-12):
            break
        w_hi *= 10.0
    return curve


def _winding(curve, point):
    poly = curve.closed_polygon()
    total, dmin = _backend.polygon_winding(
        np.ascontiguousarray(poly.real), np.ascontiguousarray(poly.imag),
        float(point.real), float(point.imag))
    return total / (2.0 * math.pi), dmin


def winding_number(curve, point):
    """Counterclockwise winding number of the closed curve about `point`.

    Raises
    ------
    PointOnCurve
        If `point` is within ``1e-8 * scale`` of the sampled curve.
    NonIntegerWinding
        If the accumulated angle is not within 0.1 turn of an integer, even
        after one local refinement pass.
    """
    point = complex(point)
    turns, dmin = _winding(curve, point)
    if dmin <= ON_CURVE_TOL * curve.scale:
        raise PointOnCurve(f"point {point} lies on the Nyquist curve "
                           f"(distance {dmin:.3g})")
    r = round(turns)
    if abs(turns - r) < RESIDUE_TOL:
        return int(r)

    def coarse(w, z):
        return np.abs(np.angle((z[1:] - point) / (z[:-1] - point))) > 0.5

    refined = curve.refine(coarse)
    turns, dmin = _winding(refined, point)
    if dmin <= ON_CURVE_TOL * refined.scale:
        raise PointOnCurve(f"point {point} lies on the Nyquist curve")
    r = round(turns)
    if abs(turns - r) >= RESIDUE_TOL:
        raise NonIntegerWinding(f"winding residue {turns - r:.3g} about "
                                f"{point}")
    return int(r)


def clockwise_encirclements(curve, point):
    """Clockwise encirclement count, ``-winding_number``."""
    return -winding_number(curve, point)


@dataclass(frozen=True)
class Crossing:
    value: float
    omega: float
    direction: str    # 'upward', 'downward' or 'touch'


@dataclass(frozen=True)
class CrossingSet:
    crossings: tuple

    def values(self):
        return np.array([c.value for c in self.crossings])

    def __len__(self):
        return len(self.crossings)

    def __iter__(self):
        return iter(self.crossings)


def _direction(im_before, im_after):
    if im_before < 0 < im_after:
        return 'upward'
    if im_before > 0 > im_after:
        return 'downward'
    return 'touch'


def real_axis_crossings(curve):
    """Points where the closed curve meets the real axis.

    Always contains the ``omega = 0`` point and, since coefficients are
    real, the value at infinity.  Sign changes of the imaginary part
    between samples are refined with Brent's method to a relative
    frequency tolerance of 1e-12; runs of samples lying exactly on the axis
    contribute their end points.
    """
    w, z = curve.omegas, curve.points
    im = z.imag
    Wl = curve.system
    out = []
    im1 = im[1] if im.size > 1 else 0.0
    out.append(Crossing(float(z[0].real), 0.0, _direction(-im1, im1)))

    def f(om):
        return float(np.imag(Wl(1j * om)))

    m = im.size
    zero = im == 0.0
    zero[0] = False    # omega = 0 is handled above
    padded = np.concatenate([[False], zero, [False]])
    run_edge = zero & ~(padded[:-2] & padded[2:])
    for k in np.flatnonzero(run_edge):
        after = im[k + 1] if k + 1 < m else 0.0
        out.append(Crossing(float(z[k].real), float(w[k]),
                            _direction(im[k - 1], after)))
    change = np.flatnonzero(im[1:-1] * im[2:] < 0) + 1
    for k in change:
        lo, hi = w[k], w[k + 1]
        om = brentq(f, lo, hi, xtol=1e-12 * hi, rtol=4 * np.finfo(float).eps)
        val = complex(Wl(1j * om))
        out.append(Crossing(float(val.real), float(om),
                            _direction(im[k], im[k + 1])))
    v_inf = curve.value_at_infinity
    out.append(Crossing(float(v_inf.real), math.inf,
                        _direction(im[-1], -im[-1])))
    out.sort(key=lambda c: (c.value, c.omega))
    kept = []
    for c in out:
        if kept and abs(c.value - kept[-1].value) <= DEDUP_TOL * curve.scale:
            continue
        kept.append(c)
    return CrossingSet(tuple(kept))

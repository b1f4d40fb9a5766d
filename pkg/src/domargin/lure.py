"""Lure systems ``x' = Ax + Bu, y = Cx, u = -phi(y)``.

Sector checks for the static nonlinearity, equilibria, fixed-step RK4
simulation and a coarse classification of where a trajectory ends up
(equilibrium, limit cycle, unbounded or undetermined).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import _backend
from ._format import fmt
from ._purepy import smooth_sat
from .rational import StateSpace, ss_from_tf

__all__ = ['StaticNonlinearity', 'LureSystem', 'Sector', 'Equilibrium',
           'SimulationTrace', 'AttractorVerdict', 'sector_bounds',
           'verify_sector', 'equilibria', 'simulate', 'classify',
           'bistable_msd', 'oscillator_msd']

FAMILIES = ('tanh', 'cubic', 'sine', 'linear', 'saturation')
# relative width of the C1 blend at the saturation corner
SAT_BLEND = 0.01


@dataclass(frozen=True)
class StaticNonlinearity:
    """``phi(y) = gain * f(y)`` for one of the supported shapes ``f``.

    ``saturation`` clips at ``+-limit`` with a quadratic (C1) blend over a
    band of width ``0.01 * limit`` centred on the corner, so that ``phi`` is
    continuously differentiable.
    """
    family: str
    gain: float
    limit: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown nonlinearity {self.family!r}; "
                             f"expected one of {FAMILIES}")
        if self.family == 'saturation' and not self.limit > 0:
            raise ValueError("saturation limit must be positive")

    @property
    def code(self):
        return FAMILIES.index(self.family)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        c = self.gain
        if self.family == 'tanh':
            return c * np.tanh(y)
        if self.family == 'cubic':
            return c * y ** 3
        if self.family == 'sine':
            return c * np.sin(y)
        if self.family == 'linear':
            return c * y
        return c * np.vectorize(smooth_sat, otypes=[float])(y, self.limit)

    def derivative(self, y):
        y = np.asarray(y, dtype=float)
        c = self.gain
        if self.family == 'tanh':
            return c * (1.0 - np.tanh(y) ** 2)
        if self.family == 'cubic':
            return 3.0 * c * y ** 2
        if self.family == 'sine':
            return c * np.cos(y)
        if self.family == 'linear':
            return c * np.ones_like(y)
        h = 0.5 * SAT_BLEND * self.limit
        r = np.abs(y)
        ramp = np.clip((self.limit + h - r) / (2.0 * h), 0.0, 1.0)
        return c * ramp

    def critical_points(self):
        """Points where ``phi'`` attains its extreme values."""
        if self.family == 'sine':
            return np.array([0.0, math.pi, -math.pi])
        if self.family == 'saturation':
            h = 0.5 * SAT_BLEND * self.limit
            return np.array([0.0, self.limit - h, self.limit + h,
                             -self.limit + h, -self.limit - h])
        return np.array([0.0])


class Sector(NamedTuple):
    lower: float
    upper: float

    @property
    def bounded(self):
        return math.isfinite(self.lower) and math.isfinite(self.upper)


def sector_bounds(nl):
    """Tightest interval containing ``phi'(y)`` over all real ``y``."""
    c = nl.gain
    if nl.family in ('tanh', 'saturation'):
        return Sector(min(c, 0.0), max(c, 0.0))
    if nl.family == 'sine':
        return Sector(-abs(c), abs(c))
    if nl.family == 'linear':
        return Sector(c, c)
    if c == 0:
        return Sector(0.0, 0.0)
    return Sector(0.0, math.inf) if c > 0 else Sector(-math.inf, 0.0)


def verify_sector(nl, k1, k2, samples=2001):
    """Check ``(phi'(y) - k1)(phi'(y) - k2) <= 0`` on a sample grid.

    The grid is symmetric and logarithmically spaced over
    ``1e-6 <= |y| <= 1e6``, plus zero and the points where ``phi'`` is
    extremal.
    """
    if not k1 < k2:
        raise ValueError("need k1 < k2")
    half = np.logspace(-6, 6, max(samples // 2, 1))
    y = np.concatenate([-half[::-1], [0.0], half, nl.critical_points()])
    d = nl.derivative(y)
    tol = 1e-12 * (1.0 + max(abs(k1) if math.isfinite(k1) else 0.0,
                             abs(k2) if math.isfinite(k2) else 0.0))
    ok = (d >= k1 - tol) & (d <= k2 + tol)
    return bool(np.all(ok))


@dataclass(frozen=True, eq=False)
class LureSystem:
    """Negative feedback of a strictly proper linear block with ``phi``."""
    linear: StateSpace
    nonlinearity: StaticNonlinearity

    def __post_init__(self):
        if self.linear.D != 0:
            raise ValueError("linear block must be strictly proper (D = 0)")
        if self.linear.n < 1:
            raise ValueError("linear block needs at least one state")

    @classmethod
    def from_tf(cls, W, nonlinearity):
        return cls(ss_from_tf(W), nonlinearity)

    @property
    def n(self):
        return self.linear.n

    def rhs(self, x):
        S = self.linear
        y = float(S.C[0] @ x)
        return S.A @ x - S.B[:, 0] * float(self.nonlinearity(y))

    def linearization(self, y):
        """State matrix of the loop linearized where the output equals `y`."""
        S = self.linear
        return S.A - float(self.nonlinearity.derivative(y)) * (S.B @ S.C)


@dataclass(frozen=True, eq=False)
class Equilibrium:
    state: np.ndarray
    output: float
    stable: bool
    eigenvalues: np.ndarray
    near_boundary: bool = False

    @property
    def stability(self):
        return 'stable' if self.stable else 'unstable'


def equilibria(sys, window=(-100.0, 100.0), n_grid=10_000):
    """All equilibria with output in `window`, found by a sign-change scan.

    At rest ``x = -A^-1 B u`` and ``u = -phi(y)``.  Solving the bordered
    system ``[[A, B], [C, 0]] v = [0, 1]`` writes state and input as
    ``y * v``, so equilibria are the roots of ``v_u y + phi(y)``; with an
    integrator in the loop ``v_u = 0`` and the condition is ``phi(y) = 0``.
    Roots are polished with Brent's method to 1e-12.  Roots found in the
    first or last grid cell are flagged ``near_boundary``.
    """
    S = sys.linear
    n = S.n
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = S.A
    M[:n, n] = S.B[:, 0]
    M[n, :n] = S.C[0]
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    try:
        v = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        raise ValueError("linear block has a zero at s = 0; equilibria are "
                         "not determined by the output") from None
    v_x, v_u = v[:n], v[n]
    phi = sys.nonlinearity

    def h(y):
        return v_u * y + float(phi(y))

    lo, hi = window
    grid = np.linspace(lo, hi, n_grid)
    vals = v_u * grid + phi(grid)
    roots = list(grid[vals == 0.0])
    for k in np.flatnonzero(vals[:-1] * vals[1:] < 0):
        roots.append(brentq(h, grid[k], grid[k + 1], xtol=1e-12, rtol=1e-15))
    # brentq stops within 1e-12, so anything that small is the origin
    roots = sorted(0.0 if abs(y) <= 1e-12 else float(y) for y in roots)
    cell = grid[1] - grid[0]
    out = []
    for y in roots:
        J = sys.linearization(y)
        ev = np.linalg.eigvals(J)
        out.append(Equilibrium(state=v_x * y, output=float(y),
                               stable=bool(np.all(ev.real < 0)),
                               eigenvalues=ev,
                               near_boundary=bool(y - lo <= cell or hi - y <= cell)))
    return out


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    times: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    halted: bool = False

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def to_csv(self, include_states=False):
        n = self.states.shape[1]
        head = ['t'] + ([f"x{i + 1}" for i in range(n)] if include_states else []) + ['y']
        lines = [','.join(head)]
        for t, x, y in zip(self.times, self.states, self.outputs):
            cols = [fmt(t)]
            if include_states:
                cols += [fmt(v) for v in x]
            cols.append(fmt(y))
            lines.append(','.join(cols))
        return '\n'.join(lines) + '\n'


def simulate(sys, x0, T=50.0, dt=1e-3, bound=1e6):
    """Fixed-step RK4 integration of the closed loop.

    Stops early (``halted=True``) once ``||x|| > bound``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not T >= dt:
        raise ValueError("horizon must be at least one step")
    S = sys.linear
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != S.n:
        raise ValueError(f"initial state needs {S.n} entries, got {x0.size}")
    n_steps = int(round(T / dt))
    nl = sys.nonlinearity
    states, done = _backend.rk4_lure(
        np.ascontiguousarray(S.A), np.ascontiguousarray(S.B[:, 0]),
        np.ascontiguousarray(S.C[0]), nl.code, float(nl.gain),
        float(nl.limit), x0, float(dt), n_steps, float(bound))
    states = np.asarray(states)
    times = dt * np.arange(states.shape[0])
    return SimulationTrace(times, states, states @ S.C[0], halted=done < n_steps)


@dataclass(frozen=True)
class AttractorVerdict:
    kind: str        # equilibrium | limit_cycle | unbounded | undetermined
    value: float = math.nan      # equilibrium output
    period: float = math.nan
    amplitude: float = math.nan
    diagnostics: dict = field(default_factory=dict)

    def __str__(self):
        if self.kind == 'equilibrium':
            return f"equilibrium({self.value:.6f})"
        if self.kind == 'limit_cycle':
            return f"limit_cycle(period={self.period:.6f}, amplitude={self.amplitude:.6f})"
        return self.kind


def _peak_times(t, y):
    k = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1
    # parabolic refinement through the three samples around each maximum
    a, b, c = y[k - 1], y[k], y[k + 1]
    den = a - 2 * b + c
    with np.errstate(invalid='ignore', divide='ignore'):
        off = np.where(den != 0, 0.5 * (a - c) / den, 0.0)
    return t[k] + off * (t[1] - t[0])


def classify(trace, transient=0.6, eq_tol=1e-6, cycle_tol=0.01):
    """Classify the tail of a trace (the first 60% is discarded).

    * equilibrium: output spread below ``eq_tol * (1 + |mean|)``;
    * limit_cycle: spread above ``eq_tol`` and intervals between successive
      output maxima with relative standard deviation below `cycle_tol`;
    * unbounded: the simulation halted on the state bound;
    * undetermined otherwise.
    """
    t, y = trace.times, trace.outputs
    if trace.halted:
        return AttractorVerdict('unbounded', diagnostics={'t_halt': float(t[-1])})
    if t[-1] - t[0] < 10.0:
        raise ValueError("trace must cover at least 10 s")
    start = int(transient * t.size)
    tt, yy = t[start:], y[start:]
    spread = float(yy.max() - yy.min())
    mean = float(yy.mean())
    diag = {'spread': spread, 'mean': mean}
    if spread < eq_tol * (1.0 + abs(mean)):
        return AttractorVerdict('equilibrium', value=float(yy[-1]),
                                diagnostics=diag)
    peaks = _peak_times(tt, yy)
    diag['n_peaks'] = int(peaks.size)
    if spread > eq_tol and peaks.size >= 3:
        gaps = np.diff(peaks)
        rsd = float(gaps.std() / gaps.mean())
        diag['interval_rsd'] = rsd
        if rsd < cycle_tol:
            return AttractorVerdict('limit_cycle', period=float(gaps.mean()),
                                    amplitude=0.5 * spread, diagnostics=diag)
    return AttractorVerdict('undetermined', diagnostics=diag)


def bistable_msd(k_p=-2.0, m=1.0, d=5.0, k=1.0):
    """Mass-spring-damper with ``u = -k_p tanh(y)``."""
    from .rational import tf
    return LureSystem.from_tf(tf([1.0], [k, d, m]),
                              StaticNonlinearity('tanh', k_p))


def oscillator_msd(k_i=-5.0, m=1.0, d=5.0, k=1.0):
    """Mass-spring-damper with ``u = -k_i tanh(integral of y)``."""
    from .rational import tf
    return LureSystem.from_tf(tf([1.0], [0.0, k, d, m]),
                              StaticNonlinearity('tanh', k_i))

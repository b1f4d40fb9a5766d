"""Real polynomials, SISO transfer functions and their state-space realizations.

Coefficients are stored in *ascending* degree order throughout: ``[a0, a1,
a2]`` is ``a0 + a1*s + a2*s**2``.  Transfer-function denominators are kept
monic so that equality of two transfer functions is plain coefficient
equality.

The rate shift ``W -> W_lambda`` with ``W_lambda(s) = W(s - lambda)`` moves
the vertical line ``Re(s) = -lambda`` onto the imaginary axis; all pole
counts in this package are taken relative to that line.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ['Polynomial', 'RationalTransferFunction', 'StateSpace',
           'PoleReport', 'tf', 'poly_shift', 'poly_roots', 'tf_shift',
           'pole_report', 'ss_from_tf', 'tf_from_ss', 'tf_series',
           'tf_feedback']

# pole/zero pairs closer than this (relative) are cancelled in pole_report
CANCEL_TOL = 1e-9
# poles within LINE_TOL * (1 + |pole|) of Re(s) = -lambda count as on the line
LINE_TOL = 1e-9


class Polynomial:
    """Polynomial with real coefficients in ascending degree order.

    Trailing (highest-degree) zeros are trimmed; the zero polynomial is
    stored as the single coefficient ``0``.  Instances are immutable.
    """

    __slots__ = ('_c',)

    def __init__(self, coefficients):
        c = np.atleast_1d(np.asarray(coefficients, dtype=float)).ravel()
        if c.size == 0:
            raise ValueError("polynomial needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        nz = np.flatnonzero(c)
        c = c[:nz[-1] + 1].copy() if nz.size else np.zeros(1)
        c.flags.writeable = False
        self._c = c

    @property
    def coefficients(self):
        return self._c

    @property
    def degree(self):
        return self._c.size - 1

    @property
    def leading(self):
        return self._c[-1]

    def is_zero(self):
        return self._c.size == 1 and self._c[0] == 0.0

    def __call__(self, s):
        """Evaluate by Horner's rule; `s` may be a scalar or an array."""
        s = np.asarray(s)
        out = np.full(s.shape, self._c[-1], dtype=np.result_type(s, float))
        for a in self._c[-2::-1]:
            out = out * s + a
        return out if out.ndim else out[()]

    def __add__(self, other):
        other = _as_poly(other)
        n = max(self._c.size, other._c.size)
        return Polynomial(np.pad(self._c, (0, n - self._c.size))
                          + np.pad(other._c, (0, n - other._c.size)))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self._c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(self._c * other)
        return Polynomial(np.convolve(self._c, _as_poly(other)._c))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other, tol=1e-10):
        other = _as_poly(other)
        n = max(self._c.size, other._c.size)
        a = np.pad(self._c, (0, n - self._c.size))
        b = np.pad(other._c, (0, n - other._c.size))
        return bool(np.all(np.abs(a - b) <= tol * max(1.0, np.abs(a).max())))

    def shift(self, lam):
        return poly_shift(self, lam)

    def roots(self):
        return poly_roots(self)

    def __repr__(self):
        return f"Polynomial({self._c.tolist()!r})"


def _as_poly(p):
    return p if isinstance(p, Polynomial) else Polynomial(p)


def poly_shift(p, lam):
    """Return ``q`` with ``q(s) = p(s - lam)``.

    Uses the Taylor shift by repeated synthetic division, which is exact
    in the number of operations and keeps the degree.

    Examples
    --------
    >>> poly_shift([1, 5, 1], 2).coefficients.tolist()
    [-5.0, 1.0, 1.0]
    """
    p = _as_poly(p)
    if lam < 0:
        raise ValueError("shift rate must be non-negative")
    a = p.coefficients.copy()
    c = -float(lam)
    n = a.size - 1
    if c != 0.0:
        for i in range(n):
            for j in range(n - 1, i - 1, -1):
                a[j] += c * a[j + 1]
    return Polynomial(a)


def poly_roots(p):
    """All complex roots of `p` (with multiplicity) from its companion matrix."""
    p = _as_poly(p)
    if p.is_zero():
        raise ValueError("the zero polynomial has no well-defined roots")
    c = p.coefficients
    n = p.degree
    if n == 0:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(comp).astype(complex)


class RationalTransferFunction:
    """SISO transfer function ``num(s) / den(s)`` with a monic denominator.

    No pole-zero cancellation is ever performed on construction or in
    arithmetic; near-cancellations stay visible to the caller.
    """

    __slots__ = ('num', 'den')

    def __init__(self, num, den):
        num, den = _as_poly(num), _as_poly(den)
        if den.is_zero():
            raise ValueError("denominator is identically zero")
        lead = den.leading
        self.num = Polynomial(num.coefficients / lead)
        self.den = Polynomial(den.coefficients / lead)

    @property
    def order(self):
        return self.den.degree

    @property
    def relative_degree(self):
        if self.num.is_zero():
            return np.inf
        return self.den.degree - self.num.degree

    def is_proper(self):
        return self.relative_degree >= 0

    def is_strictly_proper(self):
        return self.relative_degree >= 1

    def value_at_infinity(self):
        """Limit of W(s) as |s| -> infinity (feedthrough term)."""
        if not self.is_proper():
            raise ValueError("improper transfer function has no finite limit")
        if self.num.degree == self.den.degree and not self.num.is_zero():
            return float(self.num.leading)
        return 0.0

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def poles(self):
        return poly_roots(self.den)

    def zeros(self):
        if self.num.is_zero():
            return np.zeros(0, dtype=complex)
        return poly_roots(self.num)

    def shift(self, lam):
        return tf_shift(self, lam)

    def __mul__(self, other):
        if np.isscalar(other):
            return RationalTransferFunction(self.num * other, self.den)
        return tf_series(self, other)

    __rmul__ = __mul__

    def feedback(self, k):
        return tf_feedback(self, k)

    def __eq__(self, other):
        if not isinstance(other, RationalTransferFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def allclose(self, other, tol=1e-10):
        return self.num.allclose(other.num, tol) and \
            self.den.allclose(other.den, tol)

    def __repr__(self):
        return (f"RationalTransferFunction({self.num.coefficients.tolist()}, "
                f"{self.den.coefficients.tolist()})")


def tf(num, den):
    """Shorthand constructor; coefficients in ascending order."""
    return RationalTransferFunction(num, den)


def tf_shift(W, lam):
    """The rate-shifted transfer function ``W_lam(s) = W(s - lam)``."""
    return RationalTransferFunction(poly_shift(W.num, lam),
                                    poly_shift(W.den, lam))


def tf_series(W1, W2):
    """Series connection ``W1 * W2`` (no cancellation)."""
    return RationalTransferFunction(W1.num * W2.num, W1.den * W2.den)


def tf_feedback(W, k):
    """Closed loop ``W / (1 + k W)`` of the negative-feedback gain loop."""
    den = W.den + W.num * float(k)
    if den.is_zero():
        raise ValueError("1 + k*W is identically zero; loop is singular")
    return RationalTransferFunction(W.num, den)


@dataclass(frozen=True)
class PoleReport:
    """Poles of W and their position relative to ``Re(s) = -lam``."""
    poles: np.ndarray
    lam: float
    count_right_of_line: int
    count_on_line: int

    @property
    def count_left_of_line(self):
        return len(self.poles) - self.count_right_of_line - self.count_on_line


def _cancel(poles, zeros, tol=CANCEL_TOL):
    remaining = list(zeros)
    kept = []
    for p in poles:
        if remaining:
            d = np.abs(np.asarray(remaining) - p)
            i = int(np.argmin(d))
            if d[i] <= tol * (1.0 + abs(p)):
                remaining.pop(i)
                continue
        kept.append(p)
    return np.asarray(kept, dtype=complex)


def pole_report(W, lam):
    """Count the poles of W right of and on the line ``Re(s) = -lam``.

    Pole/zero pairs coinciding to within ``CANCEL_TOL`` are cancelled
    first.  Poles on the line are reported, not rejected.
    """
    if not W.is_proper():
        raise ValueError("transfer function must be proper")
    poles = _cancel(W.poles(), W.zeros())
    shifted = poles.real + lam
    tol = LINE_TOL * (1.0 + np.abs(poles))
    on = np.abs(shifted) <= tol
    right = (shifted > tol)
    return PoleReport(poles=poles, lam=float(lam),
                      count_right_of_line=int(right.sum()),
                      count_on_line=int(on.sum()))


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Single-input single-output realization ``x' = Ax + Bu, y = Cx + Du``.

    A system with no states (pure feedthrough) has ``A`` of shape (0, 0).
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float = 0.0
    n: int = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.size == 0:
            A = np.zeros((0, 0))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got shape {A.shape}")
        B = np.asarray(self.B, dtype=float).reshape(n, 1)
        C = np.asarray(self.C, dtype=float).reshape(1, n)
        for name, arr in (('A', A), ('B', B), ('C', C)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, 'D', float(self.D))
        object.__setattr__(self, 'n', n)

    def transfer_function(self):
        return tf_from_ss(self)


def ss_from_tf(W):
    """Controllable canonical realization of a proper transfer function.

    Examples
    --------
    >>> S = ss_from_tf(tf([1], [1, 5, 1]))
    >>> S.A.tolist(), S.C.tolist()
    ([[0.0, 1.0], [-1.0, -5.0]], [[1.0, 0.0]])
    """
    if not W.is_proper():
        raise ValueError("cannot realize an improper transfer function")
    n = W.den.degree
    a = W.den.coefficients
    b = np.pad(W.num.coefficients, (0, n + 1 - W.num.coefficients.size))
    D = b[n]
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)),
                          np.zeros((1, 0)), D)
    c = b[:n] - D * a[:n]
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -a[:n]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    return StateSpace(A, B, c.reshape(1, n), D)


def tf_from_ss(S):
    """Transfer function ``C (sI - A)^-1 B + D`` of a SISO realization.

    Uses ``det(sI - A + BC) = det(sI - A) (1 + C (sI - A)^-1 B)``, so only
    two characteristic polynomials are needed.
    """
    if S.n == 0:
        return RationalTransferFunction([S.D], [1.0])
    den = np.poly(S.A)[::-1].real
    shifted = np.poly(S.A - S.B @ S.C)[::-1].real
    num = shifted - den
    # eigenvalue round-off leaves ~eps residue where the difference is exactly 0
    num[np.abs(num) <= 64 * np.finfo(float).eps *
        max(np.abs(shifted).max(), np.abs(den).max())] = 0.0
    return RationalTransferFunction(num + S.D * den, den)

"""Dominance certificates for linear time-invariant systems.

For ``x' = A x`` the dominance inequality with rate ``lam`` and slack
``eps`` reads ``A^T P + P A + 2 lam P + eps I <= 0`` for a symmetric ``P``
with ``n - p`` positive and ``p`` negative eigenvalues.  Such a ``P`` exists
exactly when ``A`` has ``p`` eigenvalues right of ``Re(s) = -lam`` and none
on it; it is obtained from one Lyapunov equation for ``A + lam I``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._format import fmt
from .exceptions import EigOnLine, InertiaMismatch

__all__ = ['Inertia', 'DominanceCertificate', 'inertia', 'solve_lyapunov',
           'certify_lti', 'dominance_degree_lti', 'residual']

ZERO_TOL = 1e-9
LINE_TOL = 1e-9
MAX_DIM = 64


class Inertia(NamedTuple):
    positive: int
    negative: int
    zero: int


def inertia(M):
    """Signs of the eigenvalues of the symmetric part of `M`.

    Eigenvalues with modulus below ``1e-9 * max |eigenvalue|`` count as zero.
    """
    M = np.asarray(M, dtype=float)
    ev = np.linalg.eigvalsh(0.5 * (M + M.T))
    tol = ZERO_TOL * (np.abs(ev).max() if ev.size else 0.0)
    return Inertia(int((ev > tol).sum()), int((ev < -tol).sum()),
                   int((np.abs(ev) <= tol).sum()))


def solve_lyapunov(F, Q):
    """Solve ``F^T P + P F = -Q`` by vectorization (dense, n <= 64)."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"dense Lyapunov solve limited to n <= {MAX_DIM}")
    eye = np.eye(n)
    # column-major vec: vec(F^T P) = (I kron F^T) vec P, vec(P F) = (F^T kron I) vec P
    L = np.kron(eye, F.T) + np.kron(F.T, eye)
    vecP = np.linalg.solve(L, -np.asarray(Q, dtype=float).reshape(-1, order='F'))
    return vecP.reshape(n, n, order='F')


def residual(A, P, lam, eps):
    """Largest eigenvalue of ``A^T P + P A + 2 lam P + eps I``."""
    A = np.asarray(A, dtype=float)
    M = A.T @ P + P @ A + 2.0 * lam * P + eps * np.eye(A.shape[0])
    return float(np.linalg.eigvalsh(0.5 * (M + M.T)).max())


@dataclass(frozen=True, eq=False)
class DominanceCertificate:
    P: np.ndarray
    lam: float
    epsilon: float
    p: int
    residual: float

    @property
    def inertia(self):
        return inertia(self.P)

    def to_text(self):
        lines = [f"lambda = {fmt(self.lam)}", f"p = {self.p}",
                 f"epsilon = {fmt(self.epsilon)}", "P ="]
        lines += [' '.join(f"{v:.17g}" for v in row) for row in self.P]
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text, A=None):
        """Parse :meth:`to_text` output; the residual is recomputed if `A` is given."""
        head, _, body = text.partition('P =')
        vals = {}
        for line in head.strip().splitlines():
            key, _, val = line.partition('=')
            vals[key.strip()] = val.strip()
        P = np.array([[float(v) for v in row.split()]
                      for row in body.strip().splitlines()])
        lam, eps = float(vals['lambda']), float(vals['epsilon'])
        res = residual(A, P, lam, eps) if A is not None else float('nan')
        return cls(P, lam, eps, int(vals['p']), res)


def _split(A, lam):
    ev = np.linalg.eigvals(np.asarray(A, dtype=float))
    shifted = ev.real + lam
    tol = LINE_TOL * (1.0 + np.abs(ev))
    if np.any(np.abs(shifted) <= tol):
        raise EigOnLine(f"eigenvalue of A on Re(s) = {-lam + 0.0:g}")
    return int((shifted > tol).sum())


def dominance_degree_lti(A, lam):
    """Number of eigenvalues of `A` with real part greater than ``-lam``."""
    return _split(A, lam)


def certify_lti(A, lam, p, iterations=40):
    """Build a strict dominance certificate ``(P, eps)`` for ``x' = A x``.

    ``P`` solves ``(A + lam I)^T P + P (A + lam I) = -I``; ``eps`` is the
    largest value in (0, 1] found by bisection for which the dominance
    inequality still holds.

    Raises
    ------
    EigOnLine
        An eigenvalue has real part ``-lam``; no strict certificate exists.
    InertiaMismatch
        `p` differs from the number of eigenvalues right of the line, or the
        computed ``P`` does not have inertia ``(n - p, p, 0)``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    actual = _split(A, lam)
    if actual != p:
        raise InertiaMismatch(f"A has {actual} eigenvalue(s) right of "
                              f"Re(s) = {-lam + 0.0:g}, requested p = {p}")
    P = solve_lyapunov(A + lam * np.eye(n), np.eye(n))
    P = 0.5 * (P + P.T)
    if inertia(P) != (n - p, p, 0):
        raise InertiaMismatch(f"P has inertia {tuple(inertia(P))}, "
                              f"expected {(n - p, p, 0)}")
    if residual(A, P, lam, 1.0) <= 0:
        eps = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if residual(A, P, lam, mid) <= 0:
                lo = mid
            else:
                hi = mid
        eps = lo
    if eps <= 0:
        raise InertiaMismatch("no positive slack found for the computed P")
    return DominanceCertificate(P, float(lam), eps, int(p),
                                residual(A, P, lam, eps))

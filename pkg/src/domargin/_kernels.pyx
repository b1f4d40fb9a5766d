# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: fixed-step RK4 for Lure systems and polygon winding.

Both functions mirror ``domargin._purepy`` exactly; the public modules pick
whichever backend ``domargin._backend`` selected at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, sin, atan2, sqrt, fabs, copysign

cnp.import_array()

cdef enum:
    TANH = 0
    CUBIC = 1
    SINE = 2
    LINEAR = 3
    SATURATION = 4


cdef inline double _smooth_sat(double y, double limit) nogil:
    cdef double h = 0.005 * limit
    cdef double a = limit - h
    cdef double r = fabs(y)
    cdef double t
    if r <= a:
        return y
    if r >= limit + h:
        return copysign(limit, y)
    t = r - a
    return copysign(a + t - t * t / (4.0 * h), y)


cdef inline double _phi(int family, double gain, double limit, double y) nogil:
    if family == TANH:
        return gain * tanh(y)
    elif family == CUBIC:
        return gain * y * y * y
    elif family == SINE:
        return gain * sin(y)
    elif family == LINEAR:
        return gain * y
    else:
        return gain * _smooth_sat(y, limit)


cdef inline void _rhs(const double[:, ::1] A, const double[::1] B,
                      const double[::1] C, int family, double gain,
                      double limit, double* x, double* out, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double y = 0.0
    cdef double u, acc
    for j in range(n):
        y += C[j] * x[j]
    u = -_phi(family, gain, limit, y)
    for i in range(n):
        acc = B[i] * u
        for j in range(n):
            acc += A[i, j] * x[j]
        out[i] = acc


def rk4_lure(const double[:, ::1] A, const double[::1] B, const double[::1] C,
             int family, double gain, double limit, const double[::1] x0,
             double dt, Py_ssize_t n_steps, double bound):
    """Integrate ``x' = Ax - B phi(Cx)`` with classical RK4.

    Returns ``(states, n_done)``; integration stops after the first step
    whose state norm exceeds `bound`, and ``states`` is truncated there.
    """
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n_steps + 1, n))
    cdef double[:, ::1] X = out
    cdef double[::1] k1 = np.empty(n), k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n), k4 = np.empty(n)
    cdef double[::1] tmp = np.empty(n), x = np.array(x0, dtype=np.float64)
    cdef Py_ssize_t step, i
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0, nrm
    cdef Py_ssize_t done = n_steps
    for i in range(n):
        X[0, i] = x[i]
    with nogil:
        for step in range(1, n_steps + 1):
            _rhs(A, B, C, family, gain, limit, &x[0], &k1[0], n)
            for i in range(n):
                tmp[i] = x[i] + h2 * k1[i]
            _rhs(A, B, C, family, gain, limit, &tmp[0], &k2[0], n)
            for i in range(n):
                tmp[i] = x[i] + h2 * k2[i]
            _rhs(A, B, C, family, gain, limit, &tmp[0], &k3[0], n)
            for i in range(n):
                tmp[i] = x[i] + dt * k3[i]
            _rhs(A, B, C, family, gain, limit, &tmp[0], &k4[0], n)
            nrm = 0.0
            for i in range(n):
                x[i] = x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                X[step, i] = x[i]
                nrm += x[i] * x[i]
            if not sqrt(nrm) <= bound:
                done = step
                break
    return out[:done + 1], done


def polygon_winding(const double[::1] re, const double[::1] im,
                    double ar, double ai):
    """Total signed angle swept around ``ar + j ai`` by a closed polygon.

    The polygon is given by its vertices; the last vertex connects back to
    the first.  Also returns the smallest distance from the point to any
    edge.
    """
    cdef Py_ssize_t m = re.shape[0]
    cdef Py_ssize_t k, nxt
    cdef double total = 0.0, best = 1e308
    cdef double x0, y0, x1, y1, dx, dy, t, px, py, d2, seg2
    with nogil:
        for k in range(m):
            nxt = k + 1 if k + 1 < m else 0
            x0 = re[k] - ar
            y0 = im[k] - ai
            x1 = re[nxt] - ar
            y1 = im[nxt] - ai
            total += atan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1)
            dx = x1 - x0
            dy = y1 - y0
            seg2 = dx * dx + dy * dy
            if seg2 > 0.0:
                t = -(x0 * dx + y0 * dy) / seg2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            px = x0 + t * dx
            py = y0 + t * dy
            d2 = px * px + py * py
            if d2 < best:
                best = d2
    return total, sqrt(best)

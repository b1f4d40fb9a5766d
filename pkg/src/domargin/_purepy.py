"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built or when ``DOMARGIN_PURE_PYTHON`` is
set.  Results agree with the compiled kernels to round-off.
"""

import math

import numpy as np

TANH, CUBIC, SINE, LINEAR, SATURATION = range(5)


def smooth_sat(y, limit):
    h = 0.005 * limit
    a = limit - h
    r = abs(y)
    if r <= a:
        return y
    if r >= limit + h:
        return math.copysign(limit, y)
    t = r - a
    return math.copysign(a + t - t * t / (4.0 * h), y)


def _phi_scalar(family, gain, limit):
    if family == TANH:
        return lambda y: gain * math.tanh(y)
    if family == CUBIC:
        return lambda y: gain * y * y * y
    if family == SINE:
        return lambda y: gain * math.sin(y)
    if family == LINEAR:
        return lambda y: gain * y
    return lambda y: gain * smooth_sat(y, limit)


def rk4_lure(A, B, C, family, gain, limit, x0, dt, n_steps, bound):
    A = [list(map(float, row)) for row in np.asarray(A)]
    B = [float(b) for b in np.asarray(B).ravel()]
    C = [float(c) for c in np.asarray(C).ravel()]
    phi = _phi_scalar(family, gain, limit)
    n = len(B)
    rows = range(n)

    def rhs(x):
        u = -phi(sum(C[j] * x[j] for j in rows))
        return [B[i] * u + sum(A[i][j] * x[j] for j in rows) for i in rows]

    x = [float(v) for v in np.asarray(x0).ravel()]
    out = np.empty((n_steps + 1, n))
    out[0] = x
    h2, h6 = 0.5 * dt, dt / 6.0
    done = n_steps
    for step in range(1, n_steps + 1):
        k1 = rhs(x)
        k2 = rhs([x[i] + h2 * k1[i] for i in rows])
        k3 = rhs([x[i] + h2 * k2[i] for i in rows])
        k4 = rhs([x[i] + dt * k3[i] for i in rows])
        x = [x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
             for i in rows]
        out[step] = x
        if not math.sqrt(sum(v * v for v in x)) <= bound:
            done = step
            break
    return out[:done + 1], done


def polygon_winding(re, im, ar, ai):
    x0 = np.asarray(re) - ar
    y0 = np.asarray(im) - ai
    x1 = np.roll(x0, -1)
    y1 = np.roll(y0, -1)
    total = float(np.sum(np.arctan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1)))
    dx, dy = x1 - x0, y1 - y0
    seg2 = dx * dx + dy * dy
    with np.errstate(invalid='ignore', divide='ignore'):
        t = np.where(seg2 > 0, -(x0 * dx + y0 * dy) / seg2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    d = np.hypot(x0 + t * dx, y0 + t * dy)
    return total, float(d.min())

import sys

import numpy as np
import pytest

from domargin import tf


def random_tf(rng, max_order=4):
    """Strictly proper W with random real/complex poles and zeros.

    Pole real parts are kept a little away from the integers and half
    integers so that rate shifts drawn on those grids do not hit the line.
    """
    n = int(rng.integers(1, max_order + 1))
    m = int(rng.integers(0, n))

    def roots(count):
        out = []
        while len(out) < count:
            if count - len(out) >= 2 and rng.random() < 0.4:
                re, im = rng.uniform(-4, 2), rng.uniform(0.3, 3)
                out += [complex(re, im), complex(re, -im)]
            else:
                out.append(complex(rng.uniform(-4, 2), 0.0))
        return out

    den = np.real(np.atleast_1d(np.poly(roots(n))))[::-1]
    num = np.real(np.atleast_1d(np.poly(roots(m))))[::-1] * rng.uniform(0.5, 3.0)
    return tf(num, den)


def rhp_count(coeffs_ascending, tol=1e-7):
    """Roots with positive real part of a (possibly complex) polynomial."""
    c = np.trim_zeros(np.asarray(coeffs_ascending, dtype=complex), 'b')
    r = np.roots(c[::-1])
    return int(np.sum(r.real > tol)), float(np.min(np.abs(r.real))) if r.size else np.inf


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def msd():
    """Mass-spring-damper 1 / (s^2 + 5 s + 1)."""
    return tf([1.0], [1.0, 5.0, 1.0])


@pytest.fixture
def msd_integral():
    """The same plant with an integrator, 1 / (s (s^2 + 5 s + 1))."""
    return tf([1.0], [0.0, 1.0, 5.0, 1.0])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get('test_acceptance')
    results = getattr(mod, 'RESULTS', None)
    if not results:
        return
    terminalreporter.section('acceptance criteria')
    for n in sorted(results):
        terminalreporter.write_line(results[n])

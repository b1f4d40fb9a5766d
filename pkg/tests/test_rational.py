import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from domargin import (Polynomial, StateSpace, pole_report, poly_roots,
                      poly_shift, ss_from_tf, tf, tf_feedback, tf_from_ss,
                      tf_series, tf_shift)

coef = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
polys = st.lists(coef, min_size=1, max_size=7)
rates = st.floats(0, 5, allow_nan=False)


def sympy_shift(c, lam):
    s = sympy.symbols('s')
    p = sum(sympy.Rational(repr(a)) * s ** i for i, a in enumerate(c))
    q = sympy.Poly(sympy.expand(p.subs(s, s - sympy.Rational(repr(lam)))), s)
    out = [float(v) for v in reversed(q.all_coeffs())]
    return out


class TestPolynomial:
    def test_trailing_zeros_trimmed(self):
        assert Polynomial([1, 2, 0, 0]).degree == 1
        assert Polynomial([0, 0]).is_zero()

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(ValueError):
            Polynomial([])
        with pytest.raises(ValueError):
            Polynomial([1, np.nan])

    def test_arithmetic(self):
        p, q = Polynomial([1, 1]), Polynomial([-1, 1])
        assert p * q == Polynomial([-1, 0, 1])
        assert p + q == Polynomial([0, 2])
        assert p - p == Polynomial([0])
        assert p(2.0) == 3.0

    def test_roots_match_numpy(self, rng):
        for _ in range(20):
            c = rng.normal(size=int(rng.integers(2, 8)))
            ours = np.sort_complex(poly_roots(c))
            ref = np.sort_complex(np.roots(c[::-1]))
            assert np.allclose(ours, ref, atol=1e-8)

    def test_roots_of_zero_polynomial(self):
        with pytest.raises(ValueError):
            poly_roots([0.0])


class TestShift:
    def test_msd_denominator(self):
        # s^2 + 5 s + 1 at s - 2: s^2 + s - 5
        q = poly_shift([1, 5, 1], 2)
        assert np.max(np.abs(q.coefficients - [-5, 1, 1])) < 1e-12

    def test_zero_rate_is_identity(self):
        assert poly_shift([3, 1, 4], 0) == Polynomial([3, 1, 4])

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            poly_shift([1, 1], -1)

    @settings(max_examples=60, deadline=None)
    @given(polys, rates)
    def test_matches_symbolic_expansion(self, c, lam):
        ours = poly_shift(c, lam).coefficients
        ref = Polynomial(sympy_shift(c, lam)).coefficients
        assert ours.size == ref.size
        scale = max(1.0, np.abs(ref).max())
        assert np.allclose(ours, ref, atol=1e-9 * scale, rtol=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(polys, rates, rates)
    def test_shifts_compose(self, c, a, b):
        one = poly_shift(poly_shift(c, a), b)
        both = poly_shift(c, a + b)
        assert one.allclose(both, tol=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(polys, rates)
    def test_roots_move_right_by_rate(self, c, lam):
        p = Polynomial(c)
        if p.degree < 1 or abs(p.leading) < 1e-3:
            return
        before = np.sort_complex(p.roots() + lam)
        after = np.sort_complex(p.shift(lam).roots())
        # multiple roots are ill conditioned; compare symmetric functions
        assert np.allclose(np.poly(before), np.poly(after), atol=1e-6,
                           rtol=1e-6)

    def test_transfer_function_shift(self, msd):
        Wl = tf_shift(msd, 2.0)
        s = 0.3 + 1.7j
        assert np.isclose(Wl(s), msd(s - 2.0), rtol=1e-14)


class TestTransferFunction:
    def test_monic_normalization(self):
        W = tf([2.0], [2.0, 4.0])
        assert W.den == Polynomial([0.5, 1.0])
        assert W.num == Polynomial([0.5])

    def test_zero_denominator(self):
        with pytest.raises(ValueError):
            tf([1.0], [0.0])

    def test_properness(self):
        assert tf([1], [1, 1]).is_strictly_proper()
        assert tf([1, 1], [1, 1]).is_proper()
        assert not tf([1, 1, 1], [1, 1]).is_proper()
        assert tf([2, 3], [1, 1]).value_at_infinity() == 3.0
        assert tf([0], [1, 1]).value_at_infinity() == 0.0

    def test_series_and_feedback(self, msd):
        G = tf_series(msd, tf([1], [0, 1]))
        assert G.den == Polynomial([0, 1, 5, 1])
        T = tf_feedback(msd, 6.0)
        assert T.den == Polynomial([7, 5, 1])

    def test_singular_feedback(self):
        with pytest.raises(ValueError):
            tf_feedback(tf([1, 1], [1, 1]), -1.0)


class TestPoleReport:
    def test_msd_one_pole_right_of_line(self, msd):
        rep = pole_report(msd, 2.0)
        assert rep.count_right_of_line == 1
        assert rep.count_on_line == 0
        Wl = tf_shift(msd, 2.0)
        poles = np.sort(Wl.poles().real)
        r = np.sqrt(21.0) / 2.0
        assert np.allclose(poles, [-0.5 - r, -0.5 + r], atol=1e-9)

    def test_pole_on_line(self):
        rep = pole_report(tf([1], [1, 1]), 1.0)
        assert rep.count_on_line == 1

    def test_cancellation(self):
        W = tf([1, 1], [1, 2, 1])     # (s+1)/(s+1)^2
        rep = pole_report(W, 2.0)
        assert len(rep.poles) == 1
        assert rep.count_right_of_line == 1

    def test_improper_rejected(self):
        with pytest.raises(ValueError):
            pole_report(tf([1, 1, 1], [1]), 0.0)


class TestStateSpace:
    def test_canonical_form(self, msd):
        S = ss_from_tf(msd)
        assert S.A.tolist() == [[0.0, 1.0], [-1.0, -5.0]]
        assert S.B.ravel().tolist() == [0.0, 1.0]
        assert S.C.ravel().tolist() == [1.0, 0.0]
        assert S.D == 0.0

    def test_feedthrough_only(self):
        S = ss_from_tf(tf([3.0], [1.0]))
        assert S.n == 0 and S.D == 3.0
        assert tf_from_ss(S) == tf([3.0], [1.0])

    def test_round_trip(self, rng):
        from conftest import random_tf
        for _ in range(25):
            W = random_tf(rng)
            if rng.random() < 0.3:
                # add a feedthrough term
                W = tf((W.num + 0.5 * W.den).coefficients, W.den.coefficients)
            back = tf_from_ss(ss_from_tf(W))
            assert back.allclose(W, tol=1e-8)

    def test_frequency_response_matches(self, msd):
        S = ss_from_tf(msd * tf([1, 2], [3, 1]))
        s = 0.7j
        direct = (S.C @ np.linalg.solve(s * np.eye(S.n) - S.A, S.B))[0, 0] + S.D
        assert np.isclose(direct, (msd * tf([1, 2], [3, 1]))(s), rtol=1e-12)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            StateSpace(np.zeros((2, 3)), [0, 1], [1, 0])

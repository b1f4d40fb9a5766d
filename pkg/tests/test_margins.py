import math

import numpy as np
import pytest

from conftest import random_tf, rhp_count
from domargin import (Disk, RateOnPole, circle_criterion, disk_margin_check,
                      gain_margins, hinf_lambda_norm, margin_vs_rate_sweep,
                      msd_family, phase_margins, tf, tf_shift)


def closed_loop_degree(W, lam, k):
    """Poles of W / (1 + k W) right of Re(s) = -lam, and their distance to it."""
    Wl = tf_shift(W, lam)
    n = max(Wl.num.coefficients.size, Wl.den.coefficients.size)
    num = np.pad(Wl.num.coefficients, (0, n - Wl.num.coefficients.size))
    den = np.pad(Wl.den.coefficients, (0, n - Wl.den.coefficients.size))
    return rhp_count(den + k * num)


class TestDisk:
    def test_kinds(self):
        assert Disk(1, 2).kind == 'bounded_disk'
        assert Disk(-2, -1).kind == 'bounded_disk'
        assert Disk(-1, 2).kind == 'complement_of_disk'
        assert Disk(-2, 0).kind == 'half_plane'
        assert Disk(0, 4).kind == 'half_plane'

    def test_geometry(self):
        d = Disk(1, 2)
        assert d.center == pytest.approx(-0.75)
        assert d.radius == pytest.approx(0.25)
        assert d.contains(-0.75) and not d.contains(0.0)
        h = Disk(-2, 0)           # Re > 1/2
        assert h.contains(1.0) and not h.contains(0.0)
        h = Disk(0, 4)            # Re < -1/4
        assert h.contains(-1.0) and not h.contains(0.0)
        c = Disk(-1, 2)           # outside the disk through 1 and -1/2
        assert c.contains(5.0) and not c.contains(0.2)

    def test_ordering(self):
        with pytest.raises(ValueError):
            Disk(1, 1)


class TestGainMargins:
    def test_msd(self, msd):
        rep = gain_margins(msd, 2.0)
        assert [str(iv) for iv in rep.intervals] == ['(-inf,5)->p=1',
                                                    '(5,inf)->p=0']
        assert rep.p1 == 1
        assert rep.intervals[0].hi == pytest.approx(5.0, abs=1e-9)

    def test_first_order(self):
        W = tf([1], [1, 1])
        rep = gain_margins(W, 2.0)
        assert [(iv.hi, iv.p2) for iv in rep.intervals][0] == \
            (pytest.approx(1.0, abs=1e-9), 1)
        rep = gain_margins(W, 0.0)
        assert rep.intervals[0].hi == pytest.approx(-1.0, abs=1e-9)
        assert rep.degree_at(0.0) == 0 and rep.degree_at(-5.0) == 1

    def test_degenerate_interval(self):
        # at lam = d/2 the shifted curve lies on the real axis
        W = msd_family()(4.0)
        rep = gain_margins(W, 2.0)
        assert rep.degenerate
        for iv in rep.intervals:
            k = iv.lo + 1 if math.isinf(iv.hi) else (
                iv.hi - 1 if math.isinf(iv.lo) else 0.5 * (iv.lo + iv.hi))
            assert closed_loop_degree(W, 2.0, k)[0] == iv.p2

    def test_text_and_csv(self, msd):
        rep = gain_margins(msd, 2.0)
        assert rep.to_csv().splitlines() == ['k_lo,k_hi,p2', '-inf,5,1',
                                             '5,inf,0']
        assert 'p1 = 1' in rep.to_text()


class TestPhaseMargins:
    def test_msd_k6(self, msd):
        rep = phase_margins(msd, 2.0, 6.0, 0)
        w2 = (-11 + math.sqrt(165)) / 2
        w = math.sqrt(w2)
        bound = math.atan(w / (w2 + 5))
        assert len(rep.intervals) == 1
        lo, hi = rep.intervals[0]
        assert lo == pytest.approx(-bound, abs=1e-9)
        assert hi == pytest.approx(bound, abs=1e-9)

    def test_full_circle(self, msd):
        assert phase_margins(msd, 2.0, 2.0, 1).is_full()

    def test_zero_gain(self, msd):
        with pytest.raises(ValueError):
            phase_margins(msd, 2.0, 0.0, 0)

    def test_against_complex_gain_roots(self, rng):
        """Inside the reported intervals the rotated loop keeps degree p2."""
        checked = 0
        while checked < 25:
            W = random_tf(rng, max_order=3)
            lam = float(rng.uniform(0, 2))
            k = float(rng.choice([-1, 1]) * 10 ** rng.uniform(-1, 1))
            try:
                base = closed_loop_degree(W, lam, k)
                rep = phase_margins(W, lam, k, base[0])
            except RateOnPole:
                continue
            Wl = tf_shift(W, lam)
            n = Wl.den.coefficients.size
            num = np.pad(Wl.num.coefficients, (0, n - Wl.num.coefficients.size))
            for phi in np.linspace(-math.pi, math.pi, 41)[1:]:
                cnt, gap = rhp_count(Wl.den.coefficients
                                     + k * np.exp(1j * phi) * num)
                if gap < 1e-6:
                    continue
                near = any(abs(phi - e) < 1e-6 for e in rep.events)
                if near:
                    continue
                assert rep.contains(phi) == (cnt == base[0]), (W, lam, k, phi)
            checked += 1


class TestDiskMargins:
    def test_msd(self, msd):
        rep = disk_margin_check(msd, 2.0, Disk(-2, 0), 1)
        assert rep.holds
        assert rep.min_distance == pytest.approx(0.5, abs=1e-9)

    def test_integral_loop(self, msd_integral):
        assert disk_margin_check(msd_integral, 2.0, (-5, 0), 2).holds

    @pytest.mark.parametrize('k_i,holds', [(-7.9, True), (-5, True),
                                           (-1, True), (-8, False)])
    def test_actuator(self, msd_integral, k_i, holds):
        W = msd_integral * tf([1], [1, 0.1])
        rep = disk_margin_check(W, 2.0, Disk(k_i, 0), 2)
        assert rep.holds is holds
        if not holds:
            assert rep.min_distance <= 1e-6

    def test_bounded_disk_needs_encirclements(self, msd):
        # D(7, 9) sits around -1/8 inside the loop of the curve, which
        # encircles it counterclockwise
        rep = disk_margin_check(msd, 2.0, Disk(7, 9), 0)
        assert rep.holds and rep.encirclements_cw == -1
        assert not disk_margin_check(msd, 2.0, Disk(7, 9), 1).holds
        # the wider D(6, 10) reaches the curve
        rep = disk_margin_check(msd, 2.0, Disk(6, 10), 0)
        assert not rep.holds and rep.min_distance == 0.0

    def test_csv(self, msd):
        rep = disk_margin_check(msd, 2.0, Disk(-2, 0), 1)
        assert rep.to_csv().splitlines()[1] == '-2,0,half_plane,1,0.5,0,1,1'


class TestCircleCriterion:
    def test_examples(self, msd, msd_integral):
        assert circle_criterion(msd, 2.0, -2, 0).p == 1
        assert circle_criterion(msd, 2.0, -2, 0).satisfied
        res = circle_criterion(msd_integral, 2.0, -5, 0)
        assert res.satisfied and res.p == 2

    def test_stable_loop(self, msd):
        res = circle_criterion(msd, 0.0, 0.5, 2.0)
        assert res.satisfied and res.p == 0

    def test_violated(self, msd):
        # the curve stays in Re <= 0, so every half-plane Re > 1/k holds
        assert circle_criterion(msd, 2.0, -6, 0).satisfied
        # the curve crosses Re(s) = -1/8, so D(0, 8) is intersected
        assert not circle_criterion(msd, 2.0, 0, 8).satisfied

    def test_complement_modes(self, msd):
        lit = circle_criterion(msd, 0.0, -0.5, 0.5, mode='literal')
        cla = circle_criterion(msd, 0.0, -0.5, 0.5, mode='classical')
        # the set is |s| > 2 and the unshifted curve satisfies |W| <= 1:
        # the literal reading wants the curve inside the set, the classical
        # reading wants it inside the disk
        assert not lit.satisfied
        assert cla.satisfied and cla.p == 0
        with pytest.raises(ValueError):
            circle_criterion(msd, 0.0, -0.5, 0.5, mode='other')

    def test_rate_on_pole(self):
        res = circle_criterion(tf([1], [1, 1]), 1.0, -1, 0)
        assert res.p is None and not res.satisfied


class TestNorm:
    @pytest.mark.parametrize('lam,value', [(2.0, 0.2), (0.0, 1.0)])
    def test_msd(self, msd, lam, value):
        assert hinf_lambda_norm(msd, lam) == pytest.approx(value, abs=1e-8)

    def test_resonant_peak(self):
        # 1 / (s^2 + 2 z s + 1): peak 1 / (2 z sqrt(1 - z^2))
        z = 0.1
        W = tf([1], [1, 2 * z, 1])
        ref = 1 / (2 * z * math.sqrt(1 - z * z))
        assert hinf_lambda_norm(W, 0.0) == pytest.approx(ref, rel=1e-9)

    def test_dense_grid_lower_bound(self, rng):
        for _ in range(15):
            W = random_tf(rng)
            lam = float(rng.uniform(0, 3))
            try:
                val = hinf_lambda_norm(W, lam)
            except RateOnPole:
                continue
            w = np.concatenate([[0], np.logspace(-4, 4, 200001)])
            grid = np.abs(tf_shift(W, lam)(1j * w)).max()
            assert val >= grid * (1 - 1e-9)
            assert val <= grid * (1 + 1e-3)

    def test_reciprocal_is_gain_endpoint(self, msd):
        assert 1 / hinf_lambda_norm(msd, 2.0) == pytest.approx(
            gain_margins(msd, 2.0).intervals[0].hi, abs=1e-6)


class TestSweep:
    def test_closed_form(self):
        lams = np.round(np.arange(1, 50) * 0.1, 12)
        ds = [3.0, 5.0]
        res = margin_vs_rate_sweep(msd_family(), lams, ds, threads=2)
        for lam, d, k in res.rows:
            if lam < d and not math.isnan(k):
                assert k == pytest.approx(d * lam - lam * lam - 1, abs=1e-6)
        assert res.optimal[5.0][0] == pytest.approx(2.5, abs=0.1)
        assert res.to_csv().splitlines()[0] == 'lambda,d,k_upper'

    def test_thread_count_does_not_change_rows(self):
        lams, ds = [0.5, 1.0, 2.0], [2.0, 5.0]
        a = margin_vs_rate_sweep(msd_family(), lams, ds, threads=1)
        b = margin_vs_rate_sweep(msd_family(), lams, ds, threads=3)
        assert a.to_csv() == b.to_csv()

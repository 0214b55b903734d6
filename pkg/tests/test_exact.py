import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cleperc import exact
from cleperc.errors import DivergentMomentError, ParameterError
from cleperc.params import ColoredCleParams, K4Params, NonSimpleParams, SimpleParams


class TestWeightFromColoring:
    def test_three_state_point(self):
        assert exact.rho_from_r(10.0 / 3.0, 1.0 / 3.0) == pytest.approx(-1.0, abs=1e-12)

    def test_ising_point(self):
        assert exact.rho_from_r(3.0, 0.5) == pytest.approx(-1.5, abs=1e-12)

    def test_r_to_one_is_degenerate_boundary(self):
        rho = exact.rho_from_r(3.0, 1.0 - 1e-6)
        assert -2.0 < rho < -2.0 + 1e-4

    def test_endpoints_rejected(self):
        with pytest.raises(ParameterError):
            exact.rho_from_r(3.0, 0.0)
        with pytest.raises(ParameterError):
            exact.rho_from_r(3.0, 1.0)

    def test_inverse_values(self):
        assert exact.r_from_rho(3.0, -1.5) == pytest.approx(0.5, abs=1e-12)
        assert exact.r_from_rho(10.0 / 3.0, -1.0) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_roundtrip_grid(self):
        for kappa in np.linspace(2.05, 3.95, 10):
            for r in np.linspace(0.05, 0.95, 10):
                rho = exact.rho_from_r(float(kappa), float(r))
                assert abs(exact.r_from_rho(float(kappa), rho) - r) < 1e-12


class TestChildWeights:
    def test_ising(self):
        rr, rb = exact.bcle_child_weights(3.0, -1.5)
        assert rr == pytest.approx(-2.0 / 3.0, abs=1e-14)
        assert rb == pytest.approx(-2.0 / 3.0, abs=1e-14)

    def test_three_state(self):
        rr, rb = exact.bcle_child_weights(10.0 / 3.0, -1.0)
        assert rr == pytest.approx(-6.0 / 5.0, abs=1e-14)
        assert rb == pytest.approx(-2.0 / 5.0, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(2.01, 3.99), st.floats(0.0, 1.0))
    def test_range_property(self, kappa, frac):
        rho = -2.0 + 1e-9 + frac * (kappa - 4.0 + 2.0 - 2e-9)
        kp = 16.0 / kappa
        for w in exact.bcle_child_weights(kappa, rho):
            assert kp / 2.0 - 4.0 < w < kp / 2.0 - 2.0


class TestOrientedMoments:
    def test_self_dual_point_is_half_half(self):
        for kappa in (2.5, 3.0, 3.7):
            t = exact.cr_moment_simple(SimpleParams(kappa, (kappa - 6.0) / 2.0), 0.0)
            assert t.clockwise == pytest.approx(0.5, abs=1e-12)
            assert t.counterclockwise == pytest.approx(0.5, abs=1e-12)

    def test_lambda_zero_matches_touch_formula(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            kappa = rng.uniform(2.15, 3.95)
            rho = rng.uniform(-1.95, kappa - 4.0 - 0.03)
            p = SimpleParams(kappa, rho)
            m = exact.cr_moment_simple(p, 0.0)
            t = exact.touch_probability_simple(p)
            assert m.clockwise == pytest.approx(t.clockwise, rel=1e-9, abs=1e-12)
            assert m.counterclockwise == pytest.approx(t.counterclockwise, rel=1e-9, abs=1e-12)

    def test_normalization_grid(self):
        for kappa in np.linspace(2.1, 3.9, 20):
            for f in np.linspace(0.05, 0.95, 20):
                rho = -2.0 + f * (kappa - 2.0)
                t = exact.cr_moment_simple(SimpleParams(float(kappa), float(rho)), 0.0)
                assert abs(t.total - 1.0) < 1e-12

    def test_nonsimple_self_dual(self):
        t = exact.cr_moment_nonsimple(NonSimpleParams(6.0, 0.0), 0.0)
        assert t.clockwise == pytest.approx(0.5, abs=1e-12)

    def test_nonsimple_duality_all_lambda(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            kp = rng.uniform(4.05, 7.95)
            rp = rng.uniform(kp / 2.0 - 3.95, kp / 2.0 - 2.05)
            lam = rng.uniform(kp / 8.0 - 0.95, 2.0)
            a = exact.cr_moment_nonsimple(NonSimpleParams(kp, rp), lam)
            b = exact.cr_moment_nonsimple(NonSimpleParams(kp, kp - 6.0 - rp), lam)
            assert a.clockwise == pytest.approx(b.counterclockwise, rel=1e-12)

    def test_divergence_threshold(self):
        p = SimpleParams(3.0, -1.5)
        thr = 3.0 / 8.0 - 1.0
        assert np.isfinite(exact.cr_moment_simple(p, thr + 1e-6).total)
        with pytest.raises(DivergentMomentError):
            exact.cr_moment_simple(p, thr)
        q = NonSimpleParams(6.0, 0.0)
        with pytest.raises(DivergentMomentError):
            exact.cr_moment_nonsimple(q, 6.0 / 8.0 - 1.0)


class TestK4:
    def test_touch_values(self):
        t = exact.cr_moment_k4(K4Params(-1.0), 0.0)
        assert t.as_tuple() == pytest.approx((0.5, 0.5), abs=1e-12)
        t = exact.cr_moment_k4(K4Params(-0.5), 0.0)
        assert t.as_tuple() == pytest.approx((0.25, 0.75), abs=1e-12)

    def test_positive_lambda_is_sinh_form(self):
        v = exact.cr_moment_k4(K4Params(-1.0), 1.0)
        s2 = math.sqrt(2.0)
        assert v.clockwise == pytest.approx(math.sinh(s2 * math.pi / 2) / math.sinh(s2 * math.pi), rel=1e-12)

    def test_two_sided_limits(self):
        eps = 1e-4
        for rho in (-1.5, -0.8, -0.3):
            for lam in (0.0, 0.5, -0.2):
                k4 = exact.cr_moment_k4(K4Params(rho), lam)
                lo = exact.cr_moment_simple(SimpleParams(4.0 - eps, rho), lam)
                hi = exact.cr_moment_nonsimple(NonSimpleParams(4.0 + eps, rho), lam)
                for v in (lo, hi):
                    assert v.clockwise == pytest.approx(k4.clockwise, abs=1e-3)
                    assert v.counterclockwise == pytest.approx(k4.counterclockwise, abs=1e-3)

    def test_divergence(self):
        with pytest.raises(DivergentMomentError):
            exact.cr_moment_k4(K4Params(-1.0), -0.5)


class TestEnsembleRadiusMoment:
    def test_zeroth_moment(self):
        assert exact.cle_cr_moment(6.0, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_threshold_blowup(self):
        kp = 6.0
        lam_min = 3.0 * kp / 32.0 + 2.0 / kp - 1.0
        assert exact.cle_cr_moment(kp, lam_min + 1e-8) > 1e3
        with pytest.raises(DivergentMomentError):
            exact.cle_cr_moment(kp, lam_min)

    def test_monotone_decreasing(self):
        kp = 24.0 / 5.0
        lam_min = 3.0 * kp / 32.0 + 2.0 / kp - 1.0
        lams = np.linspace(lam_min + 1e-6, 0.0, 100)
        vals = [exact.cle_cr_moment(kp, float(l)) for l in lams]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestOneArm:
    def test_exact_special_values(self):
        cases = [(24.0 / 5.0, 1.0 / 3.0, 4.0 / 135.0),
                 (16.0 / 3.0, 0.5, 5.0 / 96.0),
                 (24.0 / 5.0, 2.0 / 3.0, 7.0 / 80.0)]
        for kp, r, target in cases:
            a = exact.one_arm_exponent(ColoredCleParams(kp, r))
            assert a == pytest.approx(target, abs=1e-10)

    def test_solver_runtime_under_one_ms(self):
        ccp = ColoredCleParams(16.0 / 3.0, 0.5)
        exact.one_arm_exponent(ccp)  # warm caches
        t0 = time.perf_counter()
        n = 50
        for _ in range(n):
            exact.one_arm_exponent(ccp)
        per_call = (time.perf_counter() - t0) / n
        assert per_call < 1e-3, f"solver took {per_call * 1e3:.3f} ms"

    def test_gap_positive_at_zero_and_root(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            ccp = ColoredCleParams(float(rng.uniform(4.1, 7.9)), float(rng.uniform(0.05, 0.95)))
            assert exact.one_arm_gap(ccp, 0.0) > 0.0
            alpha = exact.one_arm_exponent(ccp)
            assert abs(exact.one_arm_gap(ccp, -alpha)) < 1e-9

    def test_gap_monotone(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            ccp = ColoredCleParams(float(rng.uniform(4.1, 7.9)), float(rng.uniform(0.05, 0.95)))
            lams = np.linspace(ccp.lambda_min * 0.999, 0.0, 100)
            g = [exact.one_arm_gap(ccp, float(l)) for l in lams]
            assert all(a < b for a, b in zip(g, g[1:]))

    def test_factored_form_agreement(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            ccp = ColoredCleParams(float(rng.uniform(4.1, 7.9)), float(rng.uniform(0.05, 0.95)))
            for f in (0.1, 0.5, 0.9):
                lam = ccp.lambda_min * f
                assert exact.one_arm_gap(ccp, lam) == pytest.approx(
                    exact.one_arm_gap_factored(ccp, lam), abs=1e-10)

    def test_child_moment_below_one_at_zero(self):
        for kp, r in ((4.5, 0.3), (6.0, 0.5), (7.5, 0.8)):
            assert exact.child_cr_moment(ColoredCleParams(kp, r), 0.0) < 1.0

    def test_root_is_child_moment_fixed_point(self):
        ccp = ColoredCleParams(5.5, 0.4)
        alpha = exact.one_arm_exponent(ccp)
        assert exact.child_cr_moment(ccp, -alpha) == pytest.approx(1.0, abs=1e-9)

    def test_monotone_in_r(self):
        kp = 6.0
        rs = np.linspace(0.02, 0.98, 40)
        alphas = [exact.one_arm_exponent(ColoredCleParams(kp, float(r))) for r in rs]
        assert all(a < b for a, b in zip(alphas, alphas[1:]))
        assert alphas[0] < 0.005
        assert abs(alphas[-1]) < exact.fk_one_arm_limit(kp)


class TestLimits:
    def test_fk_limit_values(self):
        assert exact.fk_one_arm_limit(16.0 / 3.0) == pytest.approx(0.125, abs=1e-15)
        assert exact.fk_one_arm_limit(6.0) == pytest.approx(5.0 / 48.0, abs=1e-15)

    def test_continuity_at_r_one(self):
        for kp in (4.4, 16.0 / 3.0, 6.0, 7.2):
            a = exact.one_arm_exponent(ColoredCleParams(kp, 1.0 - 1e-8))
            assert a == pytest.approx(exact.fk_one_arm_limit(kp), abs=1e-4)


class TestLoopMoment:
    def test_total_mass(self):
        for kp, r in ((4.8, 1.0 / 3.0), (6.0, 0.5), (7.0, 0.7)):
            assert exact.loop_moment_fixed_point(ColoredCleParams(kp, r), 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_blow_up_at_pole(self):
        ccp = ColoredCleParams(6.0, 0.5)
        alpha = exact.one_arm_exponent(ccp)
        vals = [exact.loop_moment_fixed_point(ccp, -alpha + eps) for eps in (1e-2, 1e-4, 1e-6)]
        assert vals[0] < vals[1] < vals[2]
        assert vals[2] > 1e4

    def test_pole_matches_exponent(self):
        ccp = ColoredCleParams(5.2, 0.35)
        alpha = exact.one_arm_exponent(ccp)
        with pytest.raises(DivergentMomentError):
            exact.loop_moment_fixed_point(ccp, -alpha - 1e-9)
        assert np.isfinite(exact.loop_moment_fixed_point(ccp, -alpha + 1e-7))

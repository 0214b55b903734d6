import cmath
import math

import numpy as np
import pytest
from scipy.special import loggamma

from cleperc import barnes, coefficients
from cleperc.errors import ParameterError, UnsupportedParameterError
from cleperc.params import LcftContext


BS = (0.75, math.sqrt(3.0) / 2.0, 0.92)


class TestDoubleGamma:
    def test_midpoint_is_one(self):
        for b in BS:
            Q = b + 1.0 / b
            assert barnes.double_gamma(Q / 2.0, b) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("b", BS)
    def test_b_shift(self, b):
        for z in (0.3, 0.9 + 0.4j, 2.5 - 0.3j, 0.05):
            lhs = barnes.log_double_gamma(z + b, b)
            rhs = (0.5 * math.log(2 * math.pi) + (b * z - 0.5) * math.log(b)
                   - loggamma(b * z) + barnes.log_double_gamma(z, b))
            assert abs(cmath.exp(lhs - rhs) - 1.0) < 1e-10

    @pytest.mark.parametrize("b", BS)
    def test_inverse_b_shift(self, b):
        for z in (0.4, 1.3 + 0.2j):
            lhs = barnes.log_double_gamma(z + 1.0 / b, b)
            rhs = (0.5 * math.log(2 * math.pi) + (z / b - 0.5) * math.log(1.0 / b)
                   - loggamma(z / b) + barnes.log_double_gamma(z, b))
            assert abs(cmath.exp(lhs - rhs) - 1.0) < 1e-10

    def test_pole_detection(self):
        with pytest.raises(barnes.PoleError):
            barnes.log_double_gamma(0.0, 0.8)
        with pytest.raises(barnes.PoleError):
            barnes.log_double_gamma(-0.8, 0.8)  # z = -b


class TestDoubleSine:
    def test_midpoint(self):
        for b in BS:
            Q = b + 1.0 / b
            assert barnes.double_sine(Q / 2.0, b) == pytest.approx(1.0, abs=1e-12)

    def test_unitarity_random(self):
        rng = np.random.default_rng(44)
        for b in BS:
            Q = b + 1.0 / b
            for _ in range(34):
                z = complex(rng.uniform(0.1, Q - 0.1), rng.uniform(-1.0, 1.0))
                assert abs(barnes.double_sine(z, b) * barnes.double_sine(Q - z, b) - 1.0) < 1e-9

    def test_shift(self):
        b = 0.85
        for z in (0.37, 1.1 + 0.3j):
            lhs = barnes.double_sine(z + b, b)
            rhs = 2.0 * cmath.sin(math.pi * b * z) * barnes.double_sine(z, b)
            assert abs(lhs - rhs) < 1e-9 * max(abs(rhs), 1.0)

    def test_integral_form_matches_ratio(self):
        for b in BS:
            Q = b + 1.0 / b
            for z in (0.3, 0.9, Q - 0.4, 1.0 + 0.25j):
                d = barnes.log_double_sine(z, b) - barnes.log_double_sine_integral(z, b)
                assert abs(cmath.exp(d) - 1.0) < 1e-9


class TestReflection:
    def test_identity_on_grid(self):
        for gamma in (1.3, math.sqrt(3.0), 1.9):
            ctx = LcftContext(gamma)
            Q = ctx.Q
            for beta in (0.7 * Q, Q - 0.2, 1.25 * Q):
                for mus in ((1.0, 1.0), (0.4, 2.5)):
                    r1 = coefficients.reflection_coefficient(
                        ctx, coefficients.BoundaryInsertion(beta, *mus), normalized=False)
                    r2 = coefficients.reflection_coefficient(
                        ctx, coefficients.BoundaryInsertion(2 * Q - beta, *mus), normalized=False)
                    assert r1 * r2 == pytest.approx(1.0, abs=1e-8)

    def test_single_mu_power_law(self):
        ctx = LcftContext(1.6)
        beta = ctx.Q - 0.37
        base = coefficients.reflection_coefficient(ctx, coefficients.BoundaryInsertion(beta, 1.0, 0.0))
        for mu in (0.3, 2.0, 7.5):
            v = coefficients.reflection_coefficient(ctx, coefficients.BoundaryInsertion(beta, mu, 0.0))
            assert v == pytest.approx(mu ** (2.0 / ctx.gamma * (ctx.Q - beta)) * base, rel=1e-10)

    def test_mu_exchange_symmetry(self):
        ctx = LcftContext(1.5)
        beta = 0.9 * ctx.Q
        a = coefficients.reflection_coefficient(ctx, coefficients.BoundaryInsertion(beta, 2.0, 0.7))
        b = coefficients.reflection_coefficient(ctx, coefficients.BoundaryInsertion(beta, 0.7, 2.0))
        assert a == pytest.approx(b, rel=1e-12)

    def test_sigma_parameterization(self):
        ctx = LcftContext(1.4)
        ins = coefficients.BoundaryInsertion(1.0, 0.8, 2.2)
        for j, mu in ((1, 0.8), (2, 2.2)):
            sigma = ins.sigma(ctx, j)
            back = cmath.exp(1j * math.pi * ctx.gamma * (sigma - ctx.Q / 2.0))
            assert back == pytest.approx(mu, abs=1e-12)


class TestHCoefficient:
    def test_ratio_identities_at_reference_points(self):
        for kappa, rho in ((3.0, -1.5), (10.0 / 3.0, -1.0), (3.2, -1.1)):
            res = coefficients.ratio_identity_residuals(kappa, rho)
            assert set(res) == {"disk-pair", "triangle-pair", "orientation-simple",
                                "h-ratio", "orientation-nonsimple"}
            for name, val in res.items():
                assert val < 1e-8, (name, val)

    def test_self_dual_orientation_ratio_is_one(self):
        kappa = 3.4
        rho = (kappa - 6.0) / 2.0
        rhs = math.sin(2 * math.pi * (kappa - 4 - rho) / kappa) / math.sin(
            2 * math.pi * (rho + 2) / kappa)
        assert rhs == pytest.approx(1.0, abs=1e-12)

    def test_third_insertion_is_structurally_distinct(self):
        # the first two insertions enter symmetrically; the third does not
        ctx = LcftContext(1.5)
        a = coefficients.h_coefficient(ctx, 0.9, 1.4, 1.1)
        b = coefficients.h_coefficient(ctx, 1.4, 0.9, 1.1)
        assert a == pytest.approx(b, rel=1e-10)
        c = coefficients.h_coefficient(ctx, 0.9, 1.1, 1.4)
        assert abs(c - a) > 1e-6 * abs(a)

    def test_finite_on_admissible_grid(self):
        rng = np.random.default_rng(3)
        ctx = LcftContext(1.6)
        count = 0
        while count < 25:
            wt = coefficients.WeightTriple(*rng.uniform(0.3, 3.0, 3))
            if not wt.satisfies_length_constraints(ctx):
                continue
            count += 1
            v = coefficients.qt_length_density(ctx, wt, 1.0)
            assert np.isfinite(v)


class TestLengthDensities:
    def test_disk_power_law_slope(self):
        ctx = LcftContext(1.5)
        for W in (0.6, 1.0, ctx.gamma ** 2 / 2.0 - 1e-6, ctx.gamma ** 2 / 2.0 + 1e-6):
            d2 = coefficients.qd_length_density(ctx, W, 1.0, 0.5, 2.0)
            d1 = coefficients.qd_length_density(ctx, W, 1.0, 0.5, 1.0)
            slope = math.log(d2 / d1) / math.log(2.0)
            assert slope == pytest.approx(-2.0 * W / ctx.gamma ** 2, abs=1e-10)

    def test_disk_exponent_at_half_gamma_sq(self):
        ctx = LcftContext(1.7)
        assert coefficients.qd_length_exponent(ctx, ctx.gamma ** 2 / 2.0) == pytest.approx(-1.0)

    def test_disk_scaling(self):
        ctx = LcftContext(1.4)
        W, lam = 0.8, 3.7
        lhs = coefficients.qd_length_density(ctx, W, 2.0, 1.0, lam * 1.3)
        rhs = lam ** (-2.0 * W / ctx.gamma ** 2) * coefficients.qd_length_density(ctx, W, 2.0, 1.0, 1.3)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_triangle_scaling_and_constraint(self):
        ctx = LcftContext(1.6)
        wt = coefficients.WeightTriple(1.0, 0.8, 2.0)
        assert wt.satisfies_length_constraints(ctx)
        expo = coefficients.qt_length_exponent(ctx, wt)
        v2 = coefficients.qt_length_density(ctx, wt, 2.0)
        v1 = coefficients.qt_length_density(ctx, wt, 1.0)
        assert math.log(v2 / v1) / math.log(2.0) == pytest.approx(expo, abs=1e-10)
        bad = coefficients.WeightTriple(1.0, 0.8, 0.5)  # W3 thin -> unsupported
        with pytest.raises(UnsupportedParameterError):
            coefficients.qt_length_density(ctx, bad, 1.0)

    def test_forested_self_similar_triple(self):
        ctx = LcftContext(1.7)
        g2 = ctx.gamma ** 2
        for W in (0.5, 1.1, g2 - 0.4):
            wt = coefficients.WeightTriple(W, g2 - 2.0, g2 - W)
            assert coefficients.qt_forested_length_exponent(ctx, wt) == pytest.approx(0.0, abs=1e-12)


class TestReflectionDerivative:
    def test_symmetric_point_has_no_integral_term(self):
        ctx = LcftContext(1.5)
        beta = 0.8 * ctx.Q
        v = coefficients.refl_log_derivative(ctx, beta, 1.7, 1.7)
        assert v == pytest.approx((ctx.Q - beta) / (ctx.gamma * 1.7), rel=1e-12)

    def test_matches_finite_difference(self):
        ctx = LcftContext(1.6)
        beta = ctx.Q - 0.5
        mu1, mu2 = 1.2, 0.6
        h = 1e-5
        def logR(m1):
            return math.log(abs(coefficients.reflection_coefficient(
                ctx, coefficients.BoundaryInsertion(beta, m1, mu2), normalized=False)))
        fd = (logR(mu1 + h) - logR(mu1 - h)) / (2 * h)
        assert coefficients.refl_log_derivative(ctx, beta, mu1, mu2) == pytest.approx(fd, abs=1e-6)

    def test_integral_antisymmetric_under_mu_swap(self):
        ctx = LcftContext(1.5)
        beta = 0.75 * ctx.Q
        mu1, mu2 = 2.0, 0.5
        lead12 = (ctx.Q - beta) / (ctx.gamma * mu1)
        lead21 = (ctx.Q - beta) / (ctx.gamma * mu2)
        i12 = (coefficients.refl_log_derivative(ctx, beta, mu1, mu2) - lead12) * mu1
        i21 = (coefficients.refl_log_derivative(ctx, beta, mu2, mu1) - lead21) * mu2
        assert i12 == pytest.approx(-i21, rel=1e-9)


class TestAnnulusMoments:
    def test_small_y_limit(self):
        ctx = LcftContext(1.6)
        W = 0.9
        y = -1e-7
        v = coefficients.qa_moment(ctx, W, 1.0, y)
        ratio = v * 1.0 ** (y + 1.0) / math.gamma(y + 1.0) / (1 - 2 * W / ctx.gamma ** 2) ** -2.0
        assert ratio == pytest.approx((ctx.gamma ** 2 - 2 * W) / ctx.gamma ** 2, rel=1e-5)

    def test_thin_weight_blowup_rate(self):
        # the (1-2W/gamma^2)^{-2} prefactor blows up one power faster than
        # the vanishing sine factor, so the moment itself diverges ~ eps^{-1}
        ctx = LcftContext(1.7)
        g2 = ctx.gamma ** 2
        y, t = -0.4, 1.0
        eps = 1e-4
        v1 = coefficients.qa_moment(ctx, g2 / 2.0 - eps, t, y)
        v2 = coefficients.qa_moment(ctx, g2 / 2.0 - eps / 2.0, t, y)
        assert v2 / v1 == pytest.approx(2.0, rel=5e-3)
        pre = lambda e: (1.0 - 2.0 * (g2 / 2.0 - e) / g2) ** -2.0
        assert pre(eps / 2.0) / pre(eps) == pytest.approx(4.0, rel=1e-9)

    def test_requires_forested_coupling(self):
        with pytest.raises(ParameterError):
            coefficients.qa_moment(LcftContext(1.2), 0.5, 1.0, -0.5)

    def test_quadrature_oracle(self):
        ctx = LcftContext(1.6)
        closed = coefficients.qa_moment(ctx, 0.9, 1.0, -0.45)
        quad = coefficients.qa_moment_quadrature(ctx, 0.9, 1.0, -0.45)
        assert quad == pytest.approx(closed, rel=1e-6)

    def test_forested_chain_consistency(self):
        ctx = LcftContext(1.75)
        g2 = ctx.gamma ** 2
        for W, t, y in ((0.7, 1.1, -0.3), (1.2, 0.6, -0.5), (0.4, 2.0, -0.7)):
            y = y * g2 / 4.0
            lhs = coefficients.gqa_moment(ctx, W, t, y)
            rhs = (math.gamma(-4.0 * y / g2) / math.gamma(-y) * t ** (g2 / 4.0 - 1.0)
                   * coefficients.qa_moment(ctx, W, t ** (g2 / 4.0), 4.0 * y / g2))
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_gqa_small_y_finite_and_positive_grid(self):
        ctx = LcftContext(1.8)
        g2 = ctx.gamma ** 2
        assert np.isfinite(coefficients.gqa_moment(ctx, 0.8, 1.0, -1e-8))
        rng = np.random.default_rng(2)
        for _ in range(30):
            W = rng.uniform(0.05, g2 / 2.0 - 0.05)
            t = rng.uniform(0.2, 3.0)
            y = rng.uniform(-g2 / 4.0 + 0.02, -0.02)
            assert coefficients.gqa_moment(ctx, float(W), float(t), float(y)) > 0.0


class TestLevyMoment:
    def test_limit_at_zero(self):
        ctx = LcftContext(1.7)
        assert coefficients.levy_moment(ctx, 0.0) == 1.0
        assert coefficients.levy_moment(ctx, 1e-9) == pytest.approx(1.0, abs=1e-6)

    def test_infinite_at_quarter_gamma_sq(self):
        ctx = LcftContext(1.7)
        assert math.isinf(coefficients.levy_moment(ctx, ctx.gamma ** 2 / 4.0))
        assert math.isinf(coefficients.levy_moment(ctx, 1.0))

    def test_finite_positive_below(self):
        ctx = LcftContext(1.7)
        v = coefficients.levy_moment(ctx, ctx.gamma ** 2 / 8.0)
        assert np.isfinite(v) and v > 0.0


class TestRatioSweep:
    def test_random_sweep(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            kappa = float(rng.uniform(2.1, 3.9))
            rho = float(rng.uniform(-1.95, kappa - 4.05))
            for name, val in coefficients.ratio_identity_residuals(kappa, rho).items():
                assert val < 1e-8, (name, kappa, rho, val)

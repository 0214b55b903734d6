"""Identity suites: every closed form is re-derived through an independent
route (shift equations, unitarity, dual regimes, quadrature) and the maximal
residual is compared against a fixed tolerance.

Each suite returns a SuiteResult; run_suites drives any subset.  The same
functions back the command-line `verify` command and the acceptance tests.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from . import barnes, coefficients, exact
from .params import ColoredCleParams, K4Params, LcftContext, NonSimpleParams, SimpleParams


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    n_checks: int
    worst_case: str = ""
    failures: list = field(default_factory=list)


def _result(name, tol, residuals):
    """residuals: list of (value, label)."""
    worst = max(residuals, key=lambda t: t[0])
    fails = [lab for v, lab in residuals if not v < tol]
    return SuiteResult(name, not fails, worst[0], tol, len(residuals), worst[1], fails)


def suite_double_gamma_shift(tol: float = 1e-9) -> SuiteResult:
    res = []
    for b in (0.75, math.sqrt(3) / 2.0, 0.95, 0.62):
        for z in (0.31, 0.9 + 0.4j, 1.7, 2.5 - 0.3j, 0.07, 3.2 + 1.1j):
            lhs = barnes.log_double_gamma(z + b, b)
            rhs = 0.5 * math.log(2 * math.pi) + (b * z - 0.5) * math.log(b) \
                - loggamma(b * z) + barnes.log_double_gamma(z, b)
            res.append((abs(cmath.exp(lhs - rhs) - 1.0), f"b-shift b={b} z={z}"))
            lhs = barnes.log_double_gamma(z + 1.0 / b, b)
            rhs = 0.5 * math.log(2 * math.pi) + (z / b - 0.5) * math.log(1.0 / b) \
                - loggamma(z / b) + barnes.log_double_gamma(z, b)
            res.append((abs(cmath.exp(lhs - rhs) - 1.0), f"1/b-shift b={b} z={z}"))
        Q = b + 1.0 / b
        res.append((abs(barnes.double_gamma(Q / 2.0, b) - 1.0), f"midpoint b={b}"))
    return _result("double-gamma-shift", tol, res)


def suite_double_sine(tol: float = 1e-9) -> SuiteResult:
    res = []
    for b in (0.75, math.sqrt(3) / 2.0, 0.9):
        Q = b + 1.0 / b
        res.append((abs(barnes.double_sine(Q / 2.0, b) - 1.0), f"midpoint b={b}"))
        rng = np.random.default_rng(101)
        for _ in range(34):
            z = complex(rng.uniform(0.15, Q - 0.15), rng.uniform(-0.8, 0.8))
            uni = barnes.double_sine(z, b) * barnes.double_sine(Q - z, b)
            res.append((abs(uni - 1.0), f"unitarity b={b} z={z:.3f}"))
            shift = barnes.double_sine(z + b, b) / barnes.double_sine(z, b) \
                - 2.0 * cmath.sin(math.pi * b * z)
            res.append((abs(shift), f"b-shift b={b} z={z:.3f}"))
        for zr in (0.4, 1.0, Q - 0.4):
            ratio = barnes.log_double_sine(zr, b)
            integral = barnes.log_double_sine_integral(zr, b)
            res.append((abs(cmath.exp(ratio - integral) - 1.0), f"integral-vs-ratio b={b} z={zr}"))
    return _result("double-sine", tol, res)


def suite_reflection_identity(tol: float = 1e-8) -> SuiteResult:
    res = []
    for gamma in (1.2, 1.5, math.sqrt(3), 1.85):
        ctx = LcftContext(gamma)
        Q = ctx.Q
        for beta in (0.8 * Q, Q - 0.31, 1.2 * Q):
            for (m1, m2) in ((1.0, 1.0), (2.0, 0.5), (1.0, 3.0), (0.3, 0.7)):
                r1 = coefficients.reflection_coefficient(
                    ctx, coefficients.BoundaryInsertion(beta, m1, m2), normalized=False)
                r2 = coefficients.reflection_coefficient(
                    ctx, coefficients.BoundaryInsertion(2.0 * Q - beta, m1, m2), normalized=False)
                res.append((abs(r1 * r2 - 1.0), f"g={gamma:.3f} beta={beta:.3f} mu=({m1},{m2})"))
                sym = coefficients.reflection_coefficient(
                    ctx, coefficients.BoundaryInsertion(beta, m2, m1))
                base = coefficients.reflection_coefficient(
                    ctx, coefficients.BoundaryInsertion(beta, m1, m2))
                res.append((abs(sym / base - 1.0), f"mu-symmetry g={gamma:.3f} beta={beta:.3f}"))
    return _result("reflection-identity", tol, res)


def suite_ratio_identities(tol: float = 1e-8, n_points: int = 200, seed: int = 7) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = []
    pts = [(3.0, -1.5), (10.0 / 3.0, -1.0), (3.0, -1.2)]
    while len(pts) < n_points:
        kappa = rng.uniform(2.1, 3.9)
        rho = rng.uniform(-2.0 + 0.05, kappa - 4.0 - 0.05)
        pts.append((float(kappa), float(rho)))
    for kappa, rho in pts:
        try:
            for name, val in coefficients.ratio_identity_residuals(kappa, rho).items():
                res.append((val, f"{name} k={kappa:.4f} rho={rho:.4f}"))
        except coefficients.PoleError:  # pragma: no cover - off-grid poles
            continue
    return _result("ratio-identities", tol, res)


def suite_exact_normalization(tol: float = 1e-12) -> SuiteResult:
    res = []
    for kappa in np.linspace(2.1, 3.9, 20):
        for frac in np.linspace(0.04, 0.96, 20):
            rho = -2.0 + frac * (kappa - 2.0)
            t = exact.touch_probability_simple(SimpleParams(float(kappa), float(rho)))
            res.append((abs(t.total - 1.0), f"simple k={kappa:.3f} rho={rho:.3f}"))
    for kp in np.linspace(4.1, 7.9, 20):
        for frac in np.linspace(0.04, 0.96, 20):
            rp = kp / 2.0 - 4.0 + frac * 2.0
            t = exact.touch_probability_nonsimple(NonSimpleParams(float(kp), float(rp)))
            res.append((abs(t.total - 1.0), f"nonsimple k'={kp:.3f} rho'={rp:.3f}"))
    return _result("exact-normalization", tol, res)


def suite_exact_duality(tol: float = 1e-12) -> SuiteResult:
    res = []
    rng = np.random.default_rng(11)
    for _ in range(120):
        kappa = float(rng.uniform(2.1, 3.9))
        rho = float(rng.uniform(-1.95, kappa - 4.05))
        lam = float(rng.uniform(kappa / 8.0 - 1.0 + 0.05, 1.5))
        a = exact.cr_moment_simple(SimpleParams(kappa, rho), lam)
        b = exact.cr_moment_simple(SimpleParams(kappa, kappa - 6.0 - rho), lam)
        scale = max(abs(a.clockwise), 1e-30)
        res.append((abs(a.clockwise - b.counterclockwise) / scale,
                    f"simple k={kappa:.3f} rho={rho:.3f} lam={lam:.3f}"))
        kp = float(rng.uniform(4.1, 7.9))
        rp = float(rng.uniform(kp / 2.0 - 3.95, kp / 2.0 - 2.05))
        lamp = float(rng.uniform(kp / 8.0 - 1.0 + 0.05, 1.5))
        c = exact.cr_moment_nonsimple(NonSimpleParams(kp, rp), lamp)
        d = exact.cr_moment_nonsimple(NonSimpleParams(kp, kp - 6.0 - rp), lamp)
        scale = max(abs(c.clockwise), 1e-30)
        res.append((abs(c.clockwise - d.counterclockwise) / scale,
                    f"nonsimple k'={kp:.3f} rho'={rp:.3f} lam={lamp:.3f}"))
    return _result("exact-duality", tol, res)


def suite_k4_limits(tol: float = 1e-3, eps: float = 1e-4) -> SuiteResult:
    res = []
    for rho in (-1.5, -1.0, -0.5, -0.25):
        for lam in (0.0, 0.3, 1.0, -0.3):
            k4 = exact.cr_moment_k4(K4Params(rho), lam)
            lo = exact.cr_moment_simple(SimpleParams(4.0 - eps, rho), lam)
            hi = exact.cr_moment_nonsimple(NonSimpleParams(4.0 + eps, rho), lam)
            for tag, v in (("k->4-", lo), ("k->4+", hi)):
                res.append((abs(v.clockwise - k4.clockwise), f"{tag} cw rho={rho} lam={lam}"))
                res.append((abs(v.counterclockwise - k4.counterclockwise),
                            f"{tag} ccw rho={rho} lam={lam}"))
    return _result("k4-limits", tol, res)


def suite_root_coherence(tol: float = 1e-9, n_points: int = 100, seed: int = 23) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = []
    for _ in range(n_points):
        kp = float(rng.uniform(4.05, 7.95))
        r = float(rng.uniform(0.02, 0.98))
        ccp = ColoredCleParams(kp, r)
        alpha = exact.one_arm_exponent(ccp)
        res.append((abs(exact.one_arm_equation_residual(ccp, alpha)),
                    f"equation k'={kp:.4f} r={r:.4f}"))
        res.append((abs(exact.one_arm_gap(ccp, -alpha)), f"gap-root k'={kp:.4f} r={r:.4f}"))
        lo, hi = ccp.lambda_min, 0.0
        for frac in (0.15, 0.5, 0.85):
            lam = lo + frac * (hi - lo)
            d = abs(exact.one_arm_gap(ccp, lam) - exact.one_arm_gap_factored(ccp, lam))
            res.append((d, f"factored k'={kp:.4f} r={r:.4f} lam={lam:.4f}"))
    # limit r -> 1 reproduces the plain-cluster exponent
    for kp in (4.4, 16.0 / 3.0, 6.0, 7.5):
        a = exact.one_arm_exponent(ColoredCleParams(kp, 1.0 - 1e-8))
        res.append((abs(a - exact.fk_one_arm_limit(kp)) / 1e-4 * tol,
                    f"r->1 limit k'={kp}"))  # scaled so tol acts as 1e-4
    return _result("root-coherence", tol, res)


def suite_qa_quadrature(tol: float = 1e-6) -> SuiteResult:
    res = []
    for gamma, W, t, y in (
        (1.6, 0.9, 1.0, -0.45),
        (math.sqrt(3), 1.1, 0.7, -0.3),
        (1.5, 0.5, 1.3, -0.6),
    ):
        ctx = LcftContext(gamma)
        closed = coefficients.qa_moment(ctx, W, t, y)
        quad = coefficients.qa_moment_quadrature(ctx, W, t, y)
        res.append((abs(quad - closed) / abs(closed), f"g={gamma:.3f} W={W} t={t} y={y}"))
    return _result("qa-quadrature", tol, res)


ALL_SUITES = {
    "double-gamma-shift": suite_double_gamma_shift,
    "double-sine": suite_double_sine,
    "reflection-identity": suite_reflection_identity,
    "ratio-identities": suite_ratio_identities,
    "exact-normalization": suite_exact_normalization,
    "exact-duality": suite_exact_duality,
    "k4-limits": suite_k4_limits,
    "root-coherence": suite_root_coherence,
    "qa-quadrature": suite_qa_quadrature,
}


def run_suites(only=None) -> list[SuiteResult]:
    names = list(ALL_SUITES) if not only else [n for n in ALL_SUITES if n in set(only)]
    return [ALL_SUITES[n]() for n in names]

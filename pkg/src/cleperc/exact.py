"""Closed-form exponents, touching probabilities, and conformal-radius moments.

All functions here are pure double-precision evaluations of the closed
forms; the root solver for the one-arm exponent is a plain bisection on a
sign-definite gap function.  The clockwise ("true" loop) component always
comes first in an OrientedValue.
"""
from __future__ import annotations

import math

from .errors import DivergentMomentError, ParameterError
from .params import (
    ColoredCleParams,
    K4Params,
    NonSimpleParams,
    OrientedValue,
    SimpleParams,
)

_TWO_PI = 2.0 * math.pi

# Bisection controls for the one-arm root (interval width stop + iteration cap).
_BISECT_MAX_ITER = 200
_BISECT_WIDTH = 1e-14


def _sine_ratio(a: float, theta_sq: float) -> float:
    """sin(a*t)/sin(t) with t = sqrt(theta_sq), continued to sinh(a*t)/sinh(t)
    for negative theta_sq and to the limit value a when |theta_sq| ~ 0."""
    if abs(theta_sq) < 1e-16:
        return a
    t = math.sqrt(abs(theta_sq))
    if theta_sq > 0.0:
        return math.sin(a * t) / math.sin(t)
    return math.sinh(a * t) / math.sinh(t)


def _theta_squared(kappa: float, lam: float) -> float:
    return (math.pi / 4.0) ** 2 * ((4.0 - kappa) ** 2 - 8.0 * kappa * lam)


def _cr_pair(kappa: float, rho: float, lam: float) -> tuple[float, float]:
    """Shared kernel of the simple/non-simple conformal-radius moment pair."""
    pref = math.sin(math.pi * (4.0 - kappa) / 4.0) / (
        math.sin(math.pi * (4.0 - kappa) / kappa)
        * math.sin(math.pi * (kappa - 2.0 * rho - 4.0) / 4.0)
    )
    ts = _theta_squared(kappa, lam)
    cw = (
        pref
        * math.sin(_TWO_PI * (kappa - rho - 4.0) / kappa)
        * _sine_ratio((kappa - 2.0 * rho - 4.0) / kappa, ts)
    )
    ccw = (
        pref
        * math.sin(_TWO_PI * (rho + 2.0) / kappa)
        * _sine_ratio((2.0 * rho + 8.0 - kappa) / kappa, ts)
    )
    return cw, ccw


def r_from_rho(kappa: float, rho: float) -> float:
    """Red probability r corresponding to a simple-regime weight rho.

    1 - r = sin(pi rho/2) / (sin(pi rho/2) - sin(pi (kappa-rho)/2)).
    """
    SimpleParams(kappa, rho)
    s1 = math.sin(math.pi * rho / 2.0)
    s2 = math.sin(math.pi * (kappa - rho) / 2.0)
    return 1.0 - s1 / (s1 - s2)


def rho_from_r(kappa: float, r: float) -> float:
    """Weight rho solving the coloring relation for red probability r.

    rho = (2/pi) arctan( sin(pi kappa/2) / (1 + cos(pi kappa/2) - 1/(1-r)) ) - 2.

    The principal arctan branch can land outside (-2, kappa-4); in that case
    the angle is shifted by pi (rho += 2).  The result is always validated by
    a round trip through r_from_rho, with a monotone bisection fallback.
    """
    if not 2.0 < kappa < 4.0:
        raise ParameterError(f"kappa={kappa} outside (2, 4)")
    if not 0.0 < r < 1.0:
        raise ParameterError(f"r={r} must lie strictly inside (0, 1); the "
                             "endpoints correspond to degenerate boundary loops")
    num = math.sin(math.pi * kappa / 2.0)
    den = 1.0 + math.cos(math.pi * kappa / 2.0) - 1.0 / (1.0 - r)
    if den == 0.0:
        ang = math.copysign(math.pi / 2.0, num)
    else:
        ang = math.atan(num / den)
    rho = (2.0 / math.pi) * ang - 2.0
    lo, hi = -2.0, kappa - 4.0

    def _ok(x: float) -> bool:
        return lo < x < hi and abs(r_from_rho(kappa, x) - r) < 1e-12

    if _ok(rho):
        return rho
    if _ok(rho + 2.0):
        return rho + 2.0
    # fall back to bisection: r_from_rho is decreasing in rho on (-2, kappa-4)
    a, b = lo + 1e-15, hi - 1e-15
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (a + b)
        if r_from_rho(kappa, mid) > r:
            a = mid
        else:
            b = mid
        if b - a < _BISECT_WIDTH:
            break
    return 0.5 * (a + b)


def bcle_child_weights(kappa: float, rho: float) -> tuple[float, float]:
    """Child weights (rho_R', rho_B') of the nested exploration:

    rho_R' = -kappa'/2 - (kappa'/4) rho,   rho_B' = kappa' - 4 + (kappa'/4) rho,

    with kappa' = 16/kappa.  Both lie in (kappa'/2-4, kappa'/2-2).
    """
    SimpleParams(kappa, rho)
    kp = 16.0 / kappa
    return (-kp / 2.0 - kp / 4.0 * rho, kp - 4.0 + kp / 4.0 * rho)


def touch_probability_simple(p: SimpleParams) -> OrientedValue:
    """Probability that the loop surrounding the origin is clockwise (true)
    resp. counterclockwise (false), simple regime."""
    k, rho = p.kappa, p.rho
    den = math.sin(math.pi * (4.0 - k) / k) * math.sin(
        math.pi / 4.0 * (k - 2.0 * rho - 4.0)
    )
    cw = (
        math.sin(_TWO_PI / k * (k - rho - 4.0))
        * math.sin(math.pi * (4.0 - k) / (4.0 * k) * (k - 2.0 * rho - 4.0))
        / den
    )
    ccw = (
        math.sin(_TWO_PI / k * (rho + 2.0))
        * math.sin(math.pi * (4.0 - k) / (4.0 * k) * (2.0 * rho + 8.0 - k))
        / den
    )
    return OrientedValue(cw, ccw)


def touch_probability_nonsimple(p: NonSimpleParams) -> OrientedValue:
    """Same event pair in the non-simple regime (kappa', rho')."""
    k, rho = p.kappa_prime, p.rho_prime
    den = math.sin(math.pi * (k - 4.0) / k) * math.sin(
        math.pi / 4.0 * (k - 2.0 * rho - 4.0)
    )
    cw = (
        math.sin(_TWO_PI / k * (k - rho - 4.0))
        * math.sin(math.pi * (k - 4.0) / (4.0 * k) * (k - 2.0 * rho - 4.0))
        / den
    )
    ccw = (
        math.sin(_TWO_PI / k * (rho + 2.0))
        * math.sin(math.pi * (k - 4.0) / (4.0 * k) * (2.0 * rho + 8.0 - k))
        / den
    )
    return OrientedValue(cw, ccw)


def touch_probability_k4(p: K4Params) -> OrientedValue:
    """kappa = 4: the pair is (-rho/2, (rho+2)/2)."""
    return OrientedValue(-p.rho / 2.0, (p.rho + 2.0) / 2.0)


def cr_moment_simple(p: SimpleParams, lam: float) -> OrientedValue:
    """Oriented conformal-radius moments E[CR^lam ; orientation], simple regime.

    Finite iff lam > kappa/8 - 1; the sine-ratio factor continues through
    its hyperbolic form when (4-kappa)^2 - 8 kappa lam < 0.
    """
    if lam <= p.moment_threshold:
        raise DivergentMomentError(
            f"lambda={lam} <= kappa/8-1={p.moment_threshold}: moments are infinite"
        )
    cw, ccw = _cr_pair(p.kappa, p.rho, lam)
    return OrientedValue(cw, ccw)


def cr_moment_nonsimple(p: NonSimpleParams, lam: float) -> OrientedValue:
    """Oriented conformal-radius moments in the non-simple regime."""
    if lam <= p.moment_threshold:
        raise DivergentMomentError(
            f"lambda={lam} <= kappa'/8-1={p.moment_threshold}: moments are infinite"
        )
    cw, ccw = _cr_pair(p.kappa_prime, p.rho_prime, lam)
    return OrientedValue(cw, ccw)


def cr_moment_k4(p: K4Params, lam: float) -> OrientedValue:
    """kappa = 4 moments: sinh(sqrt(2 lam) a pi)/sinh(sqrt(2 lam) pi) with
    a = -rho/2 (clockwise) resp. (rho+2)/2 (counterclockwise); the sin form
    is used for lam in (-1/2, 0) and the limit values at lam = 0."""
    if lam <= -0.5:
        raise DivergentMomentError(f"lambda={lam} <= -1/2: moments are infinite")
    ts = -2.0 * lam * math.pi ** 2  # positive for lam < 0 -> sin form
    cw = _sine_ratio(-p.rho / 2.0, ts)
    ccw = _sine_ratio((p.rho + 2.0) / 2.0, ts)
    return OrientedValue(cw, ccw)


def cle_cr_moment(kappa_prime: float, lam: float) -> float:
    """E[CR^lam] for the loop surrounding the origin of the non-nested
    ensemble at kappa' in (4,8), in the dual-coupling form

        cos(pi (4-kappa)/4) / cos(theta(lam)),   kappa = 16/kappa'.

    Finite iff lam > 3 kappa'/32 + 2/kappa' - 1 (cos(theta) vanishes exactly
    at the threshold, where (4-kappa)^2 - 8 kappa lam = 4).
    """
    if not 4.0 < kappa_prime < 8.0:
        raise ParameterError(f"kappa_prime={kappa_prime} outside (4, 8)")
    lam_min = 3.0 * kappa_prime / 32.0 + 2.0 / kappa_prime - 1.0
    if lam <= lam_min:
        raise DivergentMomentError(
            f"lambda={lam} <= threshold {lam_min}: moment diverges"
        )
    kappa = 16.0 / kappa_prime
    ts = _theta_squared(kappa, lam)
    x0 = math.pi * (4.0 - kappa) / 4.0
    if ts >= 0.0:
        return math.cos(x0) / math.cos(math.sqrt(ts))
    return math.cos(x0) / math.cosh(math.sqrt(-ts))


def child_cr_moment(ccp: ColoredCleParams, lam: float) -> float:
    """Moment of the conformal radius of the first child domain of the
    two-stage exploration, restricted to non-termination:

        B(lam) = ccw_simple * ( C(lam) * cw_nonsimple + ccw_nonsimple )

    evaluated at (kappa, rho(r)) and the blue child weight rho_B'.
    """
    kappa = ccp.kappa
    rho = rho_from_r(kappa, ccp.r)
    _, rho_b = bcle_child_weights(kappa, rho)
    if lam <= ccp.lambda_min:
        raise DivergentMomentError(
            f"lambda={lam} <= threshold {ccp.lambda_min}: recursion moment diverges"
        )
    _, ccw_s = _cr_pair(kappa, rho, lam)
    cw_n, ccw_n = _cr_pair(ccp.kappa_prime, rho_b, lam)
    return ccw_s * (cle_cr_moment(ccp.kappa_prime, lam) * cw_n + ccw_n)


def one_arm_gap(ccp: ColoredCleParams, lam: float) -> float:
    """1 - B(lam): positive at lam = 0, strictly increasing in lam, and
    diverging to -inf at the left endpoint of the moment window."""
    if not ccp.lambda_min < lam <= 0.0:
        raise ParameterError(
            f"lambda={lam} outside ({ccp.lambda_min}, 0]"
        )
    return 1.0 - child_cr_moment(ccp, lam)


def one_arm_gap_factored(ccp: ColoredCleParams, lam: float) -> float:
    """Equivalent trig-factored form of one_arm_gap (independent code path,
    used for cross-validation):

        sin(x-y-z) [ sin(pi(k-2r-4)/4) sin(x+y+2z) - sin(pi(4-k-2r)/4) sin(y+2z-x) ]
        ---------------------------------------------------------------------------
                      2 sin x cos x sin z sin(pi(k-2r-4)/4)

    with x = theta(lam), y = (2 rho/kappa) x, z = (4/kappa) x.
    """
    if not ccp.lambda_min < lam <= 0.0:
        raise ParameterError(f"lambda={lam} outside ({ccp.lambda_min}, 0]")
    kappa = ccp.kappa
    rho = rho_from_r(kappa, ccp.r)
    x = math.sqrt(_theta_squared(kappa, lam))
    y = 2.0 * rho / kappa * x
    z = 4.0 / kappa * x
    s4 = math.sin(math.pi / 4.0 * (kappa - 2.0 * rho - 4.0))
    num = math.sin(x - y - z) * (
        s4 * math.sin(x + y + 2.0 * z)
        - math.sin(math.pi / 4.0 * (4.0 - kappa - 2.0 * rho)) * math.sin(y + 2.0 * z - x)
    )
    den = 2.0 * math.sin(x) * math.cos(x) * math.sin(z) * s4
    return num / den


def one_arm_exponent(ccp: ColoredCleParams) -> float:
    """The blue bulk one-arm exponent alpha_1(r): the unique positive root of
    the gap equation, located by bisection on (lambda_min, 0)."""
    lo = ccp.lambda_min + 1e-13
    hi = 0.0
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if one_arm_gap(ccp, mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < _BISECT_WIDTH:
            break
    return -0.5 * (lo + hi)


def one_arm_equation_residual(ccp: ColoredCleParams, alpha: float) -> float:
    """Cross-multiplied residual of the one-arm equation at candidate alpha:

        sin(pi(k+2r+8)X/(4k)) sin(pi(k-2r)/4) - sin(pi(k-2r-8)X/(4k)) sin(pi(k+2r)/4)

    with X = sqrt((4-k)^2 + 8 k alpha).  Vanishes at alpha = alpha_1(r).
    """
    kappa = ccp.kappa
    rho = rho_from_r(kappa, ccp.r)
    X = math.sqrt((4.0 - kappa) ** 2 + 8.0 * kappa * alpha)
    return math.sin(math.pi * (kappa + 2.0 * rho + 8.0) / (4.0 * kappa) * X) * math.sin(
        math.pi * (kappa - 2.0 * rho) / 4.0
    ) - math.sin(math.pi * (kappa - 2.0 * rho - 8.0) / (4.0 * kappa) * X) * math.sin(
        math.pi * (kappa + 2.0 * rho) / 4.0
    )


def fk_one_arm_limit(kappa_prime: float) -> float:
    """r -> 1 limit of the one-arm exponent: 1 - 2/kappa' - 3 kappa'/32."""
    if not 4.0 < kappa_prime < 8.0:
        raise ParameterError(f"kappa_prime={kappa_prime} outside (4, 8)")
    return 1.0 - 2.0 / kappa_prime - 3.0 * kappa_prime / 32.0


def loop_moment_fixed_point(ccp: ColoredCleParams, lam: float) -> float:
    """M(lam) = A(lam) / (1 - B(lam)): the moment of the conformal radius of
    the outermost same-color interface around the origin.  M(0) = 1; the
    first pole sits at lam = -alpha_1(r)."""
    alpha = one_arm_exponent(ccp)
    if lam <= -alpha:
        raise DivergentMomentError(
            f"lambda={lam} <= -alpha_1={-alpha}: fixed-point moment diverges"
        )
    kappa = ccp.kappa
    rho = rho_from_r(kappa, ccp.r)
    cw_s, _ = _cr_pair(kappa, rho, lam)
    return cw_s / (1.0 - child_cr_moment(ccp, lam))


def expected_closure_time(kappa: float, rho: float) -> float:
    """E[-log CR] of the loop surrounding the origin, from the derivative of
    the total moment at lambda = 0 (central finite difference)."""
    eps = 1e-6
    if abs(kappa - 4.0) < 1e-9:
        p4 = K4Params(rho)
        tot = lambda l: cr_moment_k4(p4, l).total
    else:
        tot = lambda l: sum(_cr_pair(kappa, rho, l))
    return -(tot(eps) - tot(-eps)) / (2.0 * eps)

"""Boundary structure constants and length-law scalars built on Gamma_b/S_b.

Everything is assembled in complex log space and exponentiated at the end,
which makes branch offsets of the complex logarithm harmless.  Outputs that
are real by symmetry (conjugate double-sine pairs) are checked for a small
imaginary part before the real part is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma, loggamma
from scipy import integrate

from .barnes import log_double_gamma, log_double_sine
from .errors import NumericError, ParameterError, PoleError, UnsupportedParameterError
from .params import LcftContext

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BoundaryInsertion:
    """Boundary insertion (beta, mu1, mu2) with mu_i >= 0, mu1 + mu2 > 0.

    The associated spectral parameters sigma_j = Q/2 - i log(mu_j)/(pi gamma)
    satisfy mu_j = exp(i pi gamma (sigma_j - Q/2)).
    """

    beta: float
    mu1: float
    mu2: float

    def __post_init__(self):
        if self.mu1 < 0.0 or self.mu2 < 0.0 or self.mu1 + self.mu2 <= 0.0:
            raise ParameterError("need mu1, mu2 >= 0 with mu1 + mu2 > 0")

    def sigma(self, ctx: LcftContext, j: int) -> complex:
        mu = (self.mu1, self.mu2)[j - 1]
        if mu <= 0.0:
            raise ParameterError(f"sigma_{j} undefined for mu_{j}=0")
        return ctx.Q / 2.0 - 1j * math.log(mu) / (math.pi * ctx.gamma)


@dataclass(frozen=True)
class WeightTriple:
    """Positive weights (W1, W2, W3) with beta_i = gamma + (2 - W_i)/gamma."""

    W1: float
    W2: float
    W3: float

    def __post_init__(self):
        if min(self.W1, self.W2, self.W3) <= 0.0:
            raise ParameterError("weights must be positive")

    def betas(self, ctx: LcftContext) -> tuple[float, float, float]:
        g = ctx.gamma
        return tuple(g + (2.0 - W) / g for W in (self.W1, self.W2, self.W3))

    def beta_bar(self, ctx: LcftContext) -> float:
        return sum(self.betas(ctx))

    def tilde_betas(self, ctx: LcftContext) -> tuple[float, float, float]:
        g = ctx.gamma
        out = []
        for W, b in zip((self.W1, self.W2, self.W3), self.betas(ctx)):
            out.append(b if W > g * g / 2.0 else 2.0 * ctx.Q - b)
        return tuple(out)

    def satisfies_length_constraints(self, ctx: LcftContext) -> bool:
        """Constraint set for the three-arc length law: tilde-beta_1,2 < Q,
        |tb1 - tb2| < tb3, tb1 + tb2 + tb3 > gamma, and W3 thick."""
        tb1, tb2, tb3 = self.tilde_betas(ctx)
        return (
            tb1 < ctx.Q
            and tb2 < ctx.Q
            and abs(tb1 - tb2) < tb3
            and tb1 + tb2 + tb3 > ctx.gamma
            and self.W3 > ctx.gamma ** 2 / 2.0
        )


def _realize(value: complex, what: str, tol: float = 1e-9) -> float:
    if abs(value.imag) > tol * max(abs(value.real), 1e-300):
        raise NumericError(f"{what}: imaginary residue {value.imag:g} too large")
    return value.real


def log_reflection_normalized(ctx: LcftContext, ins: BoundaryInsertion) -> complex:
    """Complex log of the normalized reflection coefficient R_bar(beta, mu1, mu2).

    For mu1, mu2 > 0 the double-sine factors sit at the conjugate pair
    beta/2 +- i (log mu1 - log mu2)/(pi gamma); for a single vanishing mu the
    power-law form mu^{(2/gamma)(Q - beta)} times the beta-only factor is used.
    """
    g, Q, b = ctx.gamma, ctx.Q, ctx.b
    beta = ins.beta
    pref = (
        (2.0 / g * (Q - beta) - 0.5) * _LOG_2PI
        + (g / 2.0 * (Q - beta) - 0.5) * math.log(2.0 / g)
        - np.log(complex(Q - beta))
        - (2.0 / g) * (Q - beta) * loggamma(1.0 - g * g / 4.0).real
    )
    core = log_double_gamma(beta - g / 2.0, b) - log_double_gamma(Q - beta, b)
    if ins.mu1 > 0.0 and ins.mu2 > 0.0:
        core += (Q - beta) * (math.log(ins.mu1) + math.log(ins.mu2)) / g
        delta = (math.log(ins.mu1) - math.log(ins.mu2)) / (math.pi * g)
        core -= log_double_sine(beta / 2.0 + 1j * delta, b)
        core -= log_double_sine(beta / 2.0 - 1j * delta, b)
    else:
        mu = ins.mu1 if ins.mu1 > 0.0 else ins.mu2
        core += (2.0 / g) * (Q - beta) * math.log(mu)
    return pref + core


def reflection_coefficient(ctx: LcftContext, ins: BoundaryInsertion,
                           normalized: bool = True) -> float:
    """Boundary reflection coefficient.

    normalized=True returns R_bar; otherwise the unnormalized
    R = -Gamma(1 - (2/gamma)(Q - beta)) R_bar, which satisfies
    R(beta) R(2Q - beta) = 1.
    """
    val = np.exp(log_reflection_normalized(ctx, ins))
    out = _realize(val, "reflection coefficient")
    if normalized:
        return out
    arg = 1.0 - (2.0 / ctx.gamma) * (ctx.Q - ins.beta)
    if abs(arg - round(arg)) < 1e-12 and arg <= 0.5:
        raise PoleError(f"gamma-function pole in unnormalized prefactor at {arg}")
    return -_gamma(arg) * out


def log_h_coefficient(ctx: LcftContext, beta1: float, beta2: float, beta3: float) -> complex:
    """Complex log of the three-insertion boundary coefficient H_bar."""
    g, Q, b = ctx.gamma, ctx.Q, ctx.b
    bbar = beta1 + beta2 + beta3
    pref = (
        ((2.0 * Q - bbar) / g + 1.0) * _LOG_2PI
        + ((g / 2.0 - 2.0 / g) * (Q - bbar / 2.0) - 1.0) * math.log(2.0 / g)
        - (2.0 * Q - bbar) / g * loggamma(1.0 - g * g / 4.0).real
        - loggamma(complex((bbar - 2.0 * Q) / g))
    )
    core = (
        log_double_gamma(bbar / 2.0 - Q, b)
        + log_double_gamma(bbar / 2.0 - beta2, b)
        + log_double_gamma(bbar / 2.0 - beta1, b)
        + log_double_gamma(Q - bbar / 2.0 + beta3, b)
        - log_double_gamma(Q, b)
        - log_double_gamma(Q - beta1, b)
        - log_double_gamma(Q - beta2, b)
        - log_double_gamma(beta3, b)
    )
    return pref + core


def h_coefficient(ctx: LcftContext, beta1: float, beta2: float, beta3: float) -> float:
    return _realize(np.exp(log_h_coefficient(ctx, beta1, beta2, beta3)),
                    "H coefficient", tol=1e-8)


def disk_length_amplitude(ctx: LcftContext, W: float) -> float:
    """|two-arc disk measure at unit total length| = R_bar(gamma + (2-W)/gamma, 1, 0)."""
    beta = ctx.gamma + (2.0 - W) / ctx.gamma
    return reflection_coefficient(ctx, BoundaryInsertion(beta, 1.0, 0.0))


def triangle_length_amplitude(ctx: LcftContext, W1: float, W2: float, W3: float) -> float:
    """Coefficient of the three-arc length law at unit length:

        2 / (gamma (Q-b1)(Q-b2)(Q-b3)) * H_bar(b1, b2, b3).
    """
    g, Q = ctx.gamma, ctx.Q
    bs = [g + (2.0 - W) / g for W in (W1, W2, W3)]
    pref = complex(2.0 / (g * (Q - bs[0]) * (Q - bs[1]) * (Q - bs[2])))
    val = np.exp(log_h_coefficient(ctx, *bs) + np.log(pref))
    return _realize(val, "triangle amplitude", tol=1e-8)


def qd_length_density(ctx: LcftContext, W: float, mu1: float, mu2: float,
                      ell: float) -> float:
    """Density of the weighted boundary length mu1 L1 + mu2 L2 of the
    two-arc disk measure: R_bar(beta, mu1, mu2) ell^{-2W/gamma^2}."""
    if not 0.0 < W < ctx.gamma * ctx.Q:
        raise ParameterError(f"W={W} outside (0, gamma*Q)")
    if ell <= 0.0:
        raise ParameterError("ell must be positive")
    beta = ctx.gamma + (2.0 - W) / ctx.gamma
    amp = reflection_coefficient(ctx, BoundaryInsertion(beta, mu1, mu2))
    return amp * ell ** (-2.0 * W / ctx.gamma ** 2)


def qd_length_exponent(ctx: LcftContext, W: float) -> float:
    return -2.0 * W / ctx.gamma ** 2


def qt_length_density(ctx: LcftContext, wt: WeightTriple, ell: float) -> float:
    """Density of the arc length between the first two vertices of the
    three-vertex measure: amplitude * ell^{(beta_bar - 2Q)/gamma - 1}."""
    if ell <= 0.0:
        raise ParameterError("ell must be positive")
    if not wt.satisfies_length_constraints(ctx):
        raise UnsupportedParameterError(
            "weight triple violates the three-arc length-law constraints"
        )
    amp = triangle_length_amplitude(ctx, wt.W1, wt.W2, wt.W3)
    expo = (wt.beta_bar(ctx) - 2.0 * ctx.Q) / ctx.gamma - 1.0
    return amp * ell ** expo


def qt_length_exponent(ctx: LcftContext, wt: WeightTriple) -> float:
    return (wt.beta_bar(ctx) - 2.0 * ctx.Q) / ctx.gamma - 1.0


def qt_forested_length_exponent(ctx: LcftContext, wt: WeightTriple) -> float:
    """Length exponent of the boundary-forested three-vertex measure:
    (gamma/4)(beta_bar - 2Q) - 1.  For the triple (W, gamma^2-2, gamma^2-W)
    the excess beta_bar - 2Q equals 4/gamma and the density is
    length-independent."""
    return ctx.gamma / 4.0 * (wt.beta_bar(ctx) - 2.0 * ctx.Q) - 1.0


def refl_log_derivative(ctx: LcftContext, beta: float, mu1: float, mu2: float) -> float:
    """d/d mu1 of log R(beta; mu1, mu2):

        (Q-beta)/(gamma mu1)
          + 1/(pi gamma mu1) int_0^inf sinh((Q-beta)t/2) sin((log mu1 - log mu2) t /(pi gamma))
                                       / (sinh(gamma t/4) sinh(t/gamma)) dt.

    The integral converges for beta > 0 (integrand decays like e^{-beta t/2}).
    """
    g, Q = ctx.gamma, ctx.Q
    if not g / 2.0 < beta < Q:
        raise ParameterError(f"beta={beta} outside (gamma/2, Q)")
    if mu1 <= 0.0 or mu2 <= 0.0:
        raise ParameterError("mu1, mu2 must be positive")
    lead = (Q - beta) / (g * mu1)
    r = (math.log(mu1) - math.log(mu2)) / (math.pi * g)
    if r == 0.0:
        return lead

    def integrand(t):
        return (math.sinh((Q - beta) * t / 2.0) * math.sin(r * t)
                / (math.sinh(g * t / 4.0) * math.sinh(t / g)))

    # integrand ~ e^{-beta t/2} at large t; truncate before sinh overflows
    T = min(120.0 / beta, 650.0 / max((Q - beta) / 2.0, g / 4.0, 1.0 / g))
    val, err = integrate.quad(integrand, 0.0, T, epsabs=1e-12, epsrel=1e-11,
                              limit=400)
    if err > 1e-8:
        raise NumericError(f"quadrature error {err:g} too large")
    return lead + val / (math.pi * g * mu1)


def qa_moment(ctx: LcftContext, W: float, t: float, y: float) -> float:
    """Mixed annulus-length moment  E[L1 e^{-t L1} L2^y]  of the pinched
    thin annulus of weight W:

        t^{-y-1} Gamma(y+1) (1 - 2W/gamma^2)^{-2}
            sin((gamma^2-2W)/4 pi y) / sin(gamma^2/4 pi y),

    for gamma in (sqrt 2, 2), W in (0, gamma^2/2), t > 0, y in (-1, 0).
    """
    ctx.require_forested()
    g2 = ctx.gamma ** 2
    if not 0.0 < W < g2 / 2.0:
        raise ParameterError(f"W={W} outside (0, gamma^2/2)")
    if t <= 0.0:
        raise ParameterError("t must be positive")
    if not -1.0 < y < 0.0:
        raise UnsupportedParameterError(f"y={y} outside (-1, 0)")
    return (
        t ** (-y - 1.0)
        * _gamma(y + 1.0)
        * (1.0 - 2.0 * W / g2) ** (-2.0)
        * math.sin((g2 - 2.0 * W) / 4.0 * math.pi * y)
        / math.sin(g2 / 4.0 * math.pi * y)
    )


def qa_moment_quadrature(ctx: LcftContext, W: float, t: float, y: float) -> float:
    """Independent evaluation of qa_moment through the Laplace route:

        (1 - 2W/gamma^2)^{-2} / Gamma(-y) *
            int_0^inf mu^{-y-1} d/dt log R(2Q - beta; t, mu) dmu,

    with beta = gamma + (2-W)/gamma, integrated in u = log(mu) coordinates
    (the integrand decays exponentially both ways in u).
    """
    ctx.require_forested()
    g, Q = ctx.gamma, ctx.Q
    beta = g + (2.0 - W) / g           # in (Q, Q + gamma/2) for thin W
    barg = 2.0 * Q - beta              # argument of the reflection derivative

    def f(u):
        mu = math.exp(u)
        return math.exp(-y * u) * refl_log_derivative(ctx, barg, t, mu)

    # The bracket D(u) tends to the constant 2(beta-Q)/(gamma t) as u -> -inf
    # and decays like e^{-(u - log t)} as u -> +inf.  Integrate a finite core
    # window exactly and attach analytic tails for both asymptotic models;
    # a wider numeric window would amplify inner-quadrature noise by e^{-y u}.
    half = 20.0
    lo = math.log(t) - half
    hi = math.log(t) + half
    nodes, weights = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(lo, hi, int(math.ceil(hi - lo)) + 1)
    val = 0.0
    for a, b2 in zip(edges[:-1], edges[1:]):
        um = 0.5 * (a + b2)
        uh = 0.5 * (b2 - a)
        val += uh * sum(w * f(um + uh * x) for x, w in zip(nodes, weights))
    d_left = 2.0 * (beta - ctx.Q) / (g * t)
    val += d_left * math.exp(-y * lo) / (-y)                      # constant model
    d_right = refl_log_derivative(ctx, barg, t, math.exp(hi))
    val += d_right * math.exp(-y * hi) / (1.0 + y)                # e^{-u} model
    return (1.0 - 2.0 * W / g ** 2) ** (-2.0) * val / _gamma(-y)


def gqa_moment(ctx: LcftContext, W: float, t: float, y: float) -> float:
    """Forested-annulus analog, valid for y in (-gamma^2/4, 0):

        t^{-y-1} Gamma(y+1) (1 - 2W/gamma^2)^{-2}
            sin((gamma^2-2W)/gamma^2 pi y) / sin(4 pi y/gamma^2).
    """
    ctx.require_forested()
    g2 = ctx.gamma ** 2
    if not 0.0 < W < g2 / 2.0:
        raise ParameterError(f"W={W} outside (0, gamma^2/2)")
    if t <= 0.0:
        raise ParameterError("t must be positive")
    if not -g2 / 4.0 < y < 0.0:
        raise UnsupportedParameterError(f"y={y} outside (-gamma^2/4, 0)")
    return (
        t ** (-y - 1.0)
        * _gamma(y + 1.0)
        * (1.0 - 2.0 * W / g2) ** (-2.0)
        * math.sin((g2 - 2.0 * W) / g2 * math.pi * y)
        / math.sin(4.0 * math.pi * y / g2)
    )


def levy_moment(ctx: LcftContext, p: float) -> float:
    """E[Y_1^p] for the normalized stable subordinator of index gamma^2/4:

        (4/gamma^2) Gamma(-4p/gamma^2) / Gamma(-p)   for p < gamma^2/4,
        +inf otherwise (p -> 0 gives 1).
    """
    g2 = ctx.gamma ** 2
    if p >= g2 / 4.0:
        return math.inf
    if p == 0.0:
        return 1.0
    return (4.0 / g2) * _gamma(-4.0 * p / g2) / _gamma(-p)


# ---------------------------------------------------------------------------
# ratio identities: Gamma_b-side vs trig-side
# ---------------------------------------------------------------------------

def ratio_identity_residuals(kappa: float, rho: float) -> dict[str, float]:
    """Relative residuals |gamma-side - trig-side| / |trig-side| of the five
    coefficient-ratio identities, evaluated at a simple-regime point
    (kappa, rho) and its induced non-simple parameters.

    gamma-sides are assembled from disk/triangle length amplitudes (double
    gamma functions); trig-sides are elementary.  All five should agree to
    better than 1e-8 in double precision.
    """
    from .params import SimpleParams  # validation only
    SimpleParams(kappa, rho)
    g = math.sqrt(kappa)
    ctx = LcftContext(g)
    A = lambda W: disk_length_amplitude(ctx, W)
    T = lambda *Ws: triangle_length_amplitude(ctx, *Ws)

    out: dict[str, float] = {}

    # (1) squared-prefactor disk-amplitude ratio
    c1c2_gamma = (
        A(kappa - 2.0 - rho) * A(rho + 2.0)
        * _gamma(1.0 - 2.0 * (rho + 2.0) / kappa) * _gamma(2.0 * (rho + 4.0) / kappa)
    ) / (
        A(kappa - 4.0 - rho) * A(rho + 4.0)
        * _gamma(1.0 - 2.0 * (kappa - 4.0 - rho) / kappa)
        * _gamma(2.0 * (kappa - 2.0 - rho) / kappa)
    )
    c1c2_trig = ((2.0 * rho + 8.0 - kappa) / (kappa - 2.0 * rho - 4.0)) ** 2 * math.sin(
        2.0 * math.pi * (rho + 2.0) / kappa
    ) / math.sin(2.0 * math.pi * (kappa - 4.0 - rho) / kappa)
    out["disk-pair"] = abs(c1c2_gamma - c1c2_trig) / abs(c1c2_trig)

    # (2) triangle-amplitude ratio: rational in the weights
    bc1 = T(kappa - 2.0, rho + 4.0, rho + 4.0) / (
        A(rho + 2.0) * T(kappa - 4.0 - rho, 2.0, rho + 4.0)
    )
    bc2 = T(kappa - 2.0, kappa - 2.0 - rho, kappa - 2.0 - rho) / (
        A(kappa - 4.0 - rho) * T(rho + 2.0, 2.0, kappa - 2.0 - rho)
    )
    bc_trig = (kappa - 2.0 * rho - 4.0) / (2.0 * rho + 8.0 - kappa)
    out["triangle-pair"] = abs(bc1 / bc2 - bc_trig) / abs(bc_trig)

    # (3) combined orientation-coefficient ratio, simple regime
    lhs = ((2.0 * rho + 8.0 - kappa) / (kappa - 2.0 * rho - 4.0)) ** 4 \
        * (1.0 / c1c2_gamma) * (bc1 / bc2) ** 2
    rhs = math.sin(2.0 * math.pi * (kappa - 4.0 - rho) / kappa) / math.sin(
        2.0 * math.pi * (rho + 2.0) / kappa
    )
    out["orientation-simple"] = abs(lhs - rhs) / abs(rhs)

    # induced non-simple parameters: the blue child weight
    kp = 16.0 / kappa
    rp = kp - 4.0 + kp / 4.0 * rho
    Wm = g * g / 4.0 * rp + g * g - 2.0
    Wp = 2.0 - g * g / 2.0 - g * g / 4.0 * rp
    bp = (2.0 + Wp) / g
    bm = (2.0 + Wm) / g
    bmid = 4.0 / g - g / 2.0

    # (4) three-insertion coefficient ratio
    hr = np.exp(log_h_coefficient(ctx, bp, bmid, bm) - log_h_coefficient(ctx, bm, bmid, bp))
    hr = _realize(hr, "H ratio", tol=1e-8)
    hr_trig = math.sin(2.0 * math.pi * (kp - 4.0 - rp) / kp) / math.sin(
        2.0 * math.pi * (rp + 2.0) / kp
    )
    out["h-ratio"] = abs(hr - hr_trig) / abs(hr_trig)

    # (5) combined orientation-coefficient ratio, non-simple regime
    diskr = A(Wp) * A(g * g - Wp) / (A(Wm) * A(g * g - Wm))
    lhs5 = ((g * g - 2.0 * Wp) / (g * g - 2.0 * Wm)) ** 2 * hr * diskr \
        * (g * g - 2.0 * Wm) / (g * g - 2.0 * Wp)
    out["orientation-nonsimple"] = abs(lhs5 - hr_trig) / abs(hr_trig)

    return out

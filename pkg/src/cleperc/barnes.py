"""Double gamma and double sine functions via regularized quadrature.

log Gamma_b(z) is computed from the integral representation

    int_0^inf dt/t [ (e^{-z t} - e^{-Q t/2}) / ((1-e^{-b t})(1-e^{-t/b}))
                     - (Q/2 - z)^2/2 e^{-t} - (Q/2 - z)/t ],   Q = b + 1/b,

valid for Re z > 0.  (The exponent in the second numerator term must be
negative for convergence; with this convention the integrand vanishes
identically at z = Q/2, so Gamma_b(Q/2) = 1, and both shift equations hold.)

Arguments with small or negative real part are reduced into the strip
Re z >= 0.35 Q with the b-shift equation

    Gamma_b(z + b) = sqrt(2 pi) b^{b z - 1/2} / Gamma(b z) * Gamma_b(z),

accumulating ordinary log-gamma factors.  The integrand's small-t
cancellation is removed analytically with a Taylor series, and the
algebraic -c1/t^2 tail is integrated in closed form past the truncation
point.  Relative accuracy is ~1e-13 for b in [0.3, 1] and |Im z| up to a
few units, verified against the shift equations.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import loggamma

from .errors import PoleError

_LOG_2PI = math.log(2.0 * math.pi)


@lru_cache(maxsize=8)
def _gl_nodes(order: int):
    return np.polynomial.legendre.leggauss(order)


def _series_coeffs(z: complex, b: float, order: int = 18):
    """Taylor coefficients I_k of the regularized integrand around t = 0."""
    Q = b + 1.0 / b
    c1 = Q / 2.0 - z
    c2 = 0.5 * c1 * c1
    m = order + 2
    k = np.arange(m)
    fact_kp1 = np.array([math.factorial(int(j) + 1) for j in k], dtype=float)
    # (e^{-z t} - e^{-Q t/2})/t = sum_k n_k t^k
    nk = ((-1.0) ** (k + 1)) * (z ** (k + 1) - (Q / 2.0) ** (k + 1)) / fact_kp1

    def em1_series(a: float):
        # (1 - e^{-a t})/(a t) = sum_j (-a)^j/(j+1)! t^j
        j = np.arange(m)
        return ((-a) ** j) / fact_kp1
    d = np.polynomial.polynomial.polymul(em1_series(b), em1_series(1.0 / b))[:m]
    # q = n/d as a power series (long division)
    q = np.zeros(m, dtype=complex)
    q[0] = nk[0] / d[0]
    for i in range(1, m):
        q[i] = (nk[i] - np.dot(q[:i], d[1:i + 1][::-1])) / d[0]
    g = q[1:]  # main(t) - c1/t = sum g_k t^k
    e = np.array([(-1.0) ** j / math.factorial(int(j)) for j in range(order + 1)])
    h = g[: order + 1] - c2 * e  # h_0 = 0 identically
    return h[1:]  # I_k = h_{k+1}


def _log_gamma_b_core(z: complex, b: float, t0: float = 0.3) -> complex:
    """Integral evaluation, requires Re z bounded away from 0."""
    Q = b + 1.0 / b
    c1 = Q / 2.0 - z
    c2 = 0.5 * c1 * c1
    coeffs = _series_coeffs(z, b)
    ks = np.arange(1, len(coeffs) + 1)
    val = complex(np.sum(coeffs * t0 ** ks / ks))
    T = max(60.0, 60.0 / min(1.0, z.real, b, 1.0 / b))
    edges = np.geomspace(t0, T, 49)
    x0, w0 = _gl_nodes(40)
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        t = 0.5 * (hi - lo) * x0 + 0.5 * (hi + lo)
        num = np.exp(-z * t) - np.exp(-Q * t / 2.0)
        den = np.expm1(-b * t) * np.expm1(-t / b)
        f = (num / den - c2 * np.exp(-t) - c1 / t) / t
        val += 0.5 * (hi - lo) * np.sum(w0 * f)
    val += -c1 / T  # closed-form tail of the -c1/t^2 term
    return val


def log_double_gamma(z, b: float) -> complex:
    """log Gamma_b(z), analytically continued via the b-shift equation.

    Raises PoleError when the continuation passes through (or lands on) a
    pole of Gamma_b, i.e. when some shifted argument b(z + n b) hits a
    nonpositive integer of the ordinary gamma function.
    """
    z = complex(z)
    Q = b + 1.0 / b
    z_lo = 0.35 * Q
    shift = 0.0 + 0.0j
    n = 0
    while z.real < z_lo:
        bz = b * z
        if abs(bz.imag) < 1e-12 and bz.real <= 1e-12 and abs(bz.real - round(bz.real)) < 1e-12:
            raise PoleError(f"Gamma_b pole hit during continuation at z={z}")
        shift += loggamma(bz) - 0.5 * _LOG_2PI - (bz - 0.5) * math.log(b)
        z = z + b
        n += 1
        if n > 600:
            raise PoleError("shift continuation did not terminate")
    return _log_gamma_b_core(z, b) + shift


def double_gamma(z, b: float) -> complex:
    return np.exp(log_double_gamma(z, b))


def log_double_sine(z, b: float) -> complex:
    """log S_b(z) = log Gamma_b(z) - log Gamma_b(Q - z)."""
    Q = b + 1.0 / b
    return log_double_gamma(z, b) - log_double_gamma(Q - z, b)


def double_sine(z, b: float) -> complex:
    return np.exp(log_double_sine(z, b))


def log_double_sine_integral(z, b: float) -> complex:
    """Independent evaluation of log S_b(z) for 0 < Re z < Q from

        int_0^inf dt/t [ sinh((Q/2 - z) t) / (2 sinh(b t/2) sinh(t/(2b)))
                         - (Q - 2z)/t ].
    """
    z = complex(z)
    Q = b + 1.0 / b
    if not 0.0 < z.real < Q:
        raise PoleError(f"integral form needs 0 < Re z < Q, got {z}")
    a = Q / 2.0 - z
    c = Q - 2.0 * z

    t0 = 0.25
    # series of the integrand at 0: sinh(a t)/(2 sinh(bt/2) sinh(t/2b)) = (2a/t)(1 + p2 t^2 + ...)
    # computed numerically by series division as in the gamma case
    m = 14
    j = np.arange(m)
    fact = np.array([math.factorial(int(i)) for i in j], dtype=float)
    # sinh(a t)/t = sum a^{2k+1} t^{2k} /(2k+1)!
    num = np.zeros(m, dtype=complex)
    for kk in range(0, m, 2):
        num[kk] = a ** (kk + 1) / math.factorial(kk + 1)
    # (2/t) sinh(bt/2) = sum (b/2)^{2k+1} t^{2k} 2/(2k+1)!
    def sh(bb):
        out = np.zeros(m)
        for kk in range(0, m, 2):
            out[kk] = 2.0 * (bb / 2.0) ** (kk + 1) / math.factorial(kk + 1)
        return out
    den = np.polynomial.polynomial.polymul(sh(b), sh(1.0 / (b)))[:m] * 0.5
    q = np.zeros(m, dtype=complex)
    q[0] = num[0] / den[0]
    for i in range(1, m):
        q[i] = (num[i] - np.dot(q[:i], den[1:i + 1][::-1])) / den[0]
    # q(t) = t * f_core(t) is an even series with q_0 = c; the integrand is
    # (q(t) - q_0)/t^2, so its Taylor coefficients are q_{k+2}
    coeffs = q[2:]
    ks = np.arange(1, len(coeffs) + 1)
    val = complex(np.sum(coeffs * t0 ** ks / ks))

    decay = min(z.real, Q - z.real)
    T = max(60.0, 60.0 / min(decay, 1.0))
    edges = np.geomspace(t0, T, 49)
    x0, w0 = _gl_nodes(40)
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        t = 0.5 * (hi - lo) * x0 + 0.5 * (hi + lo)
        f = (np.sinh(a * t) / (2.0 * np.sinh(b * t / 2.0) * np.sinh(t / (2.0 * b))) - c / t) / t
        val += 0.5 * (hi - lo) * np.sum(w0 * f)
    val += -c / T
    return val

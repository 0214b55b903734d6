"""Monte Carlo samplers for the loop-closure observables.

The driving pair of angular gaps (theta1, theta2) of the radial exploration
satisfies, in capacity time,

    d theta1 = sqrt(k) dB + [ (rho1+2)/2 cot(theta1/2) - rho2/2 cot(theta2/2) ] dt
    d theta2 = -sqrt(k) dB + [ (rho2+2)/2 cot(theta2/2) - rho1/2 cot(theta1/2) ] dt

with rho1 the weight of the force point started just clockwise of the root
and rho2 = kappa - 6 - rho1.  The remaining (unswallowed) boundary arc
rem = 2 pi - theta1 - theta2 decays deterministically given the gaps:

    d log rem / dt = - sin(rem/2) / ( rem sin(theta1/2) sin(theta2/2) ).

The sampler works in the time coordinate tau = -log(rem / 2 pi), in which
rem is exactly 2 pi e^{-tau} and the single remaining state variable theta1
has globally bounded drift

    drift(theta1) = pref (a1 cos(theta1/2) sin(theta2/2) - rho2 cos(theta2/2) sin(theta1/2)),
    noise^2       = kappa * phi,     phi = 2 pref sin(theta1/2) sin(theta2/2),
    pref          = rem / (2 sin(rem/2)),    a_i = rho_i + 2,

and the closure (capacity) time is sigma1 = int phi dtau.  Near theta = 0 the
dynamics is square-root degenerate; steps inside that zone use the exact
noncentral-chi-square transition of the locally frozen affine model, which
removes the boundary-occupation bias of Euler stepping.  The loop closes
clockwise iff theta1 is the gap that finally collapses; the race is read
off once a gap has fallen below gap_tolerance after rem is negligible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import numba
from numba import njit, prange

from .errors import ParameterError, UnsupportedParameterError
from .params import K4Params, NonSimpleParams, SimpleParams
from .rng import lane_states, replica_generator

U64 = np.uint64
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SimConfig:
    """Discretization controls for the loop sampler.

    dt             step of the log-arc time tau
    gap_tolerance  gap level that declares the closure race decided
    max_steps      per-path step budget (exceeded -> censored sample)
    tau_min        earliest tau at which the race may be declared
    tau_max        hard tau cutoff
    zone_factor    width of the exact-transition boundary zone, in units
                   of (local noise^2/theta) * dt
    scheme         identifier of the boundary treatment
    """

    dt: float = 1e-3
    gap_tolerance: float = 1e-9
    max_steps: int = 2_000_000
    tau_min: float = 21.0
    tau_max: float = 1000.0
    zone_factor: float = 50.0
    scheme: str = "cir-zone"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ParameterError("dt must be positive")
        if not 0.0 < self.gap_tolerance < 1e-2:
            raise ParameterError("gap_tolerance must lie in (0, 1e-2)")

    def refined(self, factor: float = 2.0) -> "SimConfig":
        return replace(self, dt=self.dt / factor)


@dataclass
class LoopSample:
    """One closure observation: capacity time, orientation, validity."""

    sigma1: float
    orientation: str  # "clockwise" | "counterclockwise"
    valid: bool
    steps: int

    @property
    def conformal_radius(self) -> float:
        return math.exp(-self.sigma1)


@dataclass
class LoopBatch:
    """Vectorized batch of loop samples."""

    sigma1: np.ndarray
    clockwise: np.ndarray  # bool
    valid: np.ndarray      # bool
    steps: np.ndarray

    def __len__(self):
        return len(self.sigma1)

    def censored_fraction(self) -> float:
        return 1.0 - self.valid.mean()

    def __getitem__(self, i: int) -> LoopSample:
        return LoopSample(
            float(self.sigma1[i]),
            "clockwise" if self.clockwise[i] else "counterclockwise",
            bool(self.valid[i]),
            int(self.steps[i]),
        )


def _regime_weights(params) -> tuple[float, float]:
    if isinstance(params, SimpleParams):
        return params.kappa, params.rho
    if isinstance(params, NonSimpleParams):
        return params.kappa_prime, params.rho_prime
    raise ParameterError("params must be SimpleParams or NonSimpleParams")


# ---------------------------------------------------------------------------
# compiled kernel
# ---------------------------------------------------------------------------

@njit(inline="always")
def _next_u64(st):
    s1 = st[0]
    s0 = st[1]
    st[0] = s0
    s1 ^= (s1 << U64(23)) & U64(0xFFFFFFFFFFFFFFFF)
    s1 ^= s1 >> U64(17)
    s1 ^= s0 ^ (s0 >> U64(26))
    st[1] = s1
    return (s0 + s1) & U64(0xFFFFFFFFFFFFFFFF)


@njit(inline="always")
def _unif(st):
    return (np.float64(_next_u64(st) >> U64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(inline="always")
def _normal(st):
    return math.sqrt(-2.0 * math.log(_unif(st))) * math.cos(2.0 * math.pi * _unif(st))


@njit(inline="always")
def _poisson(st, lam):
    if lam <= 0.0:
        return 0
    if lam > 30.0:
        k = int(round(lam + math.sqrt(lam) * _normal(st)))
        return k if k > 0 else 0
    L = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= _unif(st)
        if p <= L:
            return k
        k += 1


@njit(inline="always")
def _gamma_sample(st, alpha):
    if alpha <= 0.0:
        return 0.0
    boost = 1.0
    a = alpha
    if a < 1.0:
        boost = _unif(st) ** (1.0 / a)
        a += 1.0
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _normal(st)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _unif(st)
        if u < 1.0 - 0.0331 * (x * x) * (x * x):
            return boost * d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return boost * d * v


@njit(inline="always")
def _affine_sqrt_exact(st, x, alpha, beta, h):
    """Exact transition of dX = alpha dt + sqrt(beta X) dW over h (frozen
    coefficients): noncentral chi-square via Poisson-Gamma mixture."""
    if beta <= 0.0:
        return x + alpha * h
    lam = 4.0 * x / (beta * h)
    k = _poisson(st, 0.5 * lam)
    return 0.5 * beta * h * _gamma_sample(st, 2.0 * alpha / beta + k)


@njit(parallel=True, cache=True)
def _run_loops(kappa, rho1, seeds, dtau, g_trap, tau_min, tau_max, zone_k,
               max_steps, sig_out, cw_out, ok_out, steps_out):
    n = seeds.shape[0]
    rho2 = kappa - 6.0 - rho1
    a1 = rho1 + 2.0
    a2 = rho2 + 2.0
    sqk = math.sqrt(kappa)
    for kk in prange(n):
        st = np.empty(2, np.uint64)
        st[0] = seeds[kk, 0]
        st[1] = seeds[kk, 1]
        tau = dtau
        rem = _TWO_PI * math.exp(-tau)
        th = (a1 / (a1 + a2)) * (_TWO_PI - rem)
        sig = 0.0
        phi_prev = -1.0
        done = False
        nst = 0
        while nst < max_steps:
            nst += 1
            rem = _TWO_PI * math.exp(-tau)
            hi = _TWO_PI - rem
            if th < 0.0:
                th = 0.0
            if th > hi:
                th = hi
            th2 = hi - th
            sr = math.sin(0.5 * rem)
            pref = 0.5 * rem / sr if sr > 1e-300 else 0.5
            s1 = math.sin(0.5 * th)
            c1 = math.cos(0.5 * th)
            s2 = math.sin(0.5 * th2)
            c2 = math.cos(0.5 * th2)
            phi = 2.0 * pref * s1 * s2
            if phi_prev >= 0.0:
                sig += 0.5 * (phi_prev + phi) * dtau
            else:
                sig += phi * dtau
            phi_prev = phi
            if tau >= tau_min and (th < g_trap or th2 < g_trap):
                cw_out[kk] = 1 if th < th2 else 0
                ok_out[kk] = 1
                done = True
                break
            if tau > tau_max:
                break
            d1 = pref * (a1 * c1 * s2 - rho2 * c2 * s1)
            if th <= th2:
                g = th
                alpha = d1
                side = 0
            else:
                g = th2
                alpha = rem - d1
                side = 1
            if g > 1e-300:
                beta = kappa * phi / g
            else:
                beta = 2.0 * kappa * pref * (s2 if side == 0 else s1)
            if g < zone_k * beta * dtau:
                gn = _affine_sqrt_exact(st, g, alpha, beta, dtau)
                tau += dtau
                hin = _TWO_PI - _TWO_PI * math.exp(-tau)
                if side == 0:
                    th = gn
                else:
                    th = hin - gn
                if th < 0.0:
                    th = 0.0
                if th > hin:
                    th = hin
            else:
                dW = _normal(st) * math.sqrt(dtau)
                th = th + d1 * dtau + sqk * math.sqrt(phi) * dW
                tau += dtau
                hin = _TWO_PI - _TWO_PI * math.exp(-tau)
                th = abs(th)
                if th > hin:
                    th = 2.0 * hin - th
                    if th < 0.0:
                        th = 0.0
                    if th > hin:
                        th = hin
        if not done:
            rem = _TWO_PI * math.exp(-tau)
            th2 = _TWO_PI - rem - th
            cw_out[kk] = 1 if th < th2 else 0
        sig_out[kk] = sig
        steps_out[kk] = nst


def sample_bcle_loops(params, cfg: SimConfig, n: int, seed: int,
                      replica: int = 0) -> LoopBatch:
    """Sample n independent loop closures for the given regime parameters."""
    kappa, rho1 = _regime_weights(params)
    seeds = lane_states(seed, replica, n)
    sig = np.zeros(n)
    cw = np.zeros(n, np.uint8)
    ok = np.zeros(n, np.uint8)
    steps = np.zeros(n, np.int64)
    _run_loops(kappa, rho1, seeds, cfg.dt, cfg.gap_tolerance, cfg.tau_min,
               cfg.tau_max, cfg.zone_factor, cfg.max_steps, sig, cw, ok, steps)
    return LoopBatch(sig, cw.astype(bool), ok.astype(bool), steps)


def sample_bcle_loop(params, cfg: SimConfig, seed: int) -> LoopSample:
    """Single-sample convenience wrapper."""
    return sample_bcle_loops(params, cfg, 1, seed)[0]


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def _batch_mean_se(values: np.ndarray, n_batches: int = 32) -> tuple[float, float]:
    """Mean and batch-means standard error."""
    n = len(values)
    mean = float(values.mean())
    if n < 2 * n_batches:
        return mean, float(values.std(ddof=1) / math.sqrt(n))
    cut = (n // n_batches) * n_batches
    bm = values[:cut].reshape(n_batches, -1).mean(axis=1)
    return mean, float(bm.std(ddof=1) / math.sqrt(n_batches))


@dataclass
class OrientedMomentEstimate:
    lam: float
    clockwise: float
    clockwise_se: float
    counterclockwise: float
    counterclockwise_se: float
    censored_fraction: float


def moment_estimates_from_batch(batch: LoopBatch, lambdas) -> list[OrientedMomentEstimate]:
    out = []
    ok = batch.valid
    cf = batch.censored_fraction()
    sig = batch.sigma1[ok]
    cw = batch.clockwise[ok]
    for lam in lambdas:
        w = np.exp(-lam * sig)
        m_cw, se_cw = _batch_mean_se(w * cw)
        m_ccw, se_ccw = _batch_mean_se(w * (~cw))
        out.append(OrientedMomentEstimate(lam, m_cw, se_cw, m_ccw, se_ccw, cf))
    return out


def estimate_oriented_cr_moments(params, lambdas, n_samples: int, seed: int,
                                 cfg: SimConfig | None = None,
                                 extrapolate: bool = True,
                                 margin: float = 0.1):
    """Empirical oriented moments E[e^{-lam sigma1}; orientation].

    Each requested lam must exceed the finiteness threshold by `margin`
    (estimator variance blows up near the threshold).  With
    extrapolate=True the run is repeated at half the step size and the
    estimates are linearly extrapolated to zero step; the returned standard
    errors are combined accordingly.
    """
    cfg = cfg or SimConfig()
    thr = params.moment_threshold
    for lam in lambdas:
        if lam < thr + margin:
            raise UnsupportedParameterError(
                f"lambda={lam} below threshold+margin={thr + margin}"
            )
    batch = sample_bcle_loops(params, cfg, n_samples, seed, replica=0)
    base = moment_estimates_from_batch(batch, lambdas)
    if not extrapolate:
        return base
    fine = moment_estimates_from_batch(
        sample_bcle_loops(params, cfg.refined(), n_samples, seed, replica=1), lambdas
    )
    out = []
    for b, f in zip(base, fine):
        out.append(OrientedMomentEstimate(
            b.lam,
            2.0 * f.clockwise - b.clockwise,
            math.hypot(2.0 * f.clockwise_se, b.clockwise_se),
            2.0 * f.counterclockwise - b.counterclockwise,
            math.hypot(2.0 * f.counterclockwise_se, b.counterclockwise_se),
            max(b.censored_fraction, f.censored_fraction),
        ))
    return out


# ---------------------------------------------------------------------------
# kappa = 4: Brownian exit
# ---------------------------------------------------------------------------

_GOBET_SHIFT = 0.5826  # boundary shift constant for Euler exit problems


def bm_exit_check(rho: float, lam: float, n_samples: int, seed: int,
                  dt: float = 5e-4):
    """Standard Brownian motion started at 0 exiting (rho pi/2, (rho+2) pi/2);
    the upper exit corresponds to a clockwise loop.  Returns the oriented
    estimates of E[e^{-lam tau}; side] with standard errors.

    Euler stepping with the half-order boundary correction (hitting is
    tested against boundaries moved inward by 0.5826 sqrt(dt), compensating
    the undetected intra-step excursions).
    """
    K4Params(rho)
    if lam <= -0.5:
        raise UnsupportedParameterError("lambda must exceed -1/2")
    rng = replica_generator(seed, 0)
    a = rho * math.pi / 2.0 + _GOBET_SHIFT * math.sqrt(dt)
    b = (rho + 2.0) * math.pi / 2.0 - _GOBET_SHIFT * math.sqrt(dt)
    x = np.zeros(n_samples)
    t = np.zeros(n_samples)
    alive = np.arange(n_samples)
    top = np.zeros(n_samples, bool)
    tau = np.zeros(n_samples)
    sq = math.sqrt(dt)
    while alive.size:
        x[alive] += sq * rng.standard_normal(alive.size)
        t[alive] += dt
        xa = x[alive]
        hit_top = xa >= b
        hit_bot = xa <= a
        done = hit_top | hit_bot
        idx = alive[done]
        top[idx] = hit_top[done]
        tau[idx] = t[idx]
        alive = alive[~done]
    w = np.exp(-lam * tau)
    m_top, se_top = _batch_mean_se(w * top)
    m_bot, se_bot = _batch_mean_se(w * (~top))
    return OrientedMomentEstimate(lam, m_top, se_top, m_bot, se_bot, 0.0)


# ---------------------------------------------------------------------------
# non-nested ensemble conformal radius: tilted Brownian exit
# ---------------------------------------------------------------------------

def cle_diffusion_check(kappa_prime: float, lam: float, n_samples: int, seed: int,
                        dt: float = 5e-4) -> tuple[float, float]:
    """Monte Carlo estimate of E[CR^lam] for the non-nested ensemble at
    kappa' via an exact 1-D diffusion representation.

    With x0 = pi (4 - kappa)/4 and kappa = 16/kappa', the closed form equals
    cos(x0) E[e^{(c - kappa lam) tau}] for a standard Brownian motion exiting
    (0, pi) from pi/2, where c = 2 x0^2/pi^2.  The exponential weighting is
    realized as a diffusion with drift -(2 x0/pi) tan((2 x0/pi)(x - pi/2))
    (the h-transform by cos((2 x0/pi)(x - pi/2))), whose exit time tau gives
    the estimate as the plain empirical mean of e^{-kappa lam tau}.
    """
    if not 4.0 < kappa_prime < 8.0:
        raise ParameterError(f"kappa_prime={kappa_prime} outside (4, 8)")
    kappa = 16.0 / kappa_prime
    lam_min = 3.0 * kappa_prime / 32.0 + 2.0 / kappa_prime - 1.0
    if lam <= lam_min:
        raise UnsupportedParameterError(f"lambda={lam} at or below {lam_min}")
    x0 = math.pi * (4.0 - kappa) / 4.0
    kfac = 2.0 * x0 / math.pi
    rng = replica_generator(seed, 0)
    lo = 0.0 + _GOBET_SHIFT * math.sqrt(dt)
    hi = math.pi - _GOBET_SHIFT * math.sqrt(dt)
    x = np.full(n_samples, math.pi / 2.0)
    t = np.zeros(n_samples)
    tau = np.zeros(n_samples)
    alive = np.arange(n_samples)
    sq = math.sqrt(dt)
    while alive.size:
        xa = x[alive]
        x[alive] = xa - kfac * np.tan(kfac * (xa - math.pi / 2.0)) * dt \
            + sq * rng.standard_normal(alive.size)
        t[alive] += dt
        done = (x[alive] <= lo) | (x[alive] >= hi)
        idx = alive[done]
        tau[idx] = t[idx]
        alive = alive[~done]
    w = np.exp(-kappa * lam * tau)
    return _batch_mean_se(w)


# ---------------------------------------------------------------------------
# geometric reference sampler (slit-map composition)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _drive_paths(kappa, rho1, seeds, dt, rem_stop, max_steps, n_check, w_out,
                 cap_out, nrec_out, sig_out, cw_out, ok_out):
    """Capacity-time simulation of (theta1, theta2, w) recording the driving
    angle at n_check evenly spaced checkpoints (drift-implicit square-root
    steps; adequate for the geometric winding reference)."""
    n = seeds.shape[0]
    rho2 = kappa - 6.0 - rho1
    a1 = rho1 + 2.0
    a2 = rho2 + 2.0
    sqk = math.sqrt(kappa)
    for kk in range(n):
        st = np.empty(2, np.uint64)
        st[0] = seeds[kk, 0]
        st[1] = seeds[kk, 1]
        th1 = 0.0
        th2 = 0.0
        w = 0.0
        t = 0.0
        nst = 0
        irec = 0
        ok = 0
        while nst < max_steps:
            nst += 1
            h = dt
            if t < 50.0 * dt:
                hw = t / 40.0
                if hw < dt / 1024.0:
                    hw = dt / 1024.0
                if hw < h:
                    h = hw
            gmin = th1 if th1 < th2 else th2
            if gmin > 0.0:
                hg = 0.5 * gmin * gmin / kappa
                if hg < h:
                    h = hg if hg > dt / 64.0 else dt / 64.0
            dW = _normal(st) * math.sqrt(h) * sqk
            # own-singularity implicit roots
            y1 = th1 + dW
            t1s = 0.5 * (y1 + math.sqrt(y1 * y1 + 4.0 * a1 * h))
            y2 = th2 - dW
            t2s = 0.5 * (y2 + math.sqrt(y2 * y2 + 4.0 * a2 * h))
            c1v = 1.0 / math.tan(0.5 * t1s)
            c2v = 1.0 / math.tan(0.5 * t2s)
            cur1 = (0.5 * a1 * c1v - a1 / t1s) * h
            cur2 = (0.5 * a2 * c2v - a2 / t2s) * h
            cr1 = -0.5 * rho2 * c2v * h + cur1
            cr2 = -0.5 * rho1 * c1v * h + cur2
            y1 = th1 + dW + cr1
            nth1 = 0.5 * (y1 + math.sqrt(y1 * y1 + 4.0 * a1 * h))
            y2 = th2 - dW + cr2
            nth2 = 0.5 * (y2 + math.sqrt(y2 * y2 + 4.0 * a2 * h))
            # driving increment: dw = dB + rho1/2 int cot(th1/2) - rho2/2 int cot(th2/2)
            i1 = a1 * h / nth1 + cur1  # int (a1/2) cot(theta1/2) dt over the step
            i2 = a2 * h / nth2 + cur2
            w += dW + (rho1 / a1) * i1 - (rho2 / a2) * i2
            th1 = nth1
            th2 = nth2
            t += h
            if irec < n_check:
                w_out[kk, irec] = w
                cap_out[kk, irec] = t
                irec += 1
            else:
                # shift: keep a sliding decimation so checkpoints span the path
                for j in range(0, n_check - 1):
                    if j % 2 == 0:
                        w_out[kk, j // 2] = w_out[kk, j]
                        cap_out[kk, j // 2] = cap_out[kk, j]
                irec = n_check // 2
                w_out[kk, irec] = w
                cap_out[kk, irec] = t
                irec += 1
            if _TWO_PI - th1 - th2 < rem_stop:
                ok = 1
                break
        sig_out[kk] = t
        cw_out[kk] = 1 if th1 < th2 else 0
        ok_out[kk] = ok
        nrec_out[kk] = irec


def _slit_inverse(z: np.ndarray, delta: float) -> np.ndarray:
    """Inverse incremental map of the radial slit hull of capacity delta
    rooted at angle 0: solves f/(1+f)^2 = e^{-delta} z/(1+z)^2 with f(0)=0."""
    s = np.exp(-delta) * z / (1.0 + z) ** 2
    # (1-2s-sqrt(1-4s))/(2s), rationalized for stability at small s
    return 2.0 * s / (1.0 - 2.0 * s + np.sqrt(1.0 - 4.0 * s))


def hull_reference_sample(params, cfg: SimConfig, n: int, seed: int,
                          n_check: int = 192, dt: float = 2e-3) -> LoopBatch:
    """Slow geometric reference: reconstructs the trace by composing radial
    slit maps along the recorded driving function and classifies the loop
    orientation by the sign of the net winding of the trace around 0.

    Intended for small n; validates the gap-race orientation rule.
    """
    kappa, rho1 = _regime_weights(params)
    seeds = lane_states(seed, 1_000_003, n)
    w_rec = np.zeros((n, n_check))
    cap_rec = np.zeros((n, n_check))
    nrec = np.zeros(n, np.int64)
    sig = np.zeros(n)
    cw_gap = np.zeros(n, np.uint8)
    ok = np.zeros(n, np.uint8)
    _drive_paths(kappa, rho1, seeds, dt, 1e-3, cfg.max_steps, n_check,
                 w_rec, cap_rec, nrec, sig, cw_gap, ok)

    clockwise = np.zeros(n, bool)
    for i in range(n):
        m = int(nrec[i])
        wv = w_rec[i, :m]
        cv = cap_rec[i, :m]
        # trace points: tip of slit k propagated through earlier maps
        deltas = np.diff(np.concatenate([[0.0], cv]))
        tips = np.exp(1j * wv) * _slit_inverse(np.ones(m, complex), np.maximum(deltas, 1e-12))
        pts = tips.copy()
        for j in range(m - 2, -1, -1):
            zz = pts[j + 1:] * np.exp(-1j * wv[j])
            pts[j + 1:] = np.exp(1j * wv[j]) * _slit_inverse(zz, deltas[j])
        ang = np.unwrap(np.angle(pts))
        clockwise[i] = (ang[-1] - ang[0]) < 0.0
    return LoopBatch(sig, clockwise, ok.astype(bool), nrec)

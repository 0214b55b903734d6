"""Critical fuzzy-coloring lattice simulation (integer q) and arm statistics.

The chain is a Swendsen-Wang sweep at the self-dual point p_c = sqrt(q)/(1+sqrt(q))
on a centered square grid with free boundary: bonds open between equal
neighboring spins with probability p_c, bond clusters recolored uniformly.
The fuzzy coloring paints each bond cluster red with probability r
(independent stream), and the one-arm events ask for a monochromatic
nearest-neighbor path across the annulus Lambda_n \\ Lambda_m.

Cluster labeling uses scipy.ndimage on a refined (2S-1)^2 mask whose odd
cells carry the bonds; arm events use numba BFS kernels restricted to the
annulus.  The star-circuit dual event is checked on the double cover of the
annulus cut along the positive x-axis: a surrounding circuit exists iff a
red *-cluster connects the two sheets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import ndimage

from .errors import ParameterError
from .rng import replica_generator

_NN_STRUCTURE = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class LatticeConfig:
    """Centered grid [-L/2, L/2]^2 with free boundary (L even -> (L+1)^2 sites)."""

    L: int
    q: int
    r: float
    burn_in: int = 2000
    thin: int = 5

    def __post_init__(self):
        if self.L % 2 or self.L < 8:
            raise ParameterError("L must be even and >= 8")
        if self.q not in (2, 3, 4):
            raise ParameterError("q must be one of 2, 3, 4")
        if not 0.0 <= self.r <= 1.0:
            raise ParameterError("r must lie in [0, 1]")

    @property
    def sites(self) -> int:
        return self.L + 1

    @property
    def center(self) -> int:
        return self.L // 2

    @property
    def beta_c(self) -> float:
        return math.log(1.0 + math.sqrt(self.q))

    @property
    def p_c(self) -> float:
        return math.sqrt(self.q) / (1.0 + math.sqrt(self.q))


def initial_spins(cfg: LatticeConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, cfg.q, size=(cfg.sites, cfg.sites), dtype=np.int8)


def sample_bonds(spins: np.ndarray, p: float, rng: np.random.Generator):
    """Open each equal-spin nearest-neighbor bond independently w.p. p."""
    open_h = (spins[:, :-1] == spins[:, 1:]) & (rng.random(size=(spins.shape[0], spins.shape[1] - 1)) < p)
    open_v = (spins[:-1, :] == spins[1:, :]) & (rng.random(size=(spins.shape[0] - 1, spins.shape[1])) < p)
    return open_h, open_v


def bond_cluster_labels(open_h: np.ndarray, open_v: np.ndarray):
    """Vertex labels of the bond clusters (free boundary), via a refined mask."""
    s = open_h.shape[0]
    fine = np.zeros((2 * s - 1, 2 * s - 1), dtype=bool)
    fine[0::2, 0::2] = True
    fine[0::2, 1::2] = open_h
    fine[1::2, 0::2] = open_v
    lab, nlab = ndimage.label(fine, structure=_NN_STRUCTURE)
    return lab[0::2, 0::2], nlab


def sw_sweep(spins: np.ndarray, cfg: LatticeConfig, rng: np.random.Generator):
    """One bond-then-spin update.  Returns (new_spins, (open_h, open_v), labels).

    The returned bonds are one step of the chain toward (at stationarity a
    sample of) the free-boundary random-cluster marginal at p_c.
    """
    open_h, open_v = sample_bonds(spins, cfg.p_c, rng)
    labels, nlab = bond_cluster_labels(open_h, open_v)
    new_colors = rng.integers(0, cfg.q, size=nlab + 1, dtype=np.int8)
    return new_colors[labels], (open_h, open_v), labels


@dataclass
class FuzzyColoring:
    """Red/blue vertex coloring together with its bond-cluster provenance."""

    red: np.ndarray          # bool (S, S)
    cluster_labels: np.ndarray

    @property
    def blue(self) -> np.ndarray:
        return ~self.red


def color_clusters(labels: np.ndarray, r: float, rng: np.random.Generator) -> FuzzyColoring:
    nlab = int(labels.max())
    red_of = rng.random(nlab + 1) < r
    red_of[0] = False  # label 0 unused
    return FuzzyColoring(red_of[labels], labels)


def fuzzy_sample(cfg: LatticeConfig, burn_in: int, rng: np.random.Generator,
                 color_rng: np.random.Generator | None = None) -> FuzzyColoring:
    """Equilibrate a fresh chain and color the final bond configuration.

    The coloring stream is independent of the dynamics stream.
    """
    color_rng = color_rng or rng
    spins = initial_spins(cfg, rng)
    labels = None
    for _ in range(max(burn_in, 1)):
        spins, _, labels = sw_sweep(spins, cfg, rng)
    return color_clusters(labels, cfg.r, color_rng)


# ---------------------------------------------------------------------------
# arm events (numba kernels)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _mask_annulus_crossing(mask, c, m, n):
    """True iff a nearest-neighbor path of True sites inside the annulus
    m < max|.| <= n connects the inner ring (norm m+1) to the outer ring
    (norm n)."""
    S = mask.shape[0]
    seen = np.zeros((S, S), np.uint8)
    qx = np.empty(S * S, np.int32)
    qy = np.empty(S * S, np.int32)
    head = 0
    tail = 0
    for x in range(c - m - 1, c + m + 2):
        for y in range(c - m - 1, c + m + 2):
            if x < 0 or y < 0 or x >= S or y >= S:
                continue
            dx = x - c if x >= c else c - x
            dy = y - c if y >= c else c - y
            nrm = dx if dx > dy else dy
            # inner contact set: adjacent to the hole (corner sites of the
            # ring are not nearest-neighbor adjacent to Lambda_m)
            if nrm == m + 1 and not (dx == m + 1 and dy == m + 1) and mask[x, y]:
                seen[x, y] = 1
                qx[tail] = x
                qy[tail] = y
                tail += 1
    while head < tail:
        x = qx[head]
        y = qy[head]
        head += 1
        dx = x - c if x >= c else c - x
        dy = y - c if y >= c else c - y
        nrm = dx if dx > dy else dy
        if nrm == n:
            return True
        for k in range(4):
            nx = x + (1 if k == 0 else -1 if k == 1 else 0)
            ny = y + (1 if k == 2 else -1 if k == 3 else 0)
            if nx < 0 or ny < 0 or nx >= S or ny >= S:
                continue
            if seen[nx, ny]:
                continue
            ddx = nx - c if nx >= c else c - nx
            ddy = ny - c if ny >= c else c - ny
            nn = ddx if ddx > ddy else ddy
            if nn <= m or nn > n:
                continue
            if not mask[nx, ny]:
                continue
            seen[nx, ny] = 1
            qx[tail] = nx
            qy[tail] = ny
            tail += 1
    return False


@njit(cache=True)
def _bond_annulus_crossing(open_h, open_v, c, m, n):
    """Open-bond analog of _mask_annulus_crossing (free boundary): a path of
    open bonds with all visited sites inside the annulus."""
    S = open_h.shape[0]
    seen = np.zeros((S, S), np.uint8)
    qx = np.empty(S * S, np.int32)
    qy = np.empty(S * S, np.int32)
    head = 0
    tail = 0
    for x in range(c - m - 1, c + m + 2):
        for y in range(c - m - 1, c + m + 2):
            if x < 0 or y < 0 or x >= S or y >= S:
                continue
            dx = x - c if x >= c else c - x
            dy = y - c if y >= c else c - y
            nrm = dx if dx > dy else dy
            if nrm == m + 1 and not (dx == m + 1 and dy == m + 1):
                seen[x, y] = 1
                qx[tail] = x
                qy[tail] = y
                tail += 1
    while head < tail:
        x = qx[head]
        y = qy[head]
        head += 1
        dx = x - c if x >= c else c - x
        dy = y - c if y >= c else c - y
        nrm = dx if dx > dy else dy
        if nrm == n:
            return True
        for k in range(4):
            if k == 0:
                nx, ny = x, y + 1
                ok = y + 1 < S and open_h[x, y]
            elif k == 1:
                nx, ny = x, y - 1
                ok = y - 1 >= 0 and open_h[x, y - 1]
            elif k == 2:
                nx, ny = x + 1, y
                ok = x + 1 < S and open_v[x, y]
            else:
                nx, ny = x - 1, y
                ok = x - 1 >= 0 and open_v[x - 1, y]
            if not ok or seen[nx, ny]:
                continue
            ddx = nx - c if nx >= c else c - nx
            ddy = ny - c if ny >= c else c - ny
            nn = ddx if ddx > ddy else ddy
            if nn <= m or nn > n:
                continue
            seen[nx, ny] = 1
            qx[tail] = nx
            qy[tail] = ny
            tail += 1
    return False


@njit(cache=True)
def _star_circuit(mask, c, m, n):
    """True iff the annulus contains a star-connected circuit of True sites
    surrounding the hole.

    Detection on the double cover: cut the annulus along the ray
    {(x, c + 1/2) : x > c}; a star-step between rows y = c and y = c + 1
    whose crossing abscissa exceeds c flips the cover sheet.  A circuit with
    odd winding exists iff some site is reached on both sheets.
    """
    S = mask.shape[0]
    sheet = np.zeros((S, S), np.uint8)  # bitmask of sheets reached (0 = unseen)
    qx = np.empty(2 * S * S, np.int32)
    qy = np.empty(2 * S * S, np.int32)
    qs = np.empty(2 * S * S, np.uint8)
    for sx in range(S):
        for sy in range(S):
            dx0 = sx - c if sx >= c else c - sx
            dy0 = sy - c if sy >= c else c - sy
            nrm0 = dx0 if dx0 > dy0 else dy0
            if nrm0 <= m or nrm0 > n or not mask[sx, sy] or sheet[sx, sy]:
                continue
            head = 0
            tail = 0
            qx[tail] = sx
            qy[tail] = sy
            qs[tail] = 0
            tail += 1
            sheet[sx, sy] = 1
            while head < tail:
                x = qx[head]
                y = qy[head]
                s0 = qs[head]
                head += 1
                for ddx in range(-1, 2):
                    for ddy in range(-1, 2):
                        if ddx == 0 and ddy == 0:
                            continue
                        nx = x + ddx
                        ny = y + ddy
                        if nx < 0 or ny < 0 or nx >= S or ny >= S:
                            continue
                        adx = nx - c if nx >= c else c - nx
                        ady = ny - c if ny >= c else c - ny
                        nn = adx if adx > ady else ady
                        if nn <= m or nn > n or not mask[nx, ny]:
                            continue
                        crosses = 0
                        if (y == c and ny == c + 1) or (y == c + 1 and ny == c):
                            if x + nx > 2 * c:  # crossing abscissa (x+nx)/2 > c
                                crosses = 1
                        s1 = s0 ^ crosses
                        bit = np.uint8(1 << s1)
                        if sheet[nx, ny] & bit:
                            continue
                        sheet[nx, ny] |= bit
                        if sheet[nx, ny] == 3:
                            return True
                        qx[tail] = nx
                        qy[tail] = ny
                        qs[tail] = s1
                        tail += 1
    return False


def one_arm_event(coloring: FuzzyColoring, cfg: LatticeConfig, m: int, n: int,
                  color: str = "blue") -> bool:
    """Monochromatic nearest-neighbor crossing of the annulus Lambda_n \\ Lambda_m."""
    if not 0 < m < n <= cfg.L // 2:
        raise ParameterError(f"need 0 < m < n <= L/2, got m={m}, n={n}")
    mask = coloring.blue if color == "blue" else coloring.red
    return bool(_mask_annulus_crossing(mask, cfg.center, m, n))


def star_circuit_event(coloring: FuzzyColoring, cfg: LatticeConfig, m: int, n: int,
                       color: str = "red") -> bool:
    """Star-connected circuit of the given color surrounding Lambda_m inside
    the annulus; the exact complement of the opposite-color one-arm event."""
    if not 0 < m < n <= cfg.L // 2:
        raise ParameterError(f"need 0 < m < n <= L/2, got m={m}, n={n}")
    mask = coloring.red if color == "red" else coloring.blue
    return bool(_star_circuit(mask, cfg.center, m, n))


def fk_arm_event(open_h: np.ndarray, open_v: np.ndarray, cfg: LatticeConfig,
                 m: int, n: int) -> bool:
    """Open-bond crossing of the annulus."""
    if not 0 < m < n <= cfg.L // 2:
        raise ParameterError(f"need 0 < m < n <= L/2, got m={m}, n={n}")
    return bool(_bond_annulus_crossing(open_h, open_v, cfg.center, m, n))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass
class ArmMeasurement:
    m: int
    n: int
    n_samples: int
    blue_hits: int
    red_hits: int
    fk_hits: int
    seed: int

    @property
    def blue_probability(self) -> float:
        return self.blue_hits / self.n_samples

    @property
    def red_probability(self) -> float:
        return self.red_hits / self.n_samples

    @property
    def fk_probability(self) -> float:
        return self.fk_hits / self.n_samples

    def low_statistics(self) -> bool:
        return min(self.blue_hits, self.n_samples - self.blue_hits) < 100


def default_scales(cfg: LatticeConfig, n_scales: int = 4) -> list[tuple[int, int]]:
    """Largest n_scales dyadic ratios m/n with n = L/2 and m in {4, 8, ...}."""
    n = cfg.L // 2
    ms = []
    m = n // 2
    while m >= 4 and len(ms) < n_scales:
        ms.append(m)
        m //= 2
    return [(m, n) for m in sorted(ms)]


def run_arm_experiment(cfg: LatticeConfig, scales, n_samples: int, seed: int,
                       replica: int = 0, measure_fk: bool = True,
                       progress=None) -> list[ArmMeasurement]:
    """Single-chain arm-frequency measurement.

    Burn-in, then one measurement every cfg.thin sweeps; each measurement
    draws a fresh coloring of the current bond configuration (independent
    stream) and checks all requested scales.
    """
    scales = [(int(m), int(n)) for (m, n) in scales]
    for m, n in scales:
        if not 0 < m < n <= cfg.L // 2:
            raise ParameterError(f"scale ({m},{n}) outside the lattice")
    rng = replica_generator(seed, 2 * replica)
    crng = replica_generator(seed, 2 * replica + 1)
    spins = initial_spins(cfg, rng)
    labels = None
    bonds = None
    for _ in range(cfg.burn_in):
        spins, bonds, labels = sw_sweep(spins, cfg, rng)
    blue = np.zeros(len(scales), np.int64)
    red = np.zeros(len(scales), np.int64)
    fk = np.zeros(len(scales), np.int64)
    for i in range(n_samples):
        for _ in range(cfg.thin):
            spins, bonds, labels = sw_sweep(spins, cfg, rng)
        col = color_clusters(labels, cfg.r, crng)
        for j, (m, n) in enumerate(scales):
            if _mask_annulus_crossing(col.blue, cfg.center, m, n):
                blue[j] += 1
            if _mask_annulus_crossing(col.red, cfg.center, m, n):
                red[j] += 1
            if measure_fk and _bond_annulus_crossing(bonds[0], bonds[1], cfg.center, m, n):
                fk[j] += 1
        if progress is not None and (i + 1) % progress == 0:
            print(f"  replica {replica}: {i + 1}/{n_samples} measurements", flush=True)
    return [
        ArmMeasurement(m, n, n_samples, int(blue[j]), int(red[j]), int(fk[j]), seed)
        for j, (m, n) in enumerate(scales)
    ]


def merge_measurements(per_replica: list[list[ArmMeasurement]]) -> list[ArmMeasurement]:
    """Sum hit counts across replicas (scales must match)."""
    base = per_replica[0]
    out = []
    for j, m0 in enumerate(base):
        blue = sum(rep[j].blue_hits for rep in per_replica)
        red = sum(rep[j].red_hits for rep in per_replica)
        fk = sum(rep[j].fk_hits for rep in per_replica)
        ns = sum(rep[j].n_samples for rep in per_replica)
        out.append(ArmMeasurement(m0.m, m0.n, ns, blue, red, fk, m0.seed))
    return out


@dataclass
class ExponentFit:
    exponent: float
    stderr: float
    intercept: float
    chi2: float
    dof: int
    residuals: list[float] = field(default_factory=list)


def fit_exponent(measurements, channel: str = "blue") -> ExponentFit:
    """Weighted least squares of log P against log(m/n).

    P(m, n) ~ C (m/n)^alpha, so the slope of log P on log(m/n) estimates
    alpha directly.  Weights are the binomial delta-method variances of
    log(p_hat).  Requires >= 2 distinct scales (>= 4 recommended).
    """
    pts = []
    for meas in measurements:
        hits = {"blue": meas.blue_hits, "red": meas.red_hits, "fk": meas.fk_hits}[channel]
        ns = meas.n_samples
        if hits == 0 or hits == ns:
            continue
        p = hits / ns
        x = math.log(meas.m / meas.n)
        var_logp = (1.0 - p) / (ns * p)
        pts.append((x, math.log(p), 1.0 / var_logp))
    if len({x for x, _, _ in pts}) < 2:
        raise ParameterError("need at least two scales with nondegenerate counts")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    w = np.array([p[2] for p in pts])
    W = np.diag(w)
    X = np.column_stack([x, np.ones_like(x)])
    cov = np.linalg.inv(X.T @ W @ X)
    beta = cov @ X.T @ W @ y
    resid = y - X @ beta
    chi2 = float(resid @ (w * resid))
    return ExponentFit(
        exponent=float(beta[0]),
        stderr=float(math.sqrt(cov[0, 0])),
        intercept=float(beta[1]),
        chi2=chi2,
        dof=len(pts) - 2,
        residuals=[float(r) for r in resid],
    )


def run_arm_experiment_parallel(cfg: LatticeConfig, scales, n_samples: int,
                                seed: int, n_workers: int = 1,
                                measure_fk: bool = True) -> list[ArmMeasurement]:
    """Shard measurements across independent chains (one process per replica)
    and merge the counts.  Results depend only on (seed, shard layout), not
    on scheduling."""
    if n_workers <= 1:
        return run_arm_experiment(cfg, scales, n_samples, seed, 0, measure_fk)
    from concurrent.futures import ProcessPoolExecutor
    shares = [n_samples // n_workers] * n_workers
    for i in range(n_samples % n_workers):
        shares[i] += 1
    args = [(cfg, scales, shares[i], seed, i, measure_fk) for i in range(n_workers)
            if shares[i] > 0]
    with ProcessPoolExecutor(max_workers=n_workers) as ex:
        futs = [ex.submit(run_arm_experiment, *a) for a in args]
        reps = [f.result() for f in futs]
    return merge_measurements(reps)

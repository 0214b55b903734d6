"""Validated parameter bundles for the loop-ensemble formulas.

Three coupling regimes are used throughout:

  * simple:     kappa in (2,4),  rho in (-2, kappa-4)
  * non-simple: kappa' in (4,8), rho' in (kappa'/2-4, kappa'/2-2)
  * kappa = 4:  rho in (-2, 0)

plus the colored-ensemble bundle (kappa', r) with r the red-coloring
probability and beta = 2r - 1 the orientation bias.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DivergentMomentError, ParameterError


@dataclass(frozen=True)
class SimpleParams:
    """(kappa, rho) with kappa in (2,4) and rho in (-2, kappa-4)."""

    kappa: float
    rho: float

    def __post_init__(self):
        if not 2.0 < self.kappa < 4.0:
            raise ParameterError(f"kappa={self.kappa} outside (2, 4)")
        if not -2.0 < self.rho < self.kappa - 4.0:
            raise ParameterError(
                f"rho={self.rho} outside (-2, {self.kappa - 4.0}) for kappa={self.kappa}"
            )

    @property
    def dual_rho(self) -> float:
        """The companion weight kappa - 6 - rho (also in (-2, kappa-4))."""
        return self.kappa - 6.0 - self.rho

    @property
    def moment_threshold(self) -> float:
        """Conformal-radius moments are finite strictly above kappa/8 - 1."""
        return self.kappa / 8.0 - 1.0


@dataclass(frozen=True)
class NonSimpleParams:
    """(kappa', rho') with kappa' in (4,8) and rho' in (kappa'/2-4, kappa'/2-2).

    The admissible rho' window differs from the simple regime even though
    the closed-form expressions look alike.
    """

    kappa_prime: float
    rho_prime: float

    def __post_init__(self):
        kp = self.kappa_prime
        if not 4.0 < kp < 8.0:
            raise ParameterError(f"kappa_prime={kp} outside (4, 8)")
        lo, hi = kp / 2.0 - 4.0, kp / 2.0 - 2.0
        if not lo < self.rho_prime < hi:
            raise ParameterError(
                f"rho_prime={self.rho_prime} outside ({lo}, {hi}) for kappa_prime={kp}"
            )

    @property
    def dual_rho(self) -> float:
        return self.kappa_prime - 6.0 - self.rho_prime

    @property
    def moment_threshold(self) -> float:
        return self.kappa_prime / 8.0 - 1.0


@dataclass(frozen=True)
class K4Params:
    """The critical regime kappa = 4 with rho in (-2, 0)."""

    rho: float

    def __post_init__(self):
        if not -2.0 < self.rho < 0.0:
            raise ParameterError(f"rho={self.rho} outside (-2, 0)")

    @property
    def moment_threshold(self) -> float:
        return -0.5


@dataclass(frozen=True)
class ColoredCleParams:
    """Colored loop-ensemble parameters (kappa', r).

    r is the red probability of each cluster; beta = 2r - 1.  The dual
    simple-regime coupling is kappa = 16/kappa'.
    """

    kappa_prime: float
    r: float

    def __post_init__(self):
        if not 4.0 < self.kappa_prime < 8.0:
            raise ParameterError(f"kappa_prime={self.kappa_prime} outside (4, 8)")
        if not 0.0 < self.r < 1.0:
            raise ParameterError(f"r={self.r} outside (0, 1)")

    @property
    def kappa(self) -> float:
        return 16.0 / self.kappa_prime

    @property
    def beta(self) -> float:
        return 2.0 * self.r - 1.0

    @property
    def lambda_min(self) -> float:
        """Lower edge of the moment window for the child-domain recursion."""
        kp = self.kappa_prime
        return 3.0 * kp / 32.0 + 2.0 / kp - 1.0


_REGIMES = ("simple", "nonsimple", "k4")


@dataclass(frozen=True)
class MomentOrder:
    """A moment order lambda together with its regime bookkeeping."""

    lam: float
    regime: str
    kappa: float = 4.0  # coupling of the regime; ignored for k4

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise ParameterError(f"regime must be one of {_REGIMES}")

    @property
    def threshold(self) -> float:
        if self.regime == "k4":
            return -0.5
        return self.kappa / 8.0 - 1.0

    @property
    def is_finite(self) -> bool:
        return self.lam > self.threshold

    @property
    def theta_squared(self) -> float:
        """Signed square of the angle theta(lambda); negative means the
        sine ratio continues to its hyperbolic form."""
        if self.regime == "k4":
            return -2.0 * self.lam * math.pi ** 2
        k = self.kappa
        return (math.pi / 4.0) ** 2 * ((4.0 - k) ** 2 - 8.0 * k * self.lam)

    def require_finite(self):
        if not self.is_finite:
            raise DivergentMomentError(
                f"lambda={self.lam} at or below threshold {self.threshold} "
                f"({self.regime} regime): moment is infinite"
            )


@dataclass(frozen=True)
class OrientedValue:
    """A (clockwise, counterclockwise) pair of nonnegative reals."""

    clockwise: float
    counterclockwise: float

    @property
    def total(self) -> float:
        return self.clockwise + self.counterclockwise

    def as_tuple(self) -> tuple[float, float]:
        return (self.clockwise, self.counterclockwise)


@dataclass
class LcftContext:
    """Coupling bundle for the special-function kernel.

    gamma in (0,2); Q = gamma/2 + 2/gamma; b = gamma/2.  The forested
    (non-simple) identities additionally need gamma in (sqrt(2), 2).
    """

    gamma: float
    Q: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.gamma < 2.0:
            raise ParameterError(f"gamma={self.gamma} outside (0, 2)")
        self.Q = self.gamma / 2.0 + 2.0 / self.gamma
        self.b = self.gamma / 2.0

    def require_forested(self):
        if not self.gamma > math.sqrt(2.0):
            raise ParameterError(
                f"gamma={self.gamma} outside (sqrt(2), 2): forested identities unavailable"
            )

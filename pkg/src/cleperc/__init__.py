"""Exact one-arm exponents and conformal-radius laws for loop-ensemble
percolations, with two independent Monte Carlo verification channels
(a radial exploration sampler and a critical lattice simulator)."""

from .errors import (
    ClepercError,
    DivergentMomentError,
    NumericError,
    ParameterError,
    PoleError,
    UnsupportedParameterError,
)
from .exact import (
    bcle_child_weights,
    child_cr_moment,
    cle_cr_moment,
    cr_moment_k4,
    cr_moment_nonsimple,
    cr_moment_simple,
    fk_one_arm_limit,
    loop_moment_fixed_point,
    one_arm_exponent,
    one_arm_gap,
    r_from_rho,
    rho_from_r,
    touch_probability_k4,
    touch_probability_nonsimple,
    touch_probability_simple,
)
from .params import (
    ColoredCleParams,
    K4Params,
    LcftContext,
    MomentOrder,
    NonSimpleParams,
    OrientedValue,
    SimpleParams,
)

__version__ = "0.1.0"

__all__ = [
    "ClepercError",
    "ColoredCleParams",
    "DivergentMomentError",
    "K4Params",
    "LcftContext",
    "MomentOrder",
    "NonSimpleParams",
    "NumericError",
    "OrientedValue",
    "ParameterError",
    "PoleError",
    "SimpleParams",
    "UnsupportedParameterError",
    "bcle_child_weights",
    "child_cr_moment",
    "cle_cr_moment",
    "cr_moment_k4",
    "cr_moment_nonsimple",
    "cr_moment_simple",
    "fk_one_arm_limit",
    "loop_moment_fixed_point",
    "one_arm_exponent",
    "one_arm_gap",
    "r_from_rho",
    "rho_from_r",
    "touch_probability_k4",
    "touch_probability_nonsimple",
    "touch_probability_simple",
]

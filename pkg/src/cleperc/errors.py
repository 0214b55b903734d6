"""Exception types shared across the package."""


class ClepercError(Exception):
    """Base class for package errors."""


class ParameterError(ClepercError, ValueError):
    """Input outside the admissible parameter range."""


class DivergentMomentError(ClepercError, ArithmeticError):
    """A moment was requested at or below its finiteness threshold."""


class PoleError(ClepercError, ArithmeticError):
    """Evaluation requested at (or numerically too close to) a pole."""


class UnsupportedParameterError(ClepercError, ValueError):
    """Parameters violate a structural constraint of the formula."""


class NumericError(ClepercError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""

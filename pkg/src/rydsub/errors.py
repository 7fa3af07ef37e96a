"""Exceptions and warnings raised by rydsub."""


class RydsubError(Exception):
    """Base class for all rydsub errors."""


class InvalidParameter(RydsubError, ValueError):
    pass


class QuadratureFailure(RydsubError, ArithmeticError):
    """Adaptive quadrature did not reach its tolerance within the panel budget."""


class DimensionMismatch(RydsubError, ValueError):
    pass


class GridMismatch(RydsubError, ValueError):
    pass


class IndexOutOfRange(RydsubError, IndexError):
    pass


class StepTooCoarse(RydsubError):
    """Step-doubling comparison of the RK4 oracle exceeded its tolerance."""


class ConfigError(RydsubError, ValueError):
    pass


class DiluteViolation(UserWarning):
    """Two excitations of one configuration sit within 2 blockade radii."""


class DegenerateInput(UserWarning):
    pass


class OptimizationDegenerate(UserWarning):
    """Objective is flat across the search bounds."""


class BoundaryHit(UserWarning):
    """Optimum landed on a search-domain edge that is not a physical constraint."""

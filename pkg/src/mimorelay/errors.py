"""Exception hierarchy shared by every module of the simulator."""


class MimoRelayError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(MimoRelayError, ValueError):
    """Operands have incompatible dimensions."""


class NonFiniteError(MimoRelayError, ValueError):
    """A matrix contains NaN or Inf entries."""


class SingularMatrixError(MimoRelayError, ArithmeticError):
    """LU factorization met a pivot below the singularity threshold.

    Parameters
    ----------
    pivot_index : int
        Elimination step at which the pivot collapsed.
    """

    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix is singular to working precision at pivot {pivot_index}")


class ConvergenceError(MimoRelayError, ArithmeticError):
    """An iterative method hit its iteration cap."""


class DomainError(MimoRelayError, ValueError):
    """Argument outside the mathematical domain (e.g. log of a non-positive determinant)."""


class GeometryError(MimoRelayError, ValueError):
    """Invalid node placement or path-loss exponent."""


class DimensionError(MimoRelayError, ValueError):
    """Antenna / user counts violate the supported configuration."""


class DegenerateDrawError(MimoRelayError, ArithmeticError):
    """A channel realization made a scheme design impossible (singular GP, zero-norm rows, ...)."""


class ConfigError(MimoRelayError, ValueError):
    """Invalid experiment configuration.

    Parameters
    ----------
    key : str or None
        Dotted configuration key the problem refers to.
    """

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class DiscardBudgetExceeded(MimoRelayError, RuntimeError):
    """Too many degenerate realizations were discarded during a Monte Carlo run."""

"""Exception types shared across the package."""


class DhlabError(Exception):
    """Base class for all dhlab-specific errors."""


class EmptyDomainError(DhlabError, ValueError):
    """Requested object has an empty domain (e.g. sieve limit below 2)."""


class InsufficientTableError(DhlabError, ValueError):
    """A quantity was requested beyond the sieved range of a PrimeTable."""


class PhaseBudgetError(DhlabError, ValueError):
    """Grid evaluation refused: the phase range exceeds the recurrence budget."""


class GridStepError(DhlabError, ValueError):
    """Numerical integration refused: the sampling step is too coarse."""


class QuadratureError(DhlabError, RuntimeError):
    """Adaptive quadrature failed to converge.  Carries the residual estimate."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


class ParameterError(DhlabError, ValueError):
    """Arc parameter choice is inconsistent.  Names the failed inequality."""

    def __init__(self, message, failed, min_x=None):
        super().__init__(message)
        self.failed = failed
        self.min_x = min_x


class DomainError(DhlabError, ValueError):
    """Argument outside the mathematical domain of an operation."""

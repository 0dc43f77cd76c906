"""Exception types raised across the package."""


class RisalignError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(RisalignError, ValueError):
    """Phase vector length does not match the channel size."""


class UndefinedSNRError(RisalignError, ValueError):
    """SNR requested for a channel with zero noise level."""


class SingularDesignError(RisalignError, ValueError):
    """Measurement-phase design matrix is rank deficient."""


class AmbiguousPhaseError(RisalignError, ValueError):
    """Phase estimate requested from a zero (or numerically zero) argument."""


class SolverFailureError(RisalignError, RuntimeError):
    """Iterative solver did not converge; carries the best iterate found.

    Attributes
    ----------
    best_x : ndarray
        Best feasible iterate at the time of failure.
    best_objective : float
        Objective value at ``best_x``.
    """

    def __init__(self, message, best_x=None, best_objective=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_objective = best_objective


class GeometryError(RisalignError, ValueError):
    """Invalid geometry (e.g. coincident transmitter and element positions)."""


class HarvesterDomainError(RisalignError, ValueError):
    """Conversion efficiency evaluated outside its domain (input power <= 0)."""


class SearchSpaceError(RisalignError, ValueError):
    """Exhaustive discrete search space exceeds the tractability guard."""


class UndefinedNAPError(RisalignError, ValueError):
    """Normalized achieved power undefined for an all-zero channel."""


class ConfigError(RisalignError, ValueError):
    """Invalid experiment or algorithm configuration."""

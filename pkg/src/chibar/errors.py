"""Exception hierarchy shared by all chibar modules."""


class ChibarError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(ChibarError, ValueError):
    """A matrix failed the positive-definiteness check."""


class NoConvergence(ChibarError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class NegativeCorrelation(ChibarError, ValueError):
    """Covariance has a negative off-diagonal entry.

    The chi-bar-squared interpretation of the boundary LRT is only
    guaranteed under non-negative correlation, so such inputs are rejected.
    """


class DimensionTooLarge(ChibarError, ValueError):
    """Exact face enumeration requested beyond the supported dimension."""


class InvalidPartition(ChibarError, ValueError):
    """Parameter-of-interest / nuisance split is inconsistent."""


class GenerationFailed(ChibarError, RuntimeError):
    """Random covariance generation exhausted its attempt cap."""

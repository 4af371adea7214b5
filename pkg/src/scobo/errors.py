"""Exception types raised across the package."""


class ScoError(Exception):
    """Base class for all package errors."""


class DegenerateAcquisitionError(ScoError):
    """The acquisition function is zero on every pre-sample (and at its maximizer)."""


class DistinctSiteShortageError(ScoError):
    """Not enough distinct sites with positive weight to fill a design."""


class MissingCacheError(ScoError, KeyError):
    """A design site is not part of the candidate pool."""


class IllConditionedDataError(ScoError):
    """The GP covariance could not be factorized even at the largest nugget."""


class GeneratorError(ScoError):
    """A test-function generator could not place its basins."""


class ConfigError(ScoError):
    """Invalid experiment configuration."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = list(fields)


class AraUndefinedError(ScoError):
    """Relative accuracy requested for a function whose minimum is zero."""

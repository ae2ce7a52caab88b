"""Exception types shared across the package.

File-system problems surface as the built-in ``OSError`` family; everything
domain-specific derives from :class:`DpGridKmError` so callers can catch one
base class at the CLI boundary.
"""


class DpGridKmError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(DpGridKmError):
    """A CSV row could not be parsed (wrong arity or non-numeric cell)."""

    def __init__(self, message: str, row: int, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class OutOfDomainError(DpGridKmError):
    """A coordinate falls outside the declared [-r, r] domain."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class DimensionMismatchError(DpGridKmError):
    """Point or centroid dimension does not match the data domain."""


class GridOverflowError(DpGridKmError):
    """Requested grid has more cells than the dense-count limit allows."""


class BoundsMismatchError(DpGridKmError):
    """Dataset and grid were built over different domains."""


class AlreadyPrivatizedError(DpGridKmError):
    """A histogram was privatized twice; this would silently double-spend budget."""


class BracketFailureError(DpGridKmError):
    """The root bracket expansion ran away; the sizing parameters are pathological."""


class InvalidDimensionError(DpGridKmError):
    """Grid sizing requires dimension >= 2; the convexity argument fails at d = 1."""


class AllWeightsNonPositiveError(DpGridKmError):
    """No cell carries positive effective weight; weighted clustering is undefined."""


class KExceedsDistinctPointsError(DpGridKmError):
    """More clusters requested than there are distinct weighted points."""


class KExceedsNError(DpGridKmError):
    """More clusters requested than there are data points."""


class ConfigError(DpGridKmError):
    """An experiment or generator configuration is invalid."""

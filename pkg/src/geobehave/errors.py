"""Exception hierarchy shared across the package.

Every error raised by the library derives from GeoBehaveError so callers
can catch one base class at pipeline boundaries.
"""


class GeoBehaveError(Exception):
    """Base class for all library errors."""


class InvalidInput(GeoBehaveError):
    """A coordinate, precision or other scalar argument is out of range."""


class InvalidGeohash(GeoBehaveError):
    """A geohash string has an invalid length or alphabet character."""


class ParseError(GeoBehaveError):
    """A malformed row in an input stream.

    Carries the 1-based line number of the offending row.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NoActiveData(GeoBehaveError):
    """An individual has no minute window with enough samples."""


class NoNightData(GeoBehaveError):
    """No GPS fix falls inside the configured night window."""


class NoResidents(GeoBehaveError):
    """A geohash aggregate was requested for an empty resident list."""


class NoData(GeoBehaveError):
    """An operation needs at least one data point and got none."""


class DegenerateLabels(GeoBehaveError):
    """All behavioral attributes equal, or a single-class training set."""


class InvalidFolds(GeoBehaveError):
    """Fewer data points than requested cross-validation folds."""


class InvalidSize(GeoBehaveError):
    """A render size below the supported minimum."""

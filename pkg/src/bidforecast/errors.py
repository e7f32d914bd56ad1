"""Exception types shared across the package."""


class ForecastError(Exception):
    """Base class for all library errors."""


class FormatError(ForecastError):
    """Input stream is not in the declared log format."""


class DomainError(ForecastError, ValueError):
    """Argument outside its mathematical domain."""


class InsufficientDataError(ForecastError, ValueError):
    """Not enough observations to fit the requested model."""


class EmptyRangeError(ForecastError):
    """No eligible records, so the active control range is empty."""


class UndefinedCorrelationError(ForecastError):
    """Correlation requested on a zero-variance series."""


class InvalidTodError(ForecastError, ValueError):
    """Time-of-day model drops to a nonpositive traffic level."""


class EmptyActivityError(ForecastError):
    """Every pacing bucket is inactive; nothing to normalize."""


class ModelSelectionError(ForecastError):
    """All candidate mixture fits failed."""


class UndefinedBiasError(ForecastError):
    """Forecast/actual ratio is undefined (a side is zero)."""


class ExtrapolationError(ForecastError):
    """Requested control value lies outside the forecast grid."""


class EmptySummaryError(ForecastError):
    """Summary requested over an empty record set."""

"""Exception types shared across the toolkit."""


class DimevalError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(DimevalError):
    """Input violates a documented invariant (range, shape, uniqueness...)."""


class DimensionError(ValidationError):
    """Array shapes do not agree."""


class FormatError(DimevalError):
    """A byte stream or file does not conform to its declared format."""


class UsageError(DimevalError):
    """An operation was called in a way that makes no sense (empty input, n too small)."""


class UndefinedCorrelationError(ValidationError):
    """Correlation is undefined for the given series (e.g. zero variance)."""

"""Exception types shared across the package."""


class SparseInterpError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SparseInterpError):
    """An argument violates an operation's precondition."""


class ConfigurationError(SparseInterpError):
    """A configuration is internally inconsistent or unusable."""


class NumericFailureError(SparseInterpError):
    """A numeric procedure failed to converge or produced garbage."""


class ConversionFailureError(NumericFailureError):
    """Tone-basis conversion of a polynomial could not reach the target error."""

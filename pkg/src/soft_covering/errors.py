class SoftCoverError(Exception):
    """Base exception for soft-covering computations.

    Attributes:
        message: Human readable description.
        code: Stable upper-snake identifier, e.g. ``RATE_TOO_LOW``.
        exit_code: Process exit status the CLI maps this error to.
    """

    exit_code = 1
    default_code = "SOFT_COVER_ERROR"

    def __init__(self, message: str, code: str | None = None):
        self.message = message
        self.code = code or type(self).default_code
        super().__init__(self.message)


class InvalidParameterError(SoftCoverError):
    """Inputs violate a precondition of the requested computation."""

    exit_code = 2
    default_code = "INVALID_PARAMETER"


class NegativeWeightError(InvalidParameterError):
    default_code = "NEGATIVE_WEIGHT"


class ZeroMassError(InvalidParameterError):
    default_code = "ZERO_MASS"


class NotNormalizedError(InvalidParameterError):
    default_code = "NOT_NORMALIZED"


class AlphabetMismatchError(InvalidParameterError):
    default_code = "ALPHABET_MISMATCH"


class LengthMismatchError(InvalidParameterError):
    default_code = "LENGTH_MISMATCH"


class UndefinedDensityError(InvalidParameterError):
    default_code = "UNDEFINED_DENSITY"


class SupportViolationError(InvalidParameterError):
    default_code = "SUPPORT_VIOLATION"


class DomainError(InvalidParameterError):
    default_code = "DOMAIN_ERROR"


class RateTooLowError(InvalidParameterError):
    """R - delta does not exceed I(X;Y); the exponent supremum is zero."""

    default_code = "RATE_TOO_LOW"

    def __init__(self, message: str, mutual_info_bits: float):
        self.mutual_info_bits = mutual_info_bits
        super().__init__(message)


class ZeroDispersionError(InvalidParameterError):
    default_code = "ZERO_DISPERSION"


class InvalidRateError(InvalidParameterError):
    default_code = "INVALID_RATE"


class DegenerateFitError(InvalidParameterError):
    default_code = "DEGENERATE_FIT"


class ZeroTargetMassError(InvalidParameterError):
    default_code = "ZERO_TARGET_MASS"


class ConfigError(InvalidParameterError):
    default_code = "CONFIG_ERROR"


class ResourceLimitError(SoftCoverError):
    """A configured size cap would be exceeded."""

    exit_code = 3
    default_code = "RESOURCE_LIMIT"

    def __init__(self, message: str, n: int | None = None):
        self.n = n
        super().__init__(message)


class SizeOverflowError(ResourceLimitError):
    default_code = "SIZE_OVERFLOW"


class SpaceTooLargeError(ResourceLimitError):
    default_code = "SPACE_TOO_LARGE"


class DecompositionMismatchError(SoftCoverError):
    """P_{C,1} + P_{C,2} disagreed with the induced distribution."""

    default_code = "DECOMPOSITION_MISMATCH"


class BoundViolationError(SoftCoverError):
    """An exact quantity exceeded a bound that must dominate it."""

    default_code = "BOUND_VIOLATION"

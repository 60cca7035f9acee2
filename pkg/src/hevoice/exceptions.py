"""Exception taxonomy shared across the package.

Everything derives from :class:`HevoiceError` so callers can catch broadly;
the concrete classes also subclass the closest builtin (ValueError,
ArithmeticError, KeyError) so generic handling keeps working.
"""


class HevoiceError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(HevoiceError, ValueError):
    """A call argument violates a documented precondition."""


class KeyGenerationError(HevoiceError, RuntimeError):
    """Prime/key generation failed after bounded retries."""


class PlaintextRangeError(HevoiceError, ValueError):
    """Integer plaintext outside [0, n)."""


class KeyMismatchError(HevoiceError, ValueError):
    """Ciphertexts or references belong to a different key pair."""


class CiphertextArithmeticError(HevoiceError, ArithmeticError):
    """A ciphertext is not invertible modulo n^2 (malformed input)."""


class EncodingDomainError(HevoiceError, ValueError):
    """Non-finite value passed to the float encoder."""


class MagnitudeError(HevoiceError, ValueError):
    """Value too large for the positive/negative mantissa band."""


class OverflowBandError(HevoiceError, ArithmeticError):
    """Decoded mantissa fell in the overflow-detection band [n/3, 2n/3)."""


class PrecisionOverflowError(HevoiceError, ArithmeticError):
    """Exponent alignment would scale a mantissa past the configured cap."""


class ShapeError(HevoiceError, ValueError):
    """Vector/matrix dimensions do not match."""


class NormalizationError(HevoiceError, ValueError):
    """Zero-norm vector cannot be length normalized."""


class EstimationError(HevoiceError, ValueError):
    """Training corpus violates the estimation preconditions."""


class ConditioningError(HevoiceError, ArithmeticError):
    """A scatter/covariance matrix is degenerate beyond regularization."""


class LookupError_(HevoiceError, KeyError):
    """Requested enrolment reference is not in the database."""


class ConfigurationError(HevoiceError, ValueError):
    """Protocol entity holds keys it must not hold (or misses required ones)."""


class InputError(HevoiceError, ValueError):
    """Empty or degenerate score set passed to a metric."""


class CalibrationFitError(HevoiceError, ValueError):
    """Calibration training set has fewer than two scores in a class."""


class FileFormatError(HevoiceError, ValueError):
    """Serialized artifact has an unknown format or major version."""

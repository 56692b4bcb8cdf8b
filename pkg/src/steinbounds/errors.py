"""Exception types shared across the package."""


class SteinboundsError(Exception):
    """Base class for all package errors."""


class CapExceeded(SteinboundsError):
    """Exact enumeration would exceed the configured configuration cap."""


class ArityMismatch(SteinboundsError):
    """Configuration length does not match the functional's arity."""


class DuplicateIndex(SteinboundsError):
    """Iterated difference operators require distinct indices."""


class ArityTooLarge(SteinboundsError):
    """Operation requires 2^n work and n exceeds the supported limit."""


class FixedArityFunctional(SteinboundsError):
    """Deletion operators need a variable-length functional."""


class IndexOutOfRange(SteinboundsError):
    """Coordinate index outside the configuration."""


class LengthMismatch(SteinboundsError):
    """Configurations passed to a coordinate-wise operation differ in length."""


class DimensionMismatch(SteinboundsError):
    """Spatial dimension of points does not match the shape or grid."""


class EmptyConfiguration(SteinboundsError):
    """Operation needs at least one point."""


class TooFewPoints(SteinboundsError):
    """Operation needs more points than were supplied."""


class TooFewSamples(SteinboundsError):
    """Sample too small for the requested statistic."""


class NonpositiveValue(SteinboundsError):
    """Log-log rate fitting needs strictly positive values."""


class DegenerateVariance(SteinboundsError):
    """Estimated variance indistinguishable from zero; bounds undefined."""


class AsymmetricFunctional(SteinboundsError):
    """Operation requires a functional with the symmetric flag set."""


class ConfigError(SteinboundsError):
    """Bad CLI configuration (unknown id, unparsable file, invalid value)."""

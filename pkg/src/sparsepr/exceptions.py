"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid parameters or malformed input data."""


class GuardError(RuntimeError):
    """A desk-scale guard or enumeration cap was exceeded."""


class SamplingError(RuntimeError):
    """Rejection sampling failed to produce an acceptable draw."""

"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems -> 2, numerical
failures -> 3, I/O failures -> 4.
"""


class RiservibError(Exception):
    """Base class for package-specific failures."""


class ValidationError(RiservibError):
    """Invalid input data or configuration."""


class ConfigError(ValidationError):
    """Malformed or inconsistent pipeline configuration."""


class NumericalError(RiservibError):
    """A numerical procedure failed or produced unusable output."""


class DegenerateCurrentError(NumericalError):
    """Current profile carries no usable signal (all zero / empty)."""


class DegenerateSignalError(NumericalError):
    """Time series has no variance where variance is required."""


class UnobservableModesError(NumericalError):
    """Sensor/mode geometry too ill-conditioned for reconstruction."""


class DivergentSimulationError(NumericalError):
    """Time integration blew up (displacement beyond the stability guard)."""

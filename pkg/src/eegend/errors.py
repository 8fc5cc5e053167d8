"""Exception types shared across the package.

The CLI maps each class to a distinct exit status.
"""


class EegendError(Exception):
    """Base class for all package errors."""


class ConfigError(EegendError, ValueError):
    """Invalid or inconsistent configuration."""


class DataError(EegendError, ValueError):
    """Malformed, missing or inconsistent input data."""


class ConvergenceError(EegendError, RuntimeError):
    """An iterative solver hit its iteration cap before converging."""

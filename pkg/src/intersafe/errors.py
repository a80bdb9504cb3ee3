"""Exception hierarchy; the CLI maps each category to a distinct exit code."""


class IntersafeError(Exception):
    """Base class for all package errors."""


class ConfigError(IntersafeError):
    """Invalid configuration (intersection geometry, parameters, run config)."""


class DataError(IntersafeError):
    """Malformed or inconsistent input data."""


class ComputationError(IntersafeError):
    """A computation could not be carried out (degenerate statistics, etc.)."""

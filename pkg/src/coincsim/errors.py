"""Exception types used across the package."""


class CoincSimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CoincSimError):
    """A configuration value or combination of values is invalid."""


class DataFormatError(CoincSimError):
    """An input time-tag file is malformed or violates stream invariants."""


class UndefinedEstimateError(CoincSimError):
    """An estimator was asked for a quantity its inputs cannot define."""

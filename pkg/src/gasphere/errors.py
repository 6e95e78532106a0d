"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """An integration or evaluation produced non-finite or unusable values."""


class ConfigError(ValueError):
    """A run configuration is malformed or violates a precondition."""

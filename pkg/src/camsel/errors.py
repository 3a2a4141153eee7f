"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration, schema, or parameter value is invalid."""


class ScheduleError(ConfigError):
    """A perspective-shift schedule references unknown cameras or groups."""


class GenerationError(RuntimeError):
    """World generation could not satisfy its constraints."""


class NumericError(RuntimeError):
    """A numerical routine produced a non-finite iterate."""

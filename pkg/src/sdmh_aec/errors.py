"""Exception types shared across the package."""


class AecError(Exception):
    """Base class for all errors raised by this package."""


class SizeError(AecError, ValueError):
    """An array had the wrong length for the configured frame/band layout."""


class InputError(AecError, ValueError):
    """Signal data was unusable (non-finite, mismatched, malformed)."""


class ConfigError(AecError, ValueError):
    """A configuration value is outside its allowed range."""

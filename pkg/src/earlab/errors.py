class ConfigError(ValueError):
    """Malformed problem/algorithm descriptor or experiment config."""


class InvariantError(RuntimeError):
    """An internal consistency check failed."""

"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad run configuration or CLI usage (exit code 1)."""


class DataFormatError(ValueError):
    """Malformed input data file (exit code 2)."""


class SchemaError(ValueError):
    """Feature schema mismatch between matrices or models."""

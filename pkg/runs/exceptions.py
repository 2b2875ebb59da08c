class RunConfigError(ValueError):
    """Unreadable or invalid run configuration."""

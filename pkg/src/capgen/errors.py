"""Exceptions shared by the front ends."""


class ConfigError(ValueError):
    """A configuration file, template or referenced resource is unusable."""


class InputError(ValueError):
    """Caller-supplied input (task description, diagnostics) is unusable."""

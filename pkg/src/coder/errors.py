"""Shared exception types."""


class CoderError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(CoderError):
    """Invalid or missing configuration; raised before any side effects."""

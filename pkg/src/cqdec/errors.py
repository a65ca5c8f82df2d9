"""Exception hierarchy shared by all cqdec modules."""


class CqdecError(Exception):
    """Base class for all package errors."""


class ValidationError(CqdecError):
    """Input violates a documented precondition (bad matrix, bad distribution, ...)."""


class ResourceBudgetError(CqdecError):
    """A computation would exceed a configured enumeration or dimension budget."""

    def __init__(self, message: str, reason: str = "budget"):
        super().__init__(message)
        self.reason = reason


class ConfigError(CqdecError):
    """A config or description file could not be parsed or contains unknown keys."""

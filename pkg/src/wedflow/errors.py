"""Exception hierarchy shared across the package."""


class WedflowError(Exception):
    """Base class for all package errors."""


class ConfigurationError(WedflowError):
    """Invalid or inconsistent user-supplied configuration."""


class EvaluationError(WedflowError):
    """A functional or operator evaluation produced NaN/Inf."""


class NumericalError(WedflowError):
    """A numerical procedure (Newton, line search, linear solve) failed."""

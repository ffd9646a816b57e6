"""Exception hierarchy shared by every module."""


class FracDynError(Exception):
    """Base class for all package errors."""


class DomainError(FracDynError, ValueError):
    """An argument lies outside the domain of a function."""


class SingularityError(FracDynError):
    """Evaluation point falls inside the epsilon ball around the observed time."""

    def __init__(self, message, s=None, index=None):
        super().__init__(message)
        self.s = s
        self.index = index


class NonFiniteError(FracDynError, ArithmeticError):
    """A computation produced NaN or Inf.

    ``step`` is the index of the first offending step (or node), and
    ``partial`` holds whatever was computed before it, when available.
    """

    def __init__(self, message, step=None, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial


class MetricError(FracDynError):
    """Metric tensor is not symmetric positive definite."""


class ConfigError(FracDynError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field

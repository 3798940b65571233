"""Exception types raised across the package."""


class EdcsMatchError(Exception):
    pass


class SizeLimitExceeded(EdcsMatchError):
    """An exact solver was asked to handle an instance beyond its configured limit."""


class EnumerationLimitExceeded(EdcsMatchError):
    pass


class NonIntegralWeight(EdcsMatchError):
    pass


class DuplicateEdge(EdcsMatchError):
    pass


class InvalidGraph(EdcsMatchError):
    pass


class InvalidFractionalMatching(EdcsMatchError):
    pass


class WeightBelowMinimum(EdcsMatchError):
    pass


class InfeasibleParams(EdcsMatchError):
    pass


class InvariantViolation(EdcsMatchError):
    """A hard run invariant failed. Carries the offending quantities in ``details``."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class ParseError(EdcsMatchError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

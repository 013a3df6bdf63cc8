"""Exception hierarchy shared by every module."""


class QsampleError(Exception):
    """Base class for all package errors."""


class ValidationError(QsampleError, ValueError):
    """An input violates a documented precondition."""


class ParseError(ValidationError):
    """An edge-list document is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlgorithmFailure(QsampleError):
    """A randomized routine exhausted its budget without a verdict."""

"""Exception types shared across the toolkit."""


class EmbiasError(Exception):
    """Base class for all toolkit errors."""


class FormatError(EmbiasError):
    """A file does not conform to its declared format.

    Carries the 1-based line number when the offending line is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(EmbiasError):
    """An input violates a documented contract."""


class OovFloorError(ValidationError):
    """Out-of-vocabulary filtering left a list below its minimum size."""

    def __init__(self, message: str, dropped: dict[str, list[str]]):
        super().__init__(message)
        self.dropped = dropped


class DegenerateVectorError(EmbiasError):
    """A zero-norm vector where a direction is required."""

    def __init__(self, message: str, token: str | None = None):
        if token is not None:
            message = f"{message} (token: {token!r})"
        super().__init__(message)
        self.token = token


class DegenerateTestError(EmbiasError):
    """Association scores have zero variance; the test cannot distinguish targets."""

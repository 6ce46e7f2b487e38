"""Exception hierarchy shared by every module.

Each family carries the process exit code the CLI reports for it.
"""


class YieldCurveError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


# Parse / input family (exit 2)

class ConfigError(YieldCurveError):
    exit_code = 2


class ParseError(YieldCurveError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateQuarterError(ParseError):
    def __init__(self, quarter: str, first_line: int, second_line: int):
        self.quarter = quarter
        self.first_line = first_line
        self.second_line = second_line
        super().__init__(
            f"duplicate quarter {quarter} (lines {first_line} and {second_line})"
        )


class ValidationError(YieldCurveError):
    exit_code = 2


class SeriesFileError(YieldCurveError):
    """Wraps an ingest failure with the file it came from; keeps the cause's exit code."""

    def __init__(self, path: str, cause: YieldCurveError):
        self.path = path
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"{path}: {cause}")


# Alignment family (exit 3)

class AlignmentError(YieldCurveError):
    exit_code = 3


class SeriesLookupError(AlignmentError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


# Estimation family (exit 4)

class EstimationError(YieldCurveError):
    exit_code = 4


class DomainError(EstimationError, ValueError):
    pass


class SingularMatrixError(EstimationError):
    def __init__(self, message: str, pivot: int | None = None):
        self.pivot = pivot
        super().__init__(message)


class InsufficientDataError(EstimationError):
    pass


class DegenerateDataError(EstimationError):
    pass


class SeparationError(EstimationError):
    pass


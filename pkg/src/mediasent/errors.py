"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MediasentError(Exception):
    exit_code = 2


class UsageError(MediasentError):
    exit_code = 1


class DataError(MediasentError):
    """Input data is malformed, misaligned or out of range."""

    exit_code = 2


class BatchFormatError(DataError):
    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class QuerySyntaxError(DataError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class NumericError(MediasentError):
    """A numerical procedure cannot produce a defined result."""

    exit_code = 3


class RankDeficiencyError(NumericError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("design matrix is rank deficient; collinear columns: "
                         + ", ".join(self.columns))


class StageError(MediasentError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)
        super().__init__(f"stage '{stage}' failed: {cause}")

class LocalPHError(Exception):
    """Base class for errors raised by localph."""

    exit_code = 1


class ParameterError(LocalPHError, ValueError):
    exit_code = 2


class DataIntegrityError(LocalPHError):
    exit_code = 4


class CloudParseError(DataIntegrityError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

"""Exception hierarchy shared by every module."""


class WSDError(Exception):
    """Base class for all errors raised by this package."""


class CorpusParseError(WSDError):
    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyCorpusError(WSDError):
    pass


class DuplicateIdError(WSDError):
    pass


class InsufficientDataError(WSDError):
    def __init__(self, sense: str, available: int, requested: int):
        self.sense = sense
        self.available = available
        self.requested = requested
        super().__init__(
            f"sense {sense!r} has {available} instances, {requested} requested"
        )


class InvalidWindowError(WSDError):
    pass


class TrainingError(WSDError):
    pass


class UnknownSenseError(WSDError):
    pass


class ModelFormatError(WSDError):
    """Base for problems reading a serialized model or manifest."""


class ModelVersionError(ModelFormatError):
    pass


class ModelTruncatedError(ModelFormatError):
    pass


class ModelChecksumError(ModelFormatError):
    pass


class ContaminationError(WSDError):
    """Training and held-out data share instances."""


class EvaluationError(WSDError):
    pass


class ConfigError(WSDError):
    pass

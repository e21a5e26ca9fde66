class QmlError(Exception):
    """Base class for every error raised by the toolkit."""
    exit_status = 1


class DimensionError(QmlError, ValueError):
    pass


class NormalizationError(QmlError, ValueError):
    pass


class SingularTimeError(QmlError, ArithmeticError):
    """Raised when the master-equation coefficients have no finite value."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ThresholdDomainError(SingularTimeError):
    pass


class ConditioningError(QmlError, ValueError):
    pass


class EmptyResultError(QmlError, ValueError):
    pass


class GridError(QmlError, ValueError):
    pass


class FormatError(QmlError, ValueError):
    pass


class DataError(QmlError, ValueError):
    pass


class ScheduleError(QmlError, ValueError):
    pass


class ValidationError(QmlError, ValueError):
    exit_status = 3


class OutputError(QmlError, OSError):
    pass

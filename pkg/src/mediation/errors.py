"""Exception hierarchy. The CLI maps each family to an exit code."""


class MediationError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(MediationError, ValueError):
    exit_code = 2


class DataError(MediationError, ValueError):
    exit_code = 3


class NumericalError(MediationError, ArithmeticError):
    exit_code = 4


class RankDeficiencyError(NumericalError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class SeparationError(NumericalError):
    """Logistic separation or a monotone Cox partial likelihood."""


class ConvergenceError(NumericalError):
    pass


class CholeskyError(NumericalError):
    pass


class BootstrapFailure(NumericalError):
    pass

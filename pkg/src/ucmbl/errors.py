"""Exception hierarchy shared across the package."""


class UCMError(Exception):
    """Base class for all errors raised by ucmbl."""


class NotPSD(UCMError):
    pass


class DegenerateC22(UCMError):
    pass


class ZeroLambda(UCMError):
    pass


class CflViolation(UCMError):
    pass


class CompatibilityViolation(UCMError):
    pass


class NonFiniteState(UCMError):
    def __init__(self, message, step=None, t=None):
        super().__init__(message)
        self.step = step
        self.t = t


class SigmaTooLarge(UCMError):
    pass


class DegenerateMap(UCMError):
    pass


class InsufficientSnapshots(UCMError):
    pass


class ParseError(UCMError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(UCMError):
    """Scenario data violate a standing assumption. ``failures`` lists each one."""

    def __init__(self, failures):
        if isinstance(failures, str):
            failures = [failures]
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))

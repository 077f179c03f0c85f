"""Exception types raised across the package."""


class Gr24Error(Exception):
    """Base class for all errors raised by gr24."""


class InvalidParameter(Gr24Error, ValueError):
    pass


class OutOfRange(Gr24Error, ValueError):
    pass


class RankDeficient(Gr24Error, ValueError):
    pass


class MalformedPointSet(Gr24Error, ValueError):
    pass


class DivergentSeries(Gr24Error, ArithmeticError):
    pass


class SlowConvergence(Gr24Error, ArithmeticError):
    """The series did not reach the requested tolerance within its term cap."""

    def __init__(self, message, partial=None, error=None):
        super().__init__(message)
        self.partial = partial
        self.error = error


class QuadratureFailure(Gr24Error, ArithmeticError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class Singular(Gr24Error, ArithmeticError):
    pass


class DegenerateStep(Gr24Error, RuntimeError):
    pass


class RejectionBudgetExceeded(Gr24Error, RuntimeError):
    pass

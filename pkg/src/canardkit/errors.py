"""Exception hierarchy.

Every error raised by the library derives from :class:`CanardError`.  The
three intermediate classes map onto CLI exit codes: input problems (2),
failed computations (3) and computations that ran but produced nothing (4).
"""

from __future__ import annotations


class CanardError(Exception):
    exit_code = 3


class InputError(CanardError):
    exit_code = 2


class ComputationError(CanardError):
    exit_code = 3


class NoResult(CanardError):
    exit_code = 4


# -- expression language -------------------------------------------------


class ParseError(InputError):
    def __init__(self, message: str, text: str = "", position: int = -1):
        self.text = text
        self.position = position
        if position >= 0:
            message = f"{message} at position {position}"
        super().__init__(message)


class UnknownIdentifier(ParseError):
    pass


class ModelFileError(InputError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


# -- evaluation and algebra ----------------------------------------------


class PoleAtPoint(ComputationError, ZeroDivisionError):
    pass


class NegativeRadicand(ComputationError, ValueError):
    pass


class SqrtPresent(ComputationError):
    pass


class NotRational(ComputationError):
    pass


class NotPolynomial(ComputationError):
    pass


class InexactDeflation(ComputationError):
    pass


class ZeroLeadingCoefficient(ComputationError):
    pass


# -- series / cancellation -----------------------------------------------


class NonlinearUnknown(ComputationError):
    pass


class NotAffine(NonlinearUnknown):
    pass


class NoSolution(NoResult):
    pass


class NoCancellation(NoResult):
    pass


# -- iteration ----------------------------------------------------------


class DegreeTooHigh(ComputationError):
    pass


class BranchInvalid(InputError):
    pass


class SeedDependsOnParameter(ComputationError):
    pass


class NoSingularityInBracket(NoResult):
    pass


class MultipleRootsAmbiguous(ComputationError):
    pass


class ExpressionBudgetExceeded(ComputationError):
    def __init__(self, message: str, last_good=None):
        self.last_good = last_good
        super().__init__(message)


class NoCollision(NoResult):
    pass


# -- numerical ODE lab ---------------------------------------------------


class StepFloorReached(ComputationError):
    pass


class NonFiniteState(ComputationError):
    pass


class NoReturns(NoResult):
    def __init__(self, message: str, fixed_point=None, parameter=None):
        self.fixed_point = fixed_point
        self.parameter = parameter
        super().__init__(message)


class NotConverged(ComputationError):
    def __init__(self, message: str, stats=None, parameter=None):
        self.stats = stats
        self.parameter = parameter
        super().__init__(message)


class SameClassAtEndpoints(NoResult):
    pass

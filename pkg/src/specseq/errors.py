"""Exception taxonomy shared by the library and the command-line driver.

Every exception carries the process exit code the CLI reports for it, so the
mapping from failures to exit statuses lives in one place.
"""


class SpecSeqError(Exception):
    exit_code = 1


class SchemaError(SpecSeqError, ValueError):
    exit_code = 2


class UnknownSpec(SchemaError):
    pass


class FiltrationError(SchemaError):
    """A filtered complex violates injectivity or commutation."""


# -- algebra -----------------------------------------------------------------

class AlgebraError(SpecSeqError, ValueError):
    """A hypothesis about group data failed; signals bad input upstream."""

    exit_code = 3


class NoSolution(AlgebraError):
    pass


class DenominatorNotContained(AlgebraError):
    pass


class NotWellDefined(AlgebraError):
    pass


class ChainConditionViolated(AlgebraError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IsoNotInvertible(AlgebraError):
    pass


class SquareDoesNotCommute(AlgebraError):
    pass


class NotAnticommuting(AlgebraError):
    pass


class CoupleNotExact(AlgebraError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or []


class WellDefinednessFailure(AlgebraError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BoundViolated(AlgebraError):
    pass


class NotStableIndex(SpecSeqError, ValueError):
    exit_code = 4


# -- inference ---------------------------------------------------------------

class Underdetermined(SpecSeqError):
    exit_code = 5

    def __init__(self, message, unresolved=(), partial=None):
        super().__init__(message)
        self.unresolved = tuple(unresolved)
        self.partial = partial or {}


class Inconsistent(SpecSeqError):
    exit_code = 6

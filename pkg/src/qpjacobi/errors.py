"""Exception types shared across the package."""


class QPError(Exception):
    """Base class for all library errors."""


class DomainError(QPError, ValueError):
    pass


class PrecisionExhausted(QPError):
    """Continued-fraction expansion ran out of working precision.

    ``partial`` holds the expansion computed up to that point.
    """

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class Overflow(QPError, OverflowError):
    pass


class WindowTooLarge(QPError):
    pass


class WindowTooSmall(QPError):
    pass


class Unclassifiable(QPError, ValueError):
    pass


class SingularStep(QPError):
    """A vanishing off-diagonal weight blocks an A-type product.

    ``index`` is the lattice site, ``D`` the D-matrix that is still defined.
    """

    def __init__(self, msg, index=None, D=None):
        super().__init__(msg)
        self.index = index
        self.D = D


class DegenerateDiagonalization(QPError):
    pass


class ZeroInWindow(QPError):
    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class ExactZeroTerm(QPError):
    pass


class NoQualifyingDenominator(QPError):
    pass


class PreconditionViolation(QPError):
    pass


class RangeTooShort(QPError):
    pass


class NotConverged(QPError):
    def __init__(self, msg, values=None, gap=None):
        super().__init__(msg)
        self.values = values
        self.gap = gap


class BudgetExceeded(QPError):
    pass


class NonAnalyticInput(QPError):
    pass


class EmptyLevelSet(QPError):
    def __init__(self, msg, max_value=None):
        super().__init__(msg)
        self.max_value = max_value


class NotFound(QPError):
    def __init__(self, msg, window=None, best=None):
        super().__init__(msg)
        self.window = window
        self.best = best


class DegenerateZeros(QPError):
    pass


class LeakageExceeded(QPError):
    def __init__(self, msg, snapshots=None):
        super().__init__(msg)
        self.snapshots = snapshots


class GridTooCoarse(QPError):
    pass


class ConfigInvalid(QPError):
    def __init__(self, msg, field=None, line=None):
        super().__init__(msg)
        self.field = field
        self.line = line

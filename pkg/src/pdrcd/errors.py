"""Exception types raised across the package."""


class RCDError(Exception):
    """Base class for all errors raised by pdrcd."""


class MatrixError(RCDError, ValueError):
    pass


class DuplicateEntry(MatrixError):
    pass


class ExplicitZero(MatrixError):
    pass


class IndexOutOfRange(MatrixError, IndexError):
    pass


class ZeroColumn(MatrixError):
    pass


class MalformedLine(MatrixError):
    def __init__(self, lineno, reason):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


class EmptyFile(MatrixError):
    pass


class UnsupportedLoss(RCDError, TypeError):
    pass


class SamplingError(RCDError, ValueError):
    pass


class ZeroSize(SamplingError):
    pass


class NonpositiveWeight(SamplingError):
    pass


class ImproperSampling(SamplingError):
    pass


class DimensionMismatch(RCDError, ValueError):
    pass


class BadEpsilon(RCDError, ValueError):
    pass


class InfeasibleAlpha(RCDError, ValueError):
    pass


class CannotAvoidZeroRow(InfeasibleAlpha):
    pass


class ZeroRowOrColumn(RCDError, ValueError):
    pass


class BoundViolated(RCDError, AssertionError):
    pass


class TooLarge(RCDError, ValueError):
    pass

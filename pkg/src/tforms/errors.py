"""Exception hierarchy for tforms.

Every failure raised by the library derives from :class:`TformsError`, so
callers (and the command line front end) can catch one type.
"""


class TformsError(Exception):
    """Base class for all library errors."""


# linear algebra
class NotHermitian(TformsError):
    pass


class NoConvergence(TformsError):
    pass


class EigenvalueAtThreshold(TformsError):
    pass


class SpectrumOnCut(TformsError):
    pass


class ContourTooTight(TformsError):
    pass


class SingularShift(TformsError):
    pass


class KernelPresent(TformsError):
    pass


# fields
class SpaceMismatch(TformsError):
    pass


class DimMismatch(TformsError):
    pass


class GridHitsZero(TformsError):
    pass


class ValidationError(TformsError):
    """Invalid input data; ``field`` names the offending entry when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class UndeclaredZeroSuspected(ValidationError):
    pass


class GermUndetermined(TformsError):
    """Germ data of a symbolic result cannot be derived from the operands."""


class ParseError(TformsError):
    def __init__(self, message, line=1, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


# torsion category
class EmptyWindow(TformsError):
    pass


# forms
class NotInjectiveDense(TformsError):
    pass


class Degenerate(TformsError):
    pass


class NoSplitting(TformsError):
    pass


class JointlySingular(TformsError):
    pass


class ContourFailure(TformsError):
    pass


class SmallnessUnreachable(TformsError):
    pass


class ZeroEigenvalueFiber(TformsError):
    pass


class NotBlockDefinite(TformsError):
    pass


class SpectrumNotPositive(TformsError):
    pass


class NotConverging(TformsError):
    pass


class NegativityDetected(TformsError):
    pass


class HypothesisViolated(TformsError):
    pass

"""Exception hierarchy shared by every tscale module."""


class TimeScaleError(Exception):
    """Base class for all tscale errors."""


class EmptyScale(TimeScaleError):
    pass


class MalformedSegment(TimeScaleError):
    pass


class PointNotInScale(TimeScaleError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"point {t!r} is not in the time scale")


class ReversedRange(TimeScaleError):
    pass


class DomainViolation(TimeScaleError):
    pass


class DerivativeDiverged(TimeScaleError):
    pass


class QuadratureNonConvergent(TimeScaleError):
    pass


class EvaluationError(TimeScaleError):
    """A function could not be evaluated (log of a non-positive value, overflow, NaN...)."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"evaluation failed at t={t!r}")


class MissingTableValue(EvaluationError):
    pass


class DenseTableError(TimeScaleError):
    """A table-backed function was asked for values on a dense segment it does not define."""


class BoundsViolated(TimeScaleError):
    pass


class ShapeError(TimeScaleError):
    pass


class InvalidBase(TimeScaleError):
    pass


class DenseSegmentPresent(TimeScaleError):
    pass


class NotAViolation(TimeScaleError):
    pass


class ExprSyntaxError(TimeScaleError):
    """Parse failure. ``offset`` is a byte offset into the UTF-8 encoded text."""

    def __init__(self, offset, expected, message=None):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(message or f"syntax error at byte {offset}: expected one of {exp}")


class UnknownIdentifier(TimeScaleError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at byte {offset}")


class SpecError(TimeScaleError):
    pass

"""Domain errors.

Every error raised by the library derives from :class:`LagCurvesError`. The
command line maps each subclass to its class name, which is the documented
error string.
"""


class LagCurvesError(Exception):
    """Base class for domain errors."""

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class NotSymplectic(LagCurvesError):
    pass


class OutOfRange(LagCurvesError):
    pass


class OrderTooHigh(LagCurvesError):
    pass


class InsufficientOrder(LagCurvesError):
    pass


class NotLagrangian(LagCurvesError):
    pass


class OrientationViolation(LagCurvesError):
    pass


class InflectionPoint(LagCurvesError):
    pass


class FrameCompletionFailed(LagCurvesError):
    pass


class SectionNotTransverse(LagCurvesError):
    pass


class ProfileSingularity(LagCurvesError):
    pass


class StepRejected(LagCurvesError):
    pass


class NotFull(LagCurvesError):
    pass


class InvalidParameters(LagCurvesError):
    pass


class UnsupportedCase(LagCurvesError):
    pass


class NotClosed(LagCurvesError):
    pass


class CurvatureWindowViolated(LagCurvesError):
    pass


class EmptyBranch(LagCurvesError):
    pass


class NotArcLength(LagCurvesError):
    pass


class VariationNotAdmissible(LagCurvesError):
    pass


class LagrangianViolated(LagCurvesError):
    pass


class SmoothnessInsufficient(LagCurvesError):
    pass


class ParseError(LagCurvesError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column

    def to_dict(self):
        d = super().to_dict()
        d["line"] = self.line
        d["column"] = self.column
        return d


class IoError(LagCurvesError):
    pass

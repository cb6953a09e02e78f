"""Exception hierarchy.

Every error carries a short machine-readable ``tag`` and the process exit code
the command-line front end maps it to.
"""


class MarError(Exception):
    tag = "MarError"
    exit_code = 1

    def __init__(self, message="", **context):
        super().__init__(message)
        self.context = context


class ModelError(MarError, ValueError):
    """Invalid model specification (exit code 2)."""
    exit_code = 2


class DataError(MarError, ValueError):
    """Problem with the input data or the requested window (exit code 3)."""
    exit_code = 3


class NumericError(MarError, ArithmeticError):
    """A numerical procedure failed (exit code 4)."""
    exit_code = 4


class NonStationary(ModelError):
    """An inverse root lies on or outside the stability region."""
    tag = "NonStationary"


class DegenerateOrder(ModelError):
    """The highest-order coefficient of a polynomial is zero."""
    tag = "DegenerateOrder"


class DegenerateDecomposition(ModelError):
    """Partial fractions need p >= 1 and q >= 1."""
    tag = "DegenerateDecomposition"


class NonCauchyInnovation(ModelError):
    """Operation is only defined for Cauchy innovations."""
    tag = "NonCauchyInnovation"


class InvalidInnovation(ModelError):
    """Innovation parameters are out of range."""
    tag = "InvalidInnovation"


class UnsupportedOrder(ModelError):
    """Operation is not available for this (p, q)."""
    tag = "UnsupportedOrder"


class WindowTooSmall(DataError):
    """The coefficient window is too short for the request."""
    tag = "WindowTooSmall"


class SeriesTooShort(DataError):
    """The series is too short for the filters involved."""
    tag = "SeriesTooShort"


class WindowOutOfRange(DataError):
    """The requested window leaves the sample."""
    tag = "WindowOutOfRange"


class ZeroFocalValue(DataError):
    """Cannot normalise by a zero observation."""
    tag = "ZeroFocalValue"


class TooFewEvents(DataError):
    """The conditioning event occurs too rarely."""
    tag = "TooFewEvents"


class ParseError(DataError):
    """A line of the input file could not be parsed."""
    tag = "ParseError"


class EmptyFile(DataError):
    """The input file holds no observations."""
    tag = "EmptyFile"


class ZeroRatio(DataError):
    """An observed growth ratio is zero."""
    tag = "ZeroRatio"


class AllZeroCoefficients(NumericError):
    """No nonzero moving-average coefficient in the window."""
    tag = "AllZeroCoefficients"


class ZeroPivot(NumericError):
    """The pivot coefficient c_j is zero."""
    tag = "ZeroPivot"


class OneSidedDegenerate(NumericError):
    """One side of the coefficient sequence carries no mass."""
    tag = "OneSidedDegenerate"


class NoMaximum(NumericError):
    """The coefficient sequence has no interior maximum in the window."""
    tag = "NoMaximum"


class DegenerateVariance(NumericError):
    """A Bernoulli indicator has zero variance."""
    tag = "DegenerateVariance"


class EmptyConditioningSet(NumericError):
    """The conditioning event has probability zero."""
    tag = "EmptyConditioningSet"


class NotConverged(NumericError):
    """The optimiser did not converge."""
    tag = "NotConverged"


class BoundaryEstimate(NumericError):
    """An estimate sits at the edge of the parameter box."""
    tag = "BoundaryEstimate"


class SingularInformation(NumericError):
    """The observed information is not positive definite."""
    tag = "SingularInformation"


class NonFinite(NumericError):
    """A likelihood evaluation overflowed."""
    tag = "NonFinite"

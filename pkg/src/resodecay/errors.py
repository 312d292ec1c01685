"""Exception hierarchy shared by every module of the package."""


class ResodecayError(Exception):
    """Base class for all package errors."""


# quadrature
class NonConvergence(ResodecayError):
    """An iterative procedure exhausted its budget before meeting tolerance."""


class NonFiniteIntegrand(ResodecayError, FloatingPointError):
    pass


class TailBoundExceeded(ResodecayError):
    pass


class PoleOnAxis(ResodecayError, ValueError):
    pass


class StrategyUnavailable(ResodecayError):
    pass


# hardy / smatrix / gamow
class EvalAtPole(ResodecayError, ZeroDivisionError):
    pass


class WrongClass(ResodecayError, ValueError):
    pass


class RadiusTooLarge(ResodecayError):
    pass


class DecayOrderTooLow(ResodecayError, ValueError):
    pass


class NegativeTime(ResodecayError, ValueError):
    pass


class NonNegativeTime(ResodecayError, ValueError):
    pass


# decay / simulate
class BadParams(ResodecayError, ValueError):
    pass


class BadWeights(ResodecayError, ValueError):
    pass


class BadWindow(ResodecayError, ValueError):
    pass


class BadEdges(ResodecayError, ValueError):
    pass


class EnvelopeViolation(ResodecayError):
    pass


class TooFewEvents(ResodecayError, ValueError):
    pass


# fit
class FitError(ResodecayError):
    pass


class DegenerateData(FitError, ValueError):
    pass


class BoundaryStuck(FitError):
    pass


class FitNonConvergence(FitError, NonConvergence):
    pass


class UnconvergedInput(FitError, ValueError):
    pass


# cli / io
class InvalidInput(ResodecayError, ValueError):
    """A data or configuration file is missing, empty or malformed."""

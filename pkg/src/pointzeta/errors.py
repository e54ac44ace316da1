"""Exception hierarchy shared by all modules."""


class PointZetaError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PointZetaError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class PoleError(DomainError):
    """The argument sits on (or too close to) a pole."""


class BesselOverflowError(PointZetaError, OverflowError):
    """A Bessel value exceeds the double-precision range."""


class QuadratureError(PointZetaError, RuntimeError):
    """Adaptive integration did not reach the requested tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IntegrandNaNError(QuadratureError):
    """The integrand returned NaN at some node."""

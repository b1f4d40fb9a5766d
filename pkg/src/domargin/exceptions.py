"""Exception types raised by the analysis routines."""


class DomarginError(Exception):
    """Base class for all analysis errors."""


class RateOnPole(DomarginError):
    """A pole of the shifted transfer function lies on the imaginary axis."""


class PointOnCurve(DomarginError):
    """The query point is (numerically) on the Nyquist curve."""


class NonIntegerWinding(DomarginError):
    """Accumulated argument is not close to a multiple of 2*pi."""


class EigOnLine(DomarginError):
    """An eigenvalue of A has real part equal to -lambda."""


class InertiaMismatch(DomarginError):
    """The requested dominance degree is inconsistent with the spectrum."""

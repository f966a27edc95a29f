"""Shared exception types."""


class CyckpError(Exception):
    """Base class for package errors."""


class DivisionByZero(CyckpError, ZeroDivisionError):
    """Zero denominator or division by the zero rational function."""


class SingularMatrix(CyckpError):
    """Matrix inverse requested for a singular matrix."""


class ShapeMismatch(CyckpError):
    """Operands live over incompatible m, d or scalar backends."""


class DepthExhausted(CyckpError):
    """A truncated product has no valid coefficients left."""


class NotUnitriangular(CyckpError):
    """Inversion requested for an element not of the form 1 + (lower order)."""


class DegeneratePoint(CyckpError):
    """Position data with colliding nu^m values or a zero coordinate."""


class UnsupportedObservable(CyckpError):
    """A bracket was asked for a function outside the trace-word grammar."""


class IllConditioned(CyckpError):
    """Spectral data too close to degenerate for a float computation."""


class StepRejected(CyckpError):
    """A numerical integration step produced non-finite values."""

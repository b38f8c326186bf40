"""Exception types raised across the package."""


class NonConvergenceError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions above tolerance."""

    def __init__(self, message, value=None, abs_error=None):
        super().__init__(message)
        self.value = value
        self.abs_error = abs_error


class EvaluationError(ArithmeticError):
    """An integrand returned NaN or an infinity."""


class OutOfRangeError(IndexError):
    """A window or index falls outside a stored sequence window."""


class DegenerateDenominatorError(ValueError):
    """Too many grid points have a vanishing Cotlar denominator."""


class ScanExhaustedError(RuntimeError):
    """No base satisfied a dominance condition within the scan limit."""


class FitDegenerateError(ValueError):
    """Too few points to fit a growth exponent."""

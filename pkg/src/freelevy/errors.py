"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): validation
problems with the inputs, and numerical failures of an otherwise valid
computation.
"""


class FreeLevyError(Exception):
    """Base class for all package errors."""


class ValidationError(FreeLevyError, ValueError):
    """Input violates a documented precondition."""


class NumericalError(FreeLevyError, ArithmeticError):
    """A numerical procedure failed on valid input."""


class FlavorMismatch(ValidationError):
    pass


class OrderTooLarge(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class NotRepresentable(ValidationError):
    pass


class OutOfCarrier(ValidationError):
    pass


class DegenerateCell(ValidationError):
    pass


class ZeroLaw(ValidationError):
    pass


class NotInvertible(ValidationError):
    pass


class NotIntegrable(ValidationError):
    pass


class MissingMoments(ValidationError):
    pass


class NegativeLawInPositiveMode(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class SizeMismatch(ValidationError):
    pass


class DivergentIntegral(NumericalError):
    pass


class QuadratureBudgetExceeded(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

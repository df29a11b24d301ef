"""
Exception hierarchy for the Markov-Krein numerics library
"""


class MKreinError(Exception):
    """Base class for every error raised by this package"""


class InvalidArgument(MKreinError, ValueError):
    """A precondition on an argument does not hold"""


class InvalidMeasure(InvalidArgument):
    """Atoms or weights cannot form a probability measure"""


class SingularEvaluation(MKreinError, ArithmeticError):
    """A transform was evaluated at a point of the support"""


class DegenerateSpectrum(MKreinError, ValueError):
    """Coincident atoms where a closed form needs distinct ones"""


class NumericalError(MKreinError, ArithmeticError):
    """A numerical procedure failed to deliver the requested accuracy"""


class NonConvergence(NumericalError):
    """Adaptive refinement ran out of its evaluation budget"""

    def __init__(self, message: str, partial_value: complex = None, abs_error_estimate: float = None):
        super().__init__(message)
        self.partial_value = partial_value
        self.abs_error_estimate = abs_error_estimate


class NonFiniteSample(NumericalError):
    """An integrand returned inf or nan on the contour"""

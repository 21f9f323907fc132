"""Error taxonomy shared by the library and the command line.

The CLI maps these onto exit codes: usage/domain problems exit with 2,
bad input files with 3 and numerical failures with 4.
"""


class HazardPotentialError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HazardPotentialError, ValueError):
    """An argument lies outside the domain of the operation."""


class DataError(HazardPotentialError, ValueError):
    """Input data (marker files, posterior artifacts) is malformed."""


class NumericError(HazardPotentialError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    Attributes
    ----------
    estimate : float or None
        The partial result available when the procedure gave up.
    error : float or None
        The error estimate achieved for ``estimate``.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error

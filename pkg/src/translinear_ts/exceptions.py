"""Exception hierarchy.

Argument and domain problems subclass :class:`ValueError` so they behave like
ordinary bad-input errors; numerical failures subclass :class:`EstimationError`.
"""


class TranslinearError(Exception):
    """Base class for all package errors."""


class DomainError(TranslinearError, ValueError):
    """Input outside the domain of a transformed-linear operation."""


class ArgumentError(TranslinearError, ValueError):
    """Invalid argument (count, scale, parameter range)."""


class EstimationError(TranslinearError, RuntimeError):
    """Not enough data, or a numerical procedure could not produce an estimate."""


class SingularityError(EstimationError):
    """A Toeplitz system or the innovations recursion became singular."""

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class ConvergenceError(EstimationError):
    """Innovations coefficients did not settle."""

    def __init__(self, message, delta=None):
        super().__init__(message)
        self.delta = delta


class DecompositionError(EstimationError):
    """Completely positive factorization did not reach tolerance."""


class DataIOError(TranslinearError, OSError):
    """A file could not be read, parsed or written."""

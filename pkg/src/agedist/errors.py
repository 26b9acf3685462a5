"""Exception hierarchy shared by every module of the package."""


class AgedistError(Exception):
    """Base class for all errors raised by agedist."""


class ParameterError(AgedistError, ValueError):
    """An argument is outside the domain of the operation."""


class DegenerateSourceError(ParameterError):
    """The truncated source has (numerically) zero probability mass."""


class IntegrationError(AgedistError, ArithmeticError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverError(AgedistError, RuntimeError):
    """The code-length solver exhausted its iteration budget.

    ``best`` holds the best iterate found (a length vector) and ``residual``
    the last relative objective change.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DegenerateCodeError(AgedistError, ValueError):
    """The mean cycle length E[L + Z] is zero, so the age is 0/0."""

"""Exception hierarchy shared by every module."""


class GeomError(Exception):
    """Base class for all errors raised by geomlearn."""


class ValidationError(GeomError, ValueError):
    """Malformed input: wrong shape, asymmetric matrix, unknown label, bad parameter."""


class NumericalError(GeomError, ArithmeticError):
    """A computation left its numerically valid range."""


class DomainError(NumericalError):
    """Input outside the domain of a matrix function (e.g. not positive definite)."""

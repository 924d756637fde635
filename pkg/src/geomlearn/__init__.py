"""Geometric learning toolkit: SPD geometry, kernels, RKHS distances, Markov kernels."""
from .errors import DomainError, GeomError, NumericalError, ValidationError

__version__ = "0.1.0"

__all__ = ["GeomError", "ValidationError", "NumericalError", "DomainError", "__version__"]

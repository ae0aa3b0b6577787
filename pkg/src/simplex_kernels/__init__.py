"""Orthogonal polynomial kernels on the simplex and positive-definite sequences."""

__version__ = "0.1.0"

from .numkit import DomainError

__all__ = ["DomainError", "__version__"]

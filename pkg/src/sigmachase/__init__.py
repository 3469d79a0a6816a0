"""Finite-algebra verification engine for point classes, 3x3 lemmas and Baer sums."""

from .algebra import AlgebraError, FiniteAlgebra, Homomorphism, Kind, make_homomorphism, validate_algebra

__all__ = ["AlgebraError", "FiniteAlgebra", "Homomorphism", "Kind", "make_homomorphism", "validate_algebra"]
__version__ = "0.1.0"

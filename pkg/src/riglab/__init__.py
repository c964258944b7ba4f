"""Numerical laboratory for rigidity sequences and Mobius disjointness."""

from .arith import density_Dj, in_Dj, max_prime_volume, prime_volume, sieve_signs
from .diophantine import QuadraticSurd, cf_expand, parse_alpha

__all__ = [
    "QuadraticSurd",
    "cf_expand",
    "density_Dj",
    "in_Dj",
    "max_prime_volume",
    "parse_alpha",
    "prime_volume",
    "sieve_signs",
]

"""Special values of automorphic Green's functions on hyperbolic 3-space."""

__version__ = "0.1.0"

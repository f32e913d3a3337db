"""Rank-2 filtered (phi, N, Gal(F/K), E)-modules: construction, classification and admissibility."""

__version__ = "0.1.0"

"""Exact invariants of projective, conformal and Weyl structures in coordinates."""

__version__ = "0.1.0"

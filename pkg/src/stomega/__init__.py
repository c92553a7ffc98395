"""Finite-field verification of symplectic Sharbly complexes and Steinberg modules."""
__version__ = "0.1.0"

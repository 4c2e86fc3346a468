"""Numerical laboratory for singular quasiperiodic Jacobi operators."""
__version__ = "0.1.0"

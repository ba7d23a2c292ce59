"""Moments of characteristic polynomials of GUE and chiral GUE random matrices."""

__version__ = "0.1.0"

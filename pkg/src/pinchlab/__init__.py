"""Numerical experiments on almost-extremal hypersurfaces of Euclidean space."""

__version__ = "0.1.0"

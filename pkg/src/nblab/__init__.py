"""Numerical laboratory for Nyman-Beurling type approximation problems."""
__version__ = "0.1.0"

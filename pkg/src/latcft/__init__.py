"""Numerical laboratory for lattice free-fermion conformal field theory."""

__version__ = "0.1.0"

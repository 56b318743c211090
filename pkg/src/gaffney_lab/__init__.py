"""Numerical laboratory for Gaffney-type inequalities under generalized boundary conditions."""

__version__ = "0.1.0"

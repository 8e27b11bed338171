"""Solvers for heterogeneous multi-resource allocation with subset demand requests."""

__version__ = "0.1.0"

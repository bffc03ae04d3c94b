"""Finite-scale machinery for infinite-dimensional Ellentuck spaces over uniform barriers."""

__version__ = "0.1.0"

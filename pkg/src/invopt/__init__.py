"""Least-squares inverse combinatorial optimization with a margin."""

__version__ = "0.1.0"

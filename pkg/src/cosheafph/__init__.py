"""Distributed persistent homology of Rips filtrations over covers with a path nerve."""

__version__ = "0.1.0"

"""Concatenated coding toolkit for insertion/deletion/substitution channels."""

__version__ = "0.1.0"

"""Soft-linked electricity and hydrogen/heat investment planning."""

__version__ = "0.1.0"

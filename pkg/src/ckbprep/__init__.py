"""Preprocessing and evaluation tools for Sorani Kurdish <-> English machine translation."""

__version__ = "0.1.0"

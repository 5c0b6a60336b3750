"""Brunn-Minkowski verification on nilpotent Lie groups with certified box arithmetic."""

__version__ = "0.1.0"

"""Density bounds and empirical frame checks for derivative and bunched sampling of bandlimited functions."""

__version__ = "0.1.0"

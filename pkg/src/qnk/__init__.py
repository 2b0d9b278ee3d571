"""Median subdivision, quasi-normal classification and flat approximation of surfaces."""

__version__ = "0.1.0"

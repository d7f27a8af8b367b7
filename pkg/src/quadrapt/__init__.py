"""Quadratic points of surfaces: cubic forms, web/line-field indices, portraits."""

__version__ = "0.1.0"

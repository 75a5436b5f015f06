"""Procedural generation of underground-garage layouts on integer grids."""

__version__ = "0.1.0"

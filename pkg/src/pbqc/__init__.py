"""Simulation toolkit for position-based quantum cryptography protocols and coalition attacks."""
__version__ = "0.1.0"

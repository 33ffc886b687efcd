"""Rotor walks on rooted trees."""
__version__ = "0.1.0"

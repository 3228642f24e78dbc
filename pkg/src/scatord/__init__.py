"""Scattered ordered spaces: ordinals, derivatives, invariants, classification."""

__version__ = "0.1.0"

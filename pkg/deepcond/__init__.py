"""Conditioning analysis of deep random networks via dual activations."""
__version__ = "0.1.0"

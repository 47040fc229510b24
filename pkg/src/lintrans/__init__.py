"""Linearized polynomial transitions over finite field towers and permutation-polynomial checks."""

__version__ = "0.1.0"

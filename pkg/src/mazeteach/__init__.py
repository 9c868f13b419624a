"""Entropy-guided demonstration selection for 2D maze learning-from-demonstration."""

__version__ = "0.1.0"

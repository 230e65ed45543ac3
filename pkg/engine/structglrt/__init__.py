"""Adaptive GLRT detection of structured signals in low-rank interference."""

__version__ = "0.1.0"

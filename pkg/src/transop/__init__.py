"""Generalized translation operators: kernels, transforms, smoothness and compactness."""

__version__ = "0.1.0"

"""Learned image compression with rate-distortion-computation evaluation."""

__version__ = "0.1.0"

"""Wavelet high-frequency adapters for frozen transformer encoders, at desk scale."""

__version__ = "0.1.0"

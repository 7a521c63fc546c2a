"""Unified mixed-modality fish feeding intensity assessment."""

__version__ = "0.1.0"

"""Dashcam driver-behavior evaluation and coaching pipeline."""

__version__ = "0.1.0"

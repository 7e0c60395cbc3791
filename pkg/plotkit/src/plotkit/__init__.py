"""Render carhmm CLI outputs into figures.

This package only reads the documented CSV/JSON files the carhmm tool
writes; it computes no statistics of its own, and the core package never
depends on it.
"""

__version__ = "0.1.0"

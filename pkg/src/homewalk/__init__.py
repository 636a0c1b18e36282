"""Guided random walk search on the integer grid: simulator, sweep strategy and threshold bounds."""

__version__ = "0.1.0"

"""Convergence analysis for positive-term series, including the second-ratio family."""

__version__ = "0.1.0"

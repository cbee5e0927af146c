"""Exact experiments on off-training-set error and the NFL theorem."""

__version__ = "0.1.0"

"""Bayesian Specification Curve Analysis."""

__version__ = "0.1.0"

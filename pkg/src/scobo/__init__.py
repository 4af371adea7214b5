"""Batch Bayesian optimization by sampling, discrepancy computation and design optimization."""

__version__ = "0.1.0"

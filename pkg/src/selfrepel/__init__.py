"""Exact, transfer-matrix and Monte Carlo tools for self-repelling Gibbs random walks."""

__version__ = "0.1.0"

"""Simulation and sparse reconstruction for comb-based optical undersampling spectrum measurement."""

__version__ = "0.1.0"

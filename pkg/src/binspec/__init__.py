"""Binned quantum phase estimation: classical post-processing, randomized
eigenvalue counting and a sub-circuit run-time model."""

__version__ = "0.1.0"

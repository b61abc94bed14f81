"""Simulation and verification laboratory for eigenvalue particle systems."""

__version__ = "0.1.0"

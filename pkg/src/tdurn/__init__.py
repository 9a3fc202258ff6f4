"""Simulation and verification toolkit for the time-dependent Polya urn."""

__version__ = "0.1.0"

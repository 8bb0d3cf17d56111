"""Simulation and exact distributions for birth-death mutation models."""

__version__ = "0.1.0"

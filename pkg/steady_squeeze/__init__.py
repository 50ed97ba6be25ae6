"""Steady-state perturbation theory and spin squeezing for dissipative emitter ensembles."""

__version__ = "0.1.0"

"""Configuration package for the steady-state toolkit."""

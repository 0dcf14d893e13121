"""Atom Rates - radiative rates and relaxation of two-level atoms near a mirror."""

__version__ = "0.1.0"

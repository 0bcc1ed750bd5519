"""Fock-space simulation and calibration of doped coupled-cavity waveguide gates."""

__version__ = "0.1.0"

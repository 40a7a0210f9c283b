"""Particle-hole conjugation and symmetry on finite fermionic Fock spaces."""

__version__ = "0.1.0"

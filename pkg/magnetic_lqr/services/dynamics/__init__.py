"""Orbit, dipole field and spacecraft linearization."""

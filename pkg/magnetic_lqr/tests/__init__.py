"""
Test suite for the magnetic LQR design pipeline.

Covers the spacecraft model, the symplectic machinery, the Riccati
solvers, closed-loop simulation and the command-line surface.
"""

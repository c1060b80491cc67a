"""Structured matrices, the Riccati pencil and ordered Schur forms."""

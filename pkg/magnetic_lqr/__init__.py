"""
Periodic LQR design for magnetically actuated spacecraft.
"""

__version__ = "1.0.0"

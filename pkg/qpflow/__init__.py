"""
qpflow - power-series solver for quasi-polynomial ODE systems
"""

__version__ = "1.0.0"

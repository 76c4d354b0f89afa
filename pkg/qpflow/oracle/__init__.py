"""
Literal combinatorial formulas used to check the series engine
"""

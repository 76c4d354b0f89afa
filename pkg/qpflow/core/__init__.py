"""
QP and Lotka-Volterra system types and the transforms between them
"""

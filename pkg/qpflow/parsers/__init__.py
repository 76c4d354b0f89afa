"""Text format for QP systems"""

"""
Series engine, reference integrator and file output
"""

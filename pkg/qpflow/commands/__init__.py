"""CLI subcommands: solve, canonicalize, verify, tensor, coeffs"""

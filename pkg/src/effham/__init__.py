"""Effective Hamiltonians of 1-D viscous Hamilton-Jacobi equations in sampled environments."""

__version__ = "0.1.0"

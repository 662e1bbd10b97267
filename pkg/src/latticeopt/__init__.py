"""Exact lattice-point counting, short rational generating functions, Graver
bases, and nonlinear integer optimization over polyhedra."""

__version__ = "0.1.0"

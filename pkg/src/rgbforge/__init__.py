"""Exact computations with S-graphs, relative graded Brauer graph algebras,
their Koszul duals and glued Ginzburg-type presentations."""

__version__ = "0.1.0"

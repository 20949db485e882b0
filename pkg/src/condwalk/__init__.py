"""Exact and Monte Carlo tools for integer random walks conditioned to stay non-negative."""

from .errors import CondwalkError
from .steplaw import LatticePath, LatticePmf, StepLaw, load_law, make_builtin_law, walk_pmf

__all__ = ["CondwalkError", "LatticePath", "LatticePmf", "StepLaw", "load_law", "make_builtin_law", "walk_pmf"]
__version__ = "0.1.0"

"""Exact computations on flat surfaces and the Teichmüller rays they generate.

Coordinates live in Q(sqrt d) (see :mod:`flatlab.numberfield`); only the
quasiconformal sampling in :mod:`flatlab.qc` works in floating point.
"""

from .numberfield import QuadExt, parse_literal
from .surface import FlatSurface, load_surface, parse_surface, validate

__all__ = ["QuadExt", "parse_literal", "FlatSurface", "load_surface", "parse_surface", "validate"]
__version__ = "0.1.0"

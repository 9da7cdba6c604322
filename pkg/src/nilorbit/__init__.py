"""Exact linear-algebra models of square-zero nilpotent orbits in sp(2k) and their PGL(2) reductions."""

from .numkernel import EXACT, FLOAT, Mat
from .sympcore import NilpotentElement, SymplecticSpace
from .momentgeo import MomentPoint
from .redmodel import PPrimePoint, ReductionPoint

__all__ = [
    "EXACT",
    "FLOAT",
    "Mat",
    "MomentPoint",
    "NilpotentElement",
    "PPrimePoint",
    "ReductionPoint",
    "SymplecticSpace",
]
__version__ = "0.1.0"

"""Fractional laminar cut families built from the LP metric."""

from .ball import ball_cuts, quantize
from .intlam2 import IntLam2Stats, RedBlueGraph, integer_lam2
from .lam2 import inclusion_invariant_preprocess, lam2
from .uncross import lam1, uncross_cscp

__all__ = ["IntLam2Stats", "RedBlueGraph", "ball_cuts", "inclusion_invariant_preprocess", "integer_lam2",
           "lam1", "lam2", "quantize", "uncross_cscp"]

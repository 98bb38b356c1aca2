"""Deterministic rounding of fractional laminar families."""

from .common import (InfeasibleFamily, MetaNodeHistory, WorkingFamily, cut_inclusion_order, depth,
                     innermost_slice)
from .round1 import round1
from .round2 import EdgeClass, Round2Stats, round2

__all__ = ["EdgeClass", "InfeasibleFamily", "MetaNodeHistory", "Round2Stats", "WorkingFamily",
           "cut_inclusion_order", "depth", "innermost_slice", "round1", "round2"]

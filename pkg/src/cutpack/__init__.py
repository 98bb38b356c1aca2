"""Cut packing: LP, laminar families, rounding and an exact oracle."""

from .generators import clique_chain, random_instance, random_laminar_family
from .instance import (Cut, FractionalLaminarFamily, Graph, Instance, InstanceError, IntegralCutFamily,
                       InvariantError, Mode, WeightedCut, load_vector, verify_fractional_feasible,
                       verify_integral_solution)
from .lp import MetricSolution, solve_mcp_lp
from .oracle import BudgetExceeded, OracleResult, brute_force_opt, check_guarantee
from .pipeline import PipelineResult, solve

__all__ = [
    "BudgetExceeded", "Cut", "FractionalLaminarFamily", "Graph", "Instance", "InstanceError",
    "IntegralCutFamily", "InvariantError", "MetricSolution", "Mode", "OracleResult", "PipelineResult",
    "WeightedCut", "brute_force_opt", "check_guarantee", "clique_chain", "load_vector", "random_instance",
    "random_laminar_family", "solve", "solve_mcp_lp", "verify_fractional_feasible", "verify_integral_solution",
]

"""End-to-end solver: LP, laminar family, rounding, verification."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .instance import (FractionalLaminarFamily, Instance, InstanceError, IntegralCutFamily, InvariantError, Mode,
                       load_vector, verify_fractional_feasible)
from .io import SolutionFile
from .laminar.lam2 import lam2
from .laminar.uncross import lam1
from .lp import MetricSolution, solve_mcp_lp
from .oracle import GuaranteeReport, check_guarantee
from .rounding.round1 import round1
from .rounding.round2 import round2

DEFAULT_GRID = 4


@dataclass
class PipelineResult:
    instance: Instance
    mode: Mode
    grid: int | None
    metric: MetricSolution
    family: FractionalLaminarFamily
    chat: list[int]  # max(1, ceil(lam * c_e))
    working: list[int]  # integral capacities handed to the rounder
    cuts: IntegralCutFamily
    loads: list[int]
    guarantee: GuaranteeReport
    times_ms: dict[str, float] = field(default_factory=dict)

    @property
    def lam(self) -> Fraction:
        return self.metric.lam

    @property
    def ok(self) -> bool:
        return self.guarantee.ok

    def solution(self) -> SolutionFile:
        edges = self.instance.graph.edges
        return SolutionFile(
            mode=self.mode,
            grid=self.grid,
            lam=self.lam,
            cuts=self.cuts,
            loads=[(u, v, l) for (u, v, _), l in zip(edges, self.loads)],
            bound=self.guarantee.bound,
            violations=[{"edge": e, "u": edges[e][0], "v": edges[e][1], "load": l, "allowed": a}
                        for e, l, a in self.guarantee.violations],
        )


def capacity_hat(lam: Fraction, capacities) -> list[int]:
    return [max(1, ceil(lam * c)) for c in capacities]


def as_mode(instance: Instance, mode: Mode | str | None) -> Instance:
    """The instance to solve under ``mode``; a sink is dropped for multiway."""
    if mode in (None, "auto"):
        return instance
    mode = Mode(mode)
    if mode is Mode.CSCP and instance.sink is None:
        raise InstanceError("common-sink mode needs an instance with a sink")
    if mode is Mode.MCP and instance.sink is not None:
        return Instance(instance.graph, instance.commodities)
    return instance


def solve(instance: Instance, mode: Mode | str | None = None, grid: int | None = None) -> PipelineResult:
    """Run the full pipeline.

    Common-sink instances go through Lam-1 and Round-1 with working
    capacities ``ceil(lam c_e + 1/N)``; multiway ones through Lam-2 with grid
    ``D`` and Round-2 with ``ceil(8 lam c_e + 4/D)``.  The guarantee is
    checked against ``c_hat = max(1, ceil(lam c_e))``.
    """
    instance = as_mode(instance, mode)
    mode = instance.mode
    caps = instance.graph.capacities
    times = {}
    t0 = time.perf_counter()
    metric = solve_mcp_lp(instance)
    times["lp"] = (time.perf_counter() - t0) * 1000
    lam = metric.lam

    t0 = time.perf_counter()
    if mode is Mode.CSCP:
        big_n = instance.n * instance.k
        family = lam1(instance, metric, big_n)
        frac_caps = [lam * c + Fraction(1, big_n) for c in caps]
        working = [max(1, ceil(x)) for x in frac_caps]
        grid = None
    else:
        grid = grid or DEFAULT_GRID
        if grid < 4 or grid % 2:
            raise InstanceError(f"grid must be an even integer >= 4, got {grid}")
        family = lam2(instance, metric, grid)
        frac_caps = [4 * (2 * lam * c + Fraction(1, grid)) for c in caps]
        working = [ceil(x) for x in frac_caps]
    times["laminar"] = (time.perf_counter() - t0) * 1000

    rep = verify_fractional_feasible(family, instance, frac_caps, mode)
    if not rep.ok:
        raise InvariantError(f"laminar family infeasible ({rep.clause}): {rep.detail}")

    t0 = time.perf_counter()
    cuts = round1(instance, working, family) if mode is Mode.CSCP else round2(instance, working, family)
    times["round"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    chat = capacity_hat(lam, caps)
    guarantee = check_guarantee(cuts, instance, chat, mode)
    times["verify"] = (time.perf_counter() - t0) * 1000
    loads = load_vector(cuts, instance.graph)
    return PipelineResult(instance, mode, grid, metric, family, chat, working, cuts, loads, guarantee, times)

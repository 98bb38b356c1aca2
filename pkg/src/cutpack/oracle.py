"""Exact brute-force optimum over partition-form solutions, and the
guarantee checker used on pipeline output."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod
from typing import Sequence

from .instance import Cut, Instance, IntegralCutFamily, Mode, Report, verify_integral_solution

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    """The search would exceed its node budget."""


@dataclass
class OracleResult:
    optimal_max_relative_load: Fraction
    witness: IntegralCutFamily
    nodes: int = 0
    # per-commodity side masks behind the witness
    colorings: list[list[int]] = field(default_factory=list)


@dataclass
class _Option:
    edges: int  # boundary edge bitmask
    sides: tuple[int, ...]  # vertex mask per terminal of the commodity


def _options(instance: Instance, a: int, budget: int) -> list[_Option]:
    graph = instance.graph
    n = graph.num_vertices
    verts = instance.commodities[a]
    free = [v for v in range(n) if v not in verts]
    count = len(verts) ** len(free)
    if count > budget:
        raise BudgetExceeded(f"commodity {a} has {count} colorings, budget is {budget}")
    pinned = {v: s for s, v in enumerate(verts)}
    seen: dict[int, _Option] = {}
    for combo in product(range(len(verts)), repeat=len(free)):
        color = dict(pinned)
        color.update(zip(free, combo))
        edges = 0
        for e, (u, v, _) in enumerate(graph.edges):
            if color[u] != color[v]:
                edges |= 1 << e
        if edges not in seen:
            sides = [0] * len(verts)
            for v, s in color.items():
                sides[s] |= 1 << v
            seen[edges] = _Option(edges, tuple(sides))
    masks = sorted(seen, key=lambda m: (bin(m).count("1"), m))
    # a boundary containing another one can never do better
    kept: list[int] = []
    for m in masks:
        if not any(k & m == k for k in kept):
            kept.append(m)
    return [seen[m] for m in kept]


class _Search:
    def __init__(self, caps: Sequence[int], options: list[list[_Option]], twins: list[int], budget: int):
        self.caps = caps
        self.options = options
        self.twins = twins  # twins[a] = earlier identical commodity or -1
        self.budget = budget
        self.nodes = 0

    def feasible(self, limit: Sequence[int]) -> list[int] | None:
        """Option index per commodity with every edge load within ``limit``."""
        k = len(self.options)
        m = len(limit)
        load = [0] * m
        full = 0
        for e in range(m):
            if limit[e] <= 0:
                full |= 1 << e
        choice = [-1] * k

        def rec(full: int) -> bool:
            self.nodes += 1
            if self.nodes > self.budget:
                raise BudgetExceeded(f"search exceeded {self.budget} nodes")
            best = None
            best_opts = None
            for a in range(k):
                if choice[a] >= 0:
                    continue
                lo = choice[self.twins[a]] if self.twins[a] >= 0 and choice[self.twins[a]] >= 0 else 0
                opts = [j for j in range(lo, len(self.options[a])) if not self.options[a][j].edges & full]
                if not opts:
                    return False
                if best is None or len(opts) < len(best_opts):
                    best, best_opts = a, opts
            if best is None:
                return True
            for j in best_opts:
                em = self.options[best][j].edges
                newly = 0
                e = 0
                mm = em
                while mm:
                    if mm & 1:
                        load[e] += 1
                        if load[e] >= limit[e]:
                            newly |= 1 << e
                    mm >>= 1
                    e += 1
                choice[best] = j
                if rec(full | newly):
                    return True
                choice[best] = -1
                e = 0
                mm = em
                while mm:
                    if mm & 1:
                        load[e] -= 1
                    mm >>= 1
                    e += 1
            return False

        return list(choice) if rec(full) else None


def brute_force_opt(instance: Instance, budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Minimum over per-commodity vertex colorings of ``max_e load_e / c_e``.

    A coloring puts each terminal of a commodity on its own side and every
    other vertex on one of those sides; an edge gains one unit of load per
    commodity whose coloring separates its endpoints.  ``budget`` caps both
    the colorings enumerated per commodity and the search nodes.
    """
    graph = instance.graph
    caps = graph.capacities
    options = [_options(instance, a, budget) for a in range(instance.k)]
    twins = []
    for a, verts in enumerate(instance.commodities):
        twin = -1
        for b in range(a - 1, -1, -1):
            if set(instance.commodities[b]) == set(verts):
                twin = b
                break
        twins.append(twin)
    search = _Search(caps, options, twins, budget)

    k = instance.k
    ratios = sorted({Fraction(q, c) for c in set(caps) for q in range(0, k + 1)})
    lo, hi = 0, len(ratios) - 1
    found = search.feasible([k] * graph.m)
    if found is None:  # pragma: no cover - loads never exceed k
        raise RuntimeError("oracle found no coloring at all")
    best = (ratios[hi], found)
    while lo < hi:
        mid = (lo + hi) // 2
        rho = ratios[mid]
        limit = [int(rho * c) for c in caps]
        got = search.feasible(limit)
        if got is None:
            lo = mid + 1
        else:
            hi = mid
            best = (rho, got)
    choice = best[1]
    # report the exact value reached by the chosen coloring
    load = [0] * graph.m
    for a, j in enumerate(choice):
        em = options[a][j].edges
        for e in range(graph.m):
            if em >> e & 1:
                load[e] += 1
    value = max((Fraction(l, c) for l, c in zip(load, caps)), default=Fraction(0))

    n = graph.num_vertices
    cuts = {}
    colorings = []
    cut_ids = {t.id for t in instance.cut_terminals()}
    for a, j in enumerate(choice):
        sides = options[a][j].sides
        colorings.append(list(sides))
        for t, side in zip(instance.commodity_terminals(a), sides):
            if t.id in cut_ids:
                cuts[t.id] = Cut(side, n)
    log.debug("oracle: optimum %s after %d nodes", value, search.nodes)
    return OracleResult(value, IntegralCutFamily(cuts), search.nodes, colorings)


def search_size(instance: Instance) -> int:
    """``prod_a |S_a| ** (n - |S_a|)``, the raw coloring space."""
    n = instance.n
    return prod(len(c) ** (n - len(c)) for c in instance.commodities)


@dataclass
class GuaranteeReport:
    ok: bool
    bound: str
    violations: list[tuple[int, int, int]]  # (edge, load, allowed)
    max_slack: int
    integral: Report | None = None


def load_bound(chat: int, mode: Mode) -> int:
    return 8 * chat + 4 if mode is Mode.MCP else chat + 2


def check_guarantee(result: IntegralCutFamily, instance: Instance, capacities: Sequence[int],
                    mode: Mode | None = None) -> GuaranteeReport:
    """Compare per-edge loads against ``8c+4`` (multiway) or ``c+2``
    (common sink) for the integral capacities ``capacities``."""
    mode = mode or instance.mode
    rep = verify_integral_solution(result, instance, mode)
    loads = rep.loads if rep.ok else _raw_loads(result, instance)
    violations = []
    slack = None
    for e, (l, c) in enumerate(zip(loads, capacities)):
        allowed = load_bound(c, mode)
        if l > allowed:
            violations.append((e, l, allowed))
        slack = allowed - l if slack is None else min(slack, allowed - l)
    return GuaranteeReport(rep.ok and not violations, "8c+4" if mode is Mode.MCP else "c+2",
                           violations, slack or 0, rep)


def _raw_loads(result: IntegralCutFamily, instance: Instance) -> list[int]:
    out = [0] * instance.graph.m
    for cut in result.assignment.values():
        for e, (u, v, _) in enumerate(instance.graph.edges):
            if (cut.mask >> u & 1) != (cut.mask >> v & 1):
                out[e] += 1
    return out

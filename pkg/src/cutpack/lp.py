"""The cut-packing LP: minimise the relative load ``lam`` over edge lengths.

Variables are ``lam`` and one length ``d[a][e]`` per commodity and edge.
Every commodity needs each path between two of its terminals to have length
at least 1; those rows are generated lazily from shortest-path violations.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .instance import Graph, Instance
from .simplex import LinearProgram, Sense, Status, dual_of, simplex_solve

log = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class MetricSolution:
    lam: Fraction
    lengths: tuple[tuple[Fraction, ...], ...]  # lengths[a][e]

    def length(self, a: int, e: int) -> Fraction:
        return self.lengths[a][e]

    def as_dict(self) -> dict[tuple[int, int], Fraction]:
        return {(a, e): d for a, row in enumerate(self.lengths) for e, d in enumerate(row)}


@dataclass(frozen=True)
class PathConstraint:
    commodity: int
    source: int
    target: int
    edges: tuple[int, ...]
    length: Fraction


def shortest_paths(graph: Graph, lengths: Sequence[Fraction], source: int, adj=None):
    """Dijkstra from ``source``.  Returns ``(dist, pred_edge)``; unreachable
    vertices get ``None``.  Ties resolve towards smaller vertex ids."""
    adj = adj if adj is not None else graph.adjacency()
    n = graph.num_vertices
    dist: list[Fraction | None] = [None] * n
    pred: list[int] = [-1] * n
    dist[source] = ZERO
    heap = [(ZERO, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, e in adj[u]:
            nd = d + lengths[e]
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                pred[v] = e
                heapq.heappush(heap, (nd, v))
    return dist, pred


def _trace(graph: Graph, pred: list[int], target: int) -> tuple[int, ...]:
    path = []
    v = target
    while pred[v] >= 0:
        e = pred[v]
        path.append(e)
        a, b, _ = graph.edges[e]
        v = a if b == v else b
    return tuple(reversed(path))


def separation_oracle(solution: MetricSolution, instance: Instance, tol: Fraction = ZERO) -> list[PathConstraint]:
    """Every same-commodity terminal pair whose shortest path is shorter than ``1 - tol``."""
    graph = instance.graph
    adj = graph.adjacency()
    out = []
    for a, verts in enumerate(instance.commodities):
        lengths = solution.lengths[a]
        for x, s in enumerate(verts):
            dist, pred = shortest_paths(graph, lengths, s, adj)
            for t in verts[x + 1:]:
                if dist[t] is not None and dist[t] < 1 - tol:
                    out.append(PathConstraint(a, s, t, _trace(graph, pred, t), dist[t]))
    return out


def build_lp(instance: Instance, paths: Sequence[PathConstraint],
             upper_bounds: bool = False) -> tuple[LinearProgram, dict[tuple[int, int], int]]:
    """Variable 0 is ``lam``; lengths get variables only where some path row
    uses them (any other length is 0 at an optimum).  Returns the program and
    the ``(commodity, edge) -> variable`` map."""
    graph = instance.graph
    caps = graph.capacities
    var: dict[tuple[int, int], int] = {}
    for p in paths:
        for e in p.edges:
            var.setdefault((p.commodity, e), 0)
    for idx, key in enumerate(sorted(var), start=1):
        var[key] = idx
    lp = LinearProgram(1 + len(var), objective={0: ONE})
    if upper_bounds:
        lp.upper = [None] + [ONE] * len(var)
    by_edge: dict[int, list[int]] = {}
    for (a, e), j in var.items():
        by_edge.setdefault(e, []).append(j)
    for e in sorted(by_edge):
        row = {j: ONE for j in by_edge[e]}
        row[0] = -Fraction(caps[e])
        lp.add_row(row, Sense.LE, 0)
    for p in paths:
        lp.add_row({var[(p.commodity, e)]: ONE for e in p.edges}, Sense.GE, 1)
    return lp, var


def solve_mcp_lp(instance: Instance, tol: Fraction = ZERO, max_rounds: int = 500) -> MetricSolution:
    """Optimal ``lam`` and lengths by row generation.

    The ``d <= 1`` bounds are not materialised: clipping any optimal length
    vector at 1 keeps every path row satisfied and does not raise ``lam``, so
    the clipped vector is returned instead.  Each restricted program is
    solved through its dual, a packing LP whose origin is feasible, and the
    lengths are read off the dual's shadow prices.
    """
    graph = instance.graph
    m, k = graph.m, instance.k
    paths: list[PathConstraint] = []
    seen: set[tuple[int, tuple[int, ...]]] = set()
    sol = MetricSolution(ZERO, tuple(tuple([ZERO] * m) for _ in range(k)))
    adj = graph.adjacency()
    for rnd in range(max_rounds):
        new = separation_oracle(sol, instance, tol)
        new += [q for p in new if (q := _detour(graph, adj, sol, p, tol)) is not None]
        fresh = []
        for p in new:
            key = (p.commodity, p.edges)
            if key not in seen:
                seen.add(key)
                fresh.append(p)
        if not new:
            log.debug("lp converged after %d rounds with %d path rows", rnd, len(paths))
            return sol
        if not fresh:
            raise LPError("separation returned only known rows; LP solution inconsistent")
        paths.extend(fresh)
        lp, var = build_lp(instance, paths)
        x = _solve_via_dual(lp)
        lengths = [[ZERO] * m for _ in range(k)]
        for (a, e), j in var.items():
            lengths[a][e] = min(ONE, x[j])
        sol = MetricSolution(x[0], tuple(tuple(r) for r in lengths))
    raise LPError(f"row generation did not converge in {max_rounds} rounds")


def _detour(graph: Graph, adj, sol: MetricSolution, p: PathConstraint, tol: Fraction) -> PathConstraint | None:
    """Shortest path between the ends of ``p`` once ``p``'s own edges are
    pushed to length 1, if it is still violated.  Adding it alongside ``p``
    cuts the number of generation rounds roughly in half."""
    lengths = list(sol.lengths[p.commodity])
    for e in p.edges:
        lengths[e] = ONE
    dist, pred = shortest_paths(graph, lengths, p.source, adj)
    if dist[p.target] is None:
        return None
    edges = _trace(graph, pred, p.target)
    true = sum((sol.lengths[p.commodity][e] for e in edges), ZERO)
    if true >= 1 - tol:
        return None
    return PathConstraint(p.commodity, p.source, p.target, edges, true)


def _solve_via_dual(lp: LinearProgram) -> list[Fraction]:
    res = simplex_solve(dual_of(lp))
    if res.status is not Status.OPTIMAL:
        raise LPError(f"dual LP reported {res.status.value}; the formulation is always feasible and bounded")
    x = res.duals
    for i, row in enumerate(lp.rows):
        lhs = sum((c * x[j] for j, c in row.coeffs.items()), ZERO)
        if (lhs < row.rhs) if row.sense is Sense.GE else (lhs > row.rhs):
            raise LPError(f"recovered primal point violates row {i}")
    if any(v < 0 for v in x) or x[0] != res.objective:
        raise LPError("recovered primal point is not optimal")
    return x

"""Round-2: multiway rounding with additive load 3."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..instance import (Cut, FractionalLaminarFamily, Instance, IntegralCutFamily, InvariantError, Mode,
                        verify_fractional_feasible)
from ..laminar.lam2 import inclusion_invariant_preprocess
from .common import InfeasibleFamily, MetaNodeHistory, WorkingFamily, integral_loads

log = logging.getLogger(__name__)


class EdgeClass(enum.IntEnum):
    """Edge classes in the order an edge may pass through them."""

    X_MINUS = 0
    X0 = 1
    X1 = 2
    Y = 3
    Z = 4


@dataclass
class Round2Stats:
    defaults: int = 0
    classes: dict[int, EdgeClass] = field(default_factory=dict)


@dataclass
class RoundState:
    remaining: list[int]
    work: WorkingFamily
    meta: MetaNodeHistory
    assigned: dict[int, int] = field(default_factory=dict)
    cls: list[EdgeClass] = field(default_factory=list)
    z_entry: dict[int, int] = field(default_factory=dict)


def _classify(prev: EdgeClass, a: int, f: Fraction, c: int) -> EdgeClass:
    if prev is EdgeClass.Z or f == 0:
        return EdgeClass.Z
    if prev is EdgeClass.Y or a >= c + 2:
        return EdgeClass.Y
    if a <= c - 1:
        return EdgeClass.X_MINUS
    return EdgeClass.X0 if a == c else EdgeClass.X1


def _pick(state: RoundState, roots) -> int:
    work = state.work
    depths = {t: work.depth(roots[t]) for t in state.remaining}
    top = max(depths.values())
    cands = [t for t in state.remaining if depths[t] == top]
    outer = {t: work.outer(t) for t in cands}

    def dominates(i: int, j: int) -> bool:
        oi, oj = outer[i], outer[j]
        if oi == oj:
            return i < j
        return oi & ~oj == 0

    free = [i for i in cands if not any(j != i and dominates(j, i) for j in cands)]
    if not free:
        raise InvariantError("cut-inclusion order has no undominated terminal")
    return min(free)


def round2(instance: Instance, capacities: Sequence[int], family: FractionalLaminarFamily,
           check: bool = True, stats: Round2Stats | None = None) -> IntegralCutFamily:
    """Round a fractional laminar multiway family; loads end at most three
    above ``capacities``.

    The family is first made to satisfy the inclusion invariant.  Terminals
    then go by maximum depth, undominated in the cut-inclusion order, ties by
    id.  A terminal normally takes the meta-node of its vertex; if that
    meta-node touches an overloaded edge it falls back to the meta-node it
    had just before the first overloaded endpoint joined it.  The other
    cuts in the unit chain around the vertex lose that meta-node.
    """
    if instance.sink is not None:
        raise ValueError("round2 expects a multiway instance")
    caps = [int(c) for c in capacities]
    rep = verify_fractional_feasible(family, instance, caps, Mode.MCP)
    if not rep.ok:
        raise InfeasibleFamily(f"input family infeasible ({rep.clause}): {rep.detail}")
    family = inclusion_invariant_preprocess(family)

    graph = instance.graph
    n = graph.num_vertices
    edges = graph.edges
    roots = family.roots
    state = RoundState(sorted(family.roots), WorkingFamily(family, graph), MetaNodeHistory(n))
    work, meta = state.work, state.meta

    frac = work.loads()
    state.cls = [EdgeClass.X_MINUS] * graph.m
    for e, (u, v, _) in enumerate(edges):
        if frac[e] == 0:
            meta.union(u, v)
            state.cls[e] = EdgeClass.Z
            state.z_entry[e] = 0
    meta.snapshot()
    defaults = 0

    while state.remaining:
        i = _pick(state, roots)
        r = roots[i]
        m_r = meta.members(r)
        o_i = work.outer(i)
        e_i = [e for e, (u, v, _) in enumerate(edges)
               if state.cls[e] is EdgeClass.Y and (m_r >> u & 1) != (m_r >> v & 1)]
        if not e_i:
            a_mask = m_r
        else:
            defaults += 1
            ends = {u if m_r >> u & 1 else v for e in e_i for u, v in [edges[e][:2]]}
            if r in ends:
                raise InvariantError(f"terminal {i} sits on an endpoint of an overloaded edge")
            s = min(meta.joined_at(u, r) for u in ends)
            a_mask = meta.members_at(r, s - 1)
        if not a_mask >> r & 1 or a_mask & ~o_i:
            raise InvariantError(f"cut of terminal {i} is not between its vertex and its outermost cut")
        state.assigned[i] = a_mask
        state.remaining.remove(i)

        k = work.slice(work.chain(r), Fraction(1))
        for p in work.of(i):
            work.remove(p)
        for p in k:
            if p.owner == i:
                continue
            p.mask &= ~m_r
            if not p.mask >> roots[p.owner] & 1:
                raise InvariantError(f"shrinking a cut of terminal {p.owner} dropped its vertex")

        integral = integral_loads(state.assigned.values(), graph)
        frac = work.loads()
        before = state.cls
        now = []
        for e, (u, v, _) in enumerate(edges):
            cl = _classify(before[e], integral[e], frac[e], caps[e])
            now.append(cl)
            if cl is EdgeClass.Z and before[e] is not EdgeClass.Z:
                meta.union(u, v)
                state.z_entry[e] = integral[e]
        meta.snapshot()
        if check:
            _check(state, before, now, integral, frac, caps, a_mask)
        state.cls = now

    if stats is not None:
        stats.defaults = defaults
        stats.classes = dict(enumerate(state.cls))
    log.debug("round2 assigned %d terminals, %d defaults", len(state.assigned), defaults)
    return IntegralCutFamily({t: Cut(m, n) for t, m in sorted(state.assigned.items())})


def _check(state: RoundState, before: list[EdgeClass], now: list[EdgeClass], integral: list[int],
           frac: list[Fraction], caps: list[int], a_mask: int) -> None:
    bad = state.work.problems(state.remaining)
    if bad:
        raise InvariantError("working family broken: " + bad[0])
    edges = state.work.graph.edges
    for e, (u, v, _) in enumerate(edges):
        where = f"edge {e} ({u},{v})"
        cl, c, a, f = now[e], caps[e], integral[e], frac[e]
        if cl < before[e]:
            raise InvariantError(f"{where} moved back from {before[e].name} to {cl.name}")
        if cl is EdgeClass.X_MINUS and a + f > c:
            raise InvariantError(f"{where}: integral {a} + fractional {f} exceeds {c}")
        if cl in (EdgeClass.X0, EdgeClass.X1, EdgeClass.Y) and f > 1:
            raise InvariantError(f"{where}: fractional load {f} above 1 in {cl.name}")
        loaded = (a_mask >> u & 1) != (a_mask >> v & 1)
        if before[e] is EdgeClass.Y and loaded:
            raise InvariantError(f"{where} is overloaded and was loaded again")
        if e in state.z_entry and a > state.z_entry[e] + 1:
            raise InvariantError(f"{where} gained more than one unit after contraction")

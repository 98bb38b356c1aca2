"""Round-1: common-sink rounding with additive load 1."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

from ..instance import (Cut, FractionalLaminarFamily, Instance, IntegralCutFamily, InvariantError, Mode,
                        verify_fractional_feasible)
from .common import InfeasibleFamily, MetaNodeHistory, WorkingFamily, integral_loads

log = logging.getLogger(__name__)


def _contract(work: WorkingFamily, meta: MetaNodeHistory, frac: Sequence[Fraction]) -> None:
    for e, (u, v, _) in enumerate(work.graph.edges):
        if frac[e] == 0:
            meta.union(u, v)


def _check_loads(work: WorkingFamily, caps: Sequence[int], integral: Sequence[int],
                 frac: Sequence[Fraction], frozen: dict[int, int]) -> None:
    for e, (u, v, _) in enumerate(work.graph.edges):
        c, a, f = caps[e], integral[e], frac[e]
        if a <= c - 1:
            ok = a + f <= c
        elif a == c:
            ok = f <= 1
            if ok and f:
                cross = work.crossing(e)
                ok = not any(p.mask >> u & 1 for p in cross) or not any(p.mask >> v & 1 for p in cross)
        elif a == c + 1:
            ok = f == 0
        else:
            ok = False
        if not ok:
            raise InvariantError(f"edge {e} ({u},{v}): integral {a}, fractional {f}, capacity {c}")
        if e in frozen and a != frozen[e]:
            raise InvariantError(f"edge {e} ({u},{v}) gained load after contraction")


def round1(instance: Instance, capacities: Sequence[int], family: FractionalLaminarFamily,
           check: bool = True) -> IntegralCutFamily:
    """Round a fractional laminar common-sink family; loads end at most one
    above ``capacities``.

    Terminals go innermost first (maximum depth, ties by id).  Each takes
    the meta-node of its vertex and pays with the innermost unit of weight
    around it; cuts of other terminals used up that way are replaced by the
    freed cuts of the chosen terminal.
    """
    if instance.sink is None:
        raise ValueError("round1 needs a common-sink instance")
    caps = [int(c) for c in capacities]
    rep = verify_fractional_feasible(family, instance, caps, Mode.CSCP)
    if not rep.ok:
        raise InfeasibleFamily(f"input family infeasible ({rep.clause}): {rep.detail}")

    graph = instance.graph
    n = graph.num_vertices
    sink = instance.sink
    work = WorkingFamily(family, graph)
    meta = MetaNodeHistory(n)
    remaining = sorted(family.roots)
    roots = family.roots
    assigned: dict[int, int] = {}
    frozen: dict[int, int] = {}

    frac = work.loads()
    _contract(work, meta, frac)
    meta.snapshot()
    for e, f in enumerate(frac):
        if f == 0:
            frozen[e] = 0

    while remaining:
        i = max(remaining, key=lambda t: (work.depth(roots[t]), -t))
        a_mask = meta.members(roots[i])
        if a_mask >> sink & 1:
            raise InvariantError(f"meta-node of terminal {i} reached the sink")
        assigned[i] = a_mask
        remaining.remove(i)

        k = work.slice(work.chain(roots[i]), Fraction(1))
        for p in [p for p in k if p.owner == i]:
            work.remove(p)
            k.remove(p)
        for c in k:
            j = c.owner
            if j == i or j not in remaining:
                raise InvariantError(f"cut {c.mask:b} in the unit chain has unexpected owner {j}")
            work.remove(c)
            # pieces of i still present all lie outside the unit chain
            own = [q for q in work.chain(roots[i]) if q.owner == i]
            for p in work.slice(own, c.weight):
                p.owner = j
        if work.of(i):
            raise InvariantError(f"terminal {i} kept fractional weight after reassignment")

        frac = work.loads()
        _contract(work, meta, frac)
        meta.snapshot()
        integral = integral_loads(assigned.values(), graph)
        if check:
            bad = work.problems(remaining, sink)
            if bad:
                raise InvariantError("working family broken: " + bad[0])
            _check_loads(work, caps, integral, frac, frozen)
        for e, f in enumerate(frac):
            if f == 0 and e not in frozen:
                frozen[e] = integral[e]

    log.debug("round1 assigned %d terminals", len(assigned))
    return IntegralCutFamily({t: Cut(m, n) for t, m in sorted(assigned.items())})

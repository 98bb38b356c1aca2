"""Lam-2 for general multiway instances, plus the inclusion-invariant
preprocessing used before Round-2."""

from __future__ import annotations

import logging
from fractions import Fraction

from ..instance import (Cut, FractionalLaminarFamily, Instance, InvariantError, Mode, WeightedCut,
                        crosses, popcount)
from ..lp import MetricSolution
from .ball import ball_cuts, quantize, unit_copies
from .intlam2 import IntLam2Stats, integer_lam2

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)


def default_grid(instance: Instance) -> int:
    """``n * sum_a |S_a|``, rounded up to an even number."""
    d = instance.n * sum(len(c) for c in instance.commodities)
    return d + d % 2


def lam2(instance: Instance, metric: MetricSolution, grid: int | None = None,
         stats: IntLam2Stats | None = None) -> FractionalLaminarFamily:
    """Fractional laminar family for a multiway instance.

    Feasible against capacities ``4 * (2 * lam * c_e + 1/D)`` where ``D`` is
    ``grid`` (default :func:`default_grid`; must be even).  Every commodity is
    copied ``D^2`` times, each copy holding one unit cut per terminal, the
    copies are made laminar together, and each terminal keeps the innermost
    half of its copies at weight ``2/D^2``.
    """
    d = grid or default_grid(instance)
    if d < 2 or d % 2:
        raise ValueError(f"grid must be an even integer >= 2, got {d}")
    d2 = d * d
    raw = ball_cuts(instance, metric, HALF, Mode.MCP)
    quant = quantize(raw, d2)
    units = {t: unit_copies(cuts, d2) for t, cuts in quant.items()}

    copies_verts, copies_cuts, owners = [], [], []
    for a, verts in enumerate(instance.commodities):
        terms = instance.commodity_terminals(a)
        for c in range(d2):
            copies_verts.append(verts)
            copies_cuts.append([units[t.id][c] for t in terms])
            owners.append([t.id for t in terms])
    laminar = integer_lam2(instance.graph, copies_verts, copies_cuts, stats)

    per_terminal: dict[int, list[int]] = {t.id: [] for t in instance.terminals}
    for ids, masks in zip(owners, laminar):
        for t, m in zip(ids, masks):
            per_terminal[t].append(m)
    weight = Fraction(2, d2)
    cuts = []
    n = instance.n
    for t, masks in per_terminal.items():
        masks.sort(key=lambda m: (popcount(m), m))
        kept = masks[: d2 // 2]
        for a, b in zip(kept, kept[1:]):
            if a & ~b:
                raise InvariantError(f"cuts of terminal {t} are not concentric")
        acc: dict[int, Fraction] = {}
        for m in kept:
            acc[m] = acc.get(m, Fraction(0)) + weight
        for m in sorted(acc, key=lambda m: (popcount(m), m)):
            if m == instance.graph.all_mask:
                raise InvariantError(f"terminal {t} kept a cut covering every vertex")
            cuts.append(WeightedCut(Cut(m, n), acc[m], t))
    family = FractionalLaminarFamily(tuple(cuts), instance.roots())
    bad = family.problems()
    if bad:
        raise InvariantError("lam2 produced an invalid family: " + bad[0])
    return family


# ------------------------------------------------------------ inclusion invariant


def outermost(family: FractionalLaminarFamily) -> dict[int, int]:
    return {t: family.union_of(t) for t in family.terminals}


def ci_dominates(i: int, j: int, outer: dict[int, int]) -> bool:
    """``i >_CI j``: ``O_i`` strictly inside ``O_j``, equal sets ordered by id."""
    oi, oj = outer[i], outer[j]
    if oi == oj:
        return i < j
    return oi & ~oj == 0


def inclusion_violations(family: FractionalLaminarFamily) -> list[tuple[int, int]]:
    """Index pairs ``(p, q)`` with ``owner(p) >_CI owner(q)``, both roots in
    both cuts, and cut ``p`` not inside cut ``q``."""
    outer = outermost(family)
    roots = family.roots
    out = []
    cuts = family.cuts
    for p, cp in enumerate(cuts):
        i = cp.owner
        for q, cq in enumerate(cuts):
            j = cq.owner
            if i == j or not ci_dominates(i, j, outer):
                continue
            both = (1 << roots[i]) | (1 << roots[j])
            common = cp.cut.mask & cq.cut.mask
            if common & both == both and cp.cut.mask & ~cq.cut.mask:
                out.append((p, q))
    return out


def _potential(cuts: list[WeightedCut], terminals) -> tuple[int, Fraction]:
    """``(sum_t |O_t|, Phi)``; every swap lowers it lexicographically.

    ``Phi`` sums ``w(C) * |C| * (T - pos(owner))`` where ``pos`` ranks the
    terminals by ``(|O_t|, t)``, a linear extension of the cut-inclusion
    order.  Swaps never grow an outermost cut; while none shrinks the order
    is fixed and handing the smaller cut to the dominant owner lowers ``Phi``.
    """
    outer = {t: 0 for t in terminals}
    for c in cuts:
        outer[c.owner] |= c.cut.mask
    order = sorted(outer, key=lambda t: (popcount(outer[t]), t))
    pos = {t: k for k, t in enumerate(order)}
    top = len(order)
    phi = sum((c.weight * popcount(c.cut.mask) * (top - pos[c.owner]) for c in cuts), Fraction(0))
    return sum(popcount(m) for m in outer.values()), phi


def inclusion_invariant_preprocess(family: FractionalLaminarFamily,
                                   max_steps: int | None = None) -> FractionalLaminarFamily:
    """Swap ownership of equal-weight portions until every CI-dominant
    terminal owns the inner cut of each pair sharing both roots.

    A swap hands the smaller cut to the dominant terminal, so its outermost
    cut can only shrink; the other terminal's outermost cut is unchanged.
    """
    cuts = list(family.cuts)
    for a, b in ((x.cut.mask, y.cut.mask) for x in cuts for y in cuts):
        if crosses(a, b):
            raise ValueError("inclusion preprocessing needs a laminar family")
    cap = max_steps or 10 * len(cuts) ** 2 + 100
    steps = 0
    current = family
    terms = family.terminals
    pot = _potential(cuts, terms)
    while True:
        bad = inclusion_violations(current)
        if not bad:
            return current
        steps += 1
        if steps > cap:
            raise InvariantError(f"inclusion preprocessing did not finish within {cap} swaps")
        p, q = bad[0]
        cp, cq = cuts[p], cuts[q]
        w = min(cp.weight, cq.weight)
        rest = [c for k, c in enumerate(cuts) if k not in (p, q)]
        if cp.weight > w:
            rest.append(WeightedCut(cp.cut, cp.weight - w, cp.owner))
        if cq.weight > w:
            rest.append(WeightedCut(cq.cut, cq.weight - w, cq.owner))
        rest.append(WeightedCut(cq.cut, w, cp.owner))
        rest.append(WeightedCut(cp.cut, w, cq.owner))
        cuts = _merge(rest)
        new_pot = _potential(cuts, terms)
        if new_pot >= pot:
            raise InvariantError(f"inclusion swap did not lower the potential ({pot} -> {new_pot})")
        pot = new_pot
        current = FractionalLaminarFamily(tuple(cuts), family.roots)


def _merge(cuts: list[WeightedCut]) -> list[WeightedCut]:
    acc: dict[tuple[int, int], WeightedCut] = {}
    for c in cuts:
        key = (c.owner, c.cut.mask)
        if key in acc:
            acc[key] = WeightedCut(c.cut, acc[key].weight + c.weight, c.owner)
        else:
            acc[key] = c
    return sorted(acc.values(), key=lambda c: (c.owner, popcount(c.cut.mask), c.cut.mask))

"""Common-sink uncrossing (Lam-1)."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Iterable, Mapping

from ..instance import (Cut, FractionalLaminarFamily, Instance, InvariantError, Mode, WeightedCut,
                        popcount)
from ..lp import MetricSolution
from .ball import ball_cuts, quantize

log = logging.getLogger(__name__)


def _coalesce(entries: Iterable[tuple[int, Fraction, int]]) -> list[list]:
    acc: dict[tuple[int, int], Fraction] = {}
    for mask, w, owner in entries:
        acc[(owner, mask)] = acc.get((owner, mask), Fraction(0)) + w
    return [[mask, w, owner] for (owner, mask), w in sorted(acc.items(), key=lambda kv: (kv[0][0], popcount(kv[0][1]), kv[0][1]))]


def _first_crossing(entries: list[list]) -> tuple[int, int] | None:
    for p in range(len(entries)):
        a = entries[p][0]
        for q in range(p + 1, len(entries)):
            b = entries[q][0]
            if a & b and a & ~b and b & ~a:
                return p, q
    return None


def uncross_cscp(cuts: Iterable[tuple[int, Fraction, int]], roots: Mapping[int, int], sink: int,
                 n: int) -> FractionalLaminarFamily:
    """Make a common-sink family laminar without raising any edge load.

    ``cuts`` holds ``(mask, weight, owner)`` triples.  A crossing pair is cut
    down to a common weight and replaced according to where the two owners
    sit: both in the intersection gives intersection/union, each outside the
    other cut gives the two differences, and the mixed case hands the
    intersection to the owner inside it and the union to the other.
    """
    entries = _coalesce(cuts)
    sink_bit = 1 << sink
    for mask, _, owner in entries:
        if mask & sink_bit:
            raise InvariantError(f"cut of terminal {owner} contains the sink")
        if not mask >> roots[owner] & 1:
            raise InvariantError(f"cut of terminal {owner} misses its vertex")
    cap = max(1000, len(entries) ** 3)
    steps = 0
    while True:
        pair = _first_crossing(entries)
        if pair is None:
            break
        steps += 1
        if steps > cap:
            raise InvariantError(f"uncrossing did not finish within {cap} steps")
        p, q = pair
        a, wa, i = entries[p]
        b, wb, j = entries[q]
        w = min(wa, wb)
        ri, rj = 1 << roots[i], 1 << roots[j]
        inter, union = a & b, a | b
        if i == j or (ri & inter and rj & inter):
            new = [(inter, w, i), (union, w, j)]
        elif ri & a & ~b and rj & b & ~a:
            new = [(a & ~b, w, i), (b & ~a, w, j)]
        elif ri & inter:
            new = [(inter, w, i), (union, w, j)]
        else:
            new = [(union, w, i), (inter, w, j)]
        rest = [tuple(e) for k, e in enumerate(entries) if k not in (p, q)]
        if wa > w:
            rest.append((a, wa - w, i))
        if wb > w:
            rest.append((b, wb - w, j))
        entries = _coalesce(rest + new)
    log.debug("cscp uncrossing took %d steps", steps)
    family = FractionalLaminarFamily(
        tuple(WeightedCut(Cut(mask, n), w, owner) for mask, w, owner in entries), dict(roots))
    bad = family.problems()
    if bad:
        raise InvariantError("uncrossing produced an invalid family: " + bad[0])
    return family


def lam1(instance: Instance, metric: MetricSolution, grid_n: int | None = None) -> FractionalLaminarFamily:
    """Fractional laminar family for a common-sink instance.

    Feasible against capacities ``lam * c_e + 1/N`` with ``N = n * k`` unless
    ``grid_n`` overrides ``N``.
    """
    if instance.sink is None:
        raise ValueError("lam1 needs a common-sink instance")
    big_n = grid_n or instance.n * instance.k
    raw = ball_cuts(instance, metric, Fraction(1), Mode.CSCP)
    quant = quantize(raw, big_n * big_n)
    roots = {t.id: t.vertex for t in instance.cut_terminals(Mode.CSCP)}
    triples = [(mask, w, t) for t, cuts in quant.items() for mask, w in cuts]
    return uncross_cscp(triples, roots, instance.sink, instance.n)

"""Ball cuts around terminals and their quantization onto a 1/D^2 grid."""

from __future__ import annotations

from fractions import Fraction
from math import ceil

from ..instance import Instance, InvariantError, Mode
from ..lp import MetricSolution, shortest_paths

# per terminal: (mask, weight) pairs ordered innermost first
RawFamily = dict[int, list[tuple[int, Fraction]]]


def ball_cuts(instance: Instance, metric: MetricSolution, radius_cap: Fraction,
              mode: Mode | None = None) -> RawFamily:
    """Prefix cuts of the distance order around every terminal.

    A prefix ``{v_0..v_b}`` with ``d(v_b) < radius_cap`` gets weight
    ``(min(d(v_{b+1}), radius_cap) - d(v_b)) / radius_cap`` so every terminal
    carries total weight exactly 1.  Distance ties are broken by vertex id;
    zero-weight prefixes are dropped.
    """
    radius_cap = Fraction(radius_cap)
    graph = instance.graph
    adj = graph.adjacency()
    n = graph.num_vertices
    full = graph.all_mask
    out: RawFamily = {}
    cache: dict[tuple[int, int], list] = {}
    for term in instance.cut_terminals(mode):
        key = (term.commodity, term.vertex)
        if key not in cache:
            cache[key] = shortest_paths(graph, metric.lengths[term.commodity], term.vertex, adj)[0]
        dist = cache[key]
        order = sorted(range(n), key=lambda v: (dist[v] is None, dist[v] or 0, v != term.vertex, v))
        cuts = []
        mask = 0
        for b, v in enumerate(order):
            dv = dist[v]
            if dv is None or dv >= radius_cap:
                break
            mask |= 1 << v
            nxt = dist[order[b + 1]] if b + 1 < n else None
            outer = radius_cap if nxt is None else min(nxt, radius_cap)
            w = (outer - dv) / radius_cap
            if w > 0:
                if mask == full:
                    raise InvariantError(f"ball around vertex {term.vertex} swallowed the whole graph")
                cuts.append((mask, w))
        if sum(w for _, w in cuts) != 1:
            raise InvariantError(f"ball cuts of terminal {term.id} do not sum to 1")
        out[term.id] = cuts
    return out


def quantize(raw: RawFamily, grid: int) -> RawFamily:
    """Round weights up to multiples of ``1/grid`` and trim the outermost
    excess so every terminal again sums to exactly 1.

    The result stays compact: a cut of weight ``q/grid`` stands for ``q``
    copies of weight ``1/grid``.
    """
    if grid < 1:
        raise ValueError("grid must be positive")
    out: RawFamily = {}
    for t, cuts in raw.items():
        left = grid
        kept = []
        for mask, w in cuts:
            if not left:
                break
            units = min(ceil(w * grid), left)
            if units:
                kept.append((mask, Fraction(units, grid)))
                left -= units
        if left:
            raise InvariantError(f"terminal {t}: raw weights sum below 1")
        out[t] = kept
    return out


def unit_copies(cuts: list[tuple[int, Fraction]], grid: int) -> list[int]:
    """Expand a quantized list into ``grid`` masks of weight ``1/grid`` each."""
    masks = []
    for mask, w in cuts:
        q = w * grid
        if q.denominator != 1:
            raise ValueError(f"weight {w} is not on the 1/{grid} grid")
        masks.extend([mask] * int(q))
    return masks

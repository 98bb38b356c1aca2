"""Instance generators: seeded random graphs and the clique-chain gap family."""

from __future__ import annotations

import random
from fractions import Fraction
from math import ceil

from .instance import Cut, FractionalLaminarFamily, Graph, Instance, InstanceError, WeightedCut, load_vector


def random_instance(seed: int, n: int = 8, k: int = 2, terminals: int = 2, c_max: int = 3,
                    density: float = 0.3, cscp: bool = False, max_tries: int = 100) -> Instance:
    """Connected random graph with ``k`` commodities of ``terminals`` terminals each.

    With ``cscp=True`` every commodity is a pair ``{r, t}`` around a common sink.
    The same arguments always give the same instance.
    """
    if not 2 <= n <= 64:
        raise InstanceError("random instances need 2 <= n <= 64")
    if not 1 <= k <= 8:
        raise InstanceError("random instances need 1 <= k <= 8")
    if cscp:
        terminals = 2
    if not 2 <= terminals <= min(4, n):
        raise InstanceError("commodities need between 2 and min(4, n) terminals")
    if c_max < 1:
        raise InstanceError("c_max must be at least 1")
    rng = random.Random(seed)
    for _ in range(max_tries):
        edges = {}
        order = list(range(n))
        rng.shuffle(order)
        for i in range(1, n):
            u, v = order[i], order[rng.randrange(i)]
            edges[(min(u, v), max(u, v))] = rng.randint(1, c_max)
        for u in range(n):
            for v in range(u + 1, n):
                if (u, v) not in edges and rng.random() < density:
                    edges[(u, v)] = rng.randint(1, c_max)
        graph = Graph(n, tuple((u, v, c) for (u, v), c in sorted(edges.items())))
        if cscp:
            sink = rng.randrange(n)
            others = [v for v in range(n) if v != sink]
            comms = [(rng.choice(others), sink) for _ in range(k)]
            return Instance(graph, tuple(comms), sink)
        comms = [tuple(rng.sample(range(n), terminals)) for _ in range(k)]
        return Instance(graph, tuple(comms))
    raise InstanceError("could not generate a connected instance")  # pragma: no cover


def clique_chain(n: int) -> Instance:
    """``K_n`` plus a path of ``n/2 + 1`` extra vertices ending at the sink.

    Vertices ``0..n-1`` form the clique and each carries one terminal.  The
    path runs ``v = n, n+1, ..., t = n + n/2``; every clique vertex is joined
    to ``v``.  All capacities are 1 and every commodity is ``{r_i, t}``.
    """
    if n < 2 or n % 2:
        raise InstanceError("clique-chain needs an even n >= 2")
    half = n // 2
    v = n
    t = n + half
    edges = [(a, b, 1) for a in range(n) for b in range(a + 1, n)]
    edges += [(n + i, n + i + 1, 1) for i in range(half)]
    edges += [(a, v, 1) for a in range(n)]
    graph = Graph(n + half + 1, tuple(edges))
    return Instance(graph, tuple((r, t) for r in range(n)), t)


def _hierarchy(rng: random.Random, n: int) -> list[int]:
    """Random laminar family: all singletons plus the blocks of a recursive
    split of a shuffled vertex order (``V`` itself excluded)."""
    order = list(range(n))
    rng.shuffle(order)
    sets = {1 << v for v in range(n)}

    def split(lo: int, hi: int):
        if hi - lo < 2:
            return
        mask = 0
        for v in order[lo:hi]:
            mask |= 1 << v
        if hi - lo < n:
            sets.add(mask)
        cut = rng.randint(lo + 1, hi - 1)
        split(lo, cut)
        split(cut, hi)

    split(0, n)
    return sorted(sets)


def random_laminar_family(seed: int, n: int = 8, k: int = 3, terminals: int = 2, cscp: bool = False,
                          max_cuts: int = 3) -> tuple[Instance, FractionalLaminarFamily]:
    """Directly constructed feasible fractional laminar family (no LP).

    Every terminal spreads unit weight over up to ``max_cuts`` sets from a
    random hierarchy that contain its vertex.  Common-sink cuts avoid the
    sink; multiway terminals avoid any same-commodity vertex whose terminal
    already reaches theirs.  Edge capacities are then set to
    ``max(1, ceil(load))``, so the family is feasible by construction.
    """
    rng = random.Random(seed)
    base = random_instance(rng.randrange(1 << 30), n=n, k=k, terminals=terminals, cscp=cscp)
    sets = _hierarchy(rng, n)
    cut_terms = base.cut_terminals()
    order = list(cut_terms)
    rng.shuffle(order)
    outer: dict[int, int] = {}
    cuts = []
    for t in order:
        forbidden = 0
        if cscp:
            forbidden = 1 << base.sink
        else:
            for other in base.commodity_terminals(t.commodity):
                if other.id in outer and outer[other.id] >> t.vertex & 1:
                    forbidden |= 1 << other.vertex
        chain = [s for s in sets if s >> t.vertex & 1 and not s & forbidden]
        picked = sorted(rng.sample(chain, min(len(chain), rng.randint(1, max_cuts))))
        parts = [rng.randint(1, 4) for _ in picked]
        total = sum(parts)
        for s, q in zip(picked, parts):
            cuts.append(WeightedCut(Cut(s, n), Fraction(q, total), t.id))
        outer[t.id] = picked[-1] if picked else 0
        for s in picked:
            outer[t.id] |= s
    roots = {t.id: t.vertex for t in cut_terms}
    family = FractionalLaminarFamily(tuple(cuts), roots)
    loads = load_vector(family, base.graph)
    graph = Graph(n, tuple((u, v, max(1, ceil(l))) for (u, v, _), l in zip(base.graph.edges, loads)))
    return Instance(graph, base.commodities, base.sink), family

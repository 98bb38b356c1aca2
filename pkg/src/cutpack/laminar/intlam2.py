"""Integer-Lam-2: make an integral multiway cut family laminar.

Every terminal owns exactly one cut (a vertex bitmask).  Crossing pairs are
first resolved by local rules that never raise an edge load; blue cycles of
the conflict graph are then broken by intersections; finally each connected
component of the conflict graph is re-cut by peeling leaf terminals against
residual capacities ``2 * load``.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from ..instance import Graph, InvariantError, popcount

log = logging.getLogger(__name__)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _crossing(a: int, b: int) -> bool:
    return bool(a & b and a & ~b and b & ~a)


class RedBlueGraph:
    """Conflict graph over terminals, rebuilt from the current cuts.

    Red ``i -> j`` iff ``C_j`` is a strict subset of ``C_i``.  Blue ``i -> j``
    iff ``r_j`` is in ``C_i``, ``r_i`` is not in ``C_j`` and ``C_j`` is not a
    subset of ``C_i``.  Adjacency is stored as terminal bitmasks.
    """

    def __init__(self, roots: Sequence[int], cuts: Sequence[int], active: int | None = None):
        t_count = len(roots)
        self.size = t_count
        everyone = (1 << t_count) - 1
        self.active = everyone if active is None else active
        by_mask: dict[int, int] = {}
        root_at: dict[int, int] = {}
        for t in _bits(self.active):
            by_mask[cuts[t]] = by_mask.get(cuts[t], 0) | 1 << t
            root_at[roots[t]] = root_at.get(roots[t], 0) | 1 << t
        masks = list(by_mask)
        subset_of = {}
        strict_subset_of = {}
        roots_in = {}
        for m in masks:
            sub = strict = 0
            for m2 in masks:
                if m2 & ~m == 0:
                    sub |= by_mask[m2]
                    if m2 != m:
                        strict |= by_mask[m2]
            subset_of[m] = sub
            strict_subset_of[m] = strict
            r = 0
            for v, bits in root_at.items():
                if m >> v & 1:
                    r |= bits
            roots_in[m] = r
        not_containing: dict[int, int] = {}
        for v in root_at:
            bits = 0
            for m, owners in by_mask.items():
                if not m >> v & 1:
                    bits |= owners
            not_containing[v] = bits
        self.red = [0] * t_count
        self.blue = [0] * t_count
        for t in _bits(self.active):
            m = cuts[t]
            self.red[t] = strict_subset_of[m]
            self.blue[t] = roots_in[m] & not_containing[roots[t]] & ~subset_of[m] & self.active

    def out(self, t: int) -> int:
        return (self.red[t] | self.blue[t]) & self.active

    def components(self) -> list[list[int]]:
        """Weakly connected components, each sorted, listed by smallest member."""
        undirected = [0] * self.size
        for t in _bits(self.active):
            undirected[t] |= self.out(t)
            for s in _bits(self.out(t)):
                undirected[s] |= 1 << t
        seen = 0
        comps = []
        for t in _bits(self.active):
            if seen >> t & 1:
                continue
            comp = frontier = 1 << t
            while frontier:
                nxt = 0
                for s in _bits(frontier):
                    nxt |= undirected[s]
                frontier = nxt & ~comp
                comp |= frontier
            seen |= comp
            comps.append(list(_bits(comp)))
        return comps

    def is_acyclic(self, blue_only: bool = False) -> bool:
        adj = self.blue if blue_only else [self.out(t) for t in range(self.size)]
        indeg = Counter()
        for t in _bits(self.active):
            for s in _bits(adj[t] & self.active):
                indeg[s] += 1
        ready = [t for t in _bits(self.active) if not indeg[t]]
        done = 0
        while ready:
            t = ready.pop()
            done += 1
            for s in _bits(adj[t] & self.active):
                indeg[s] -= 1
                if not indeg[s]:
                    ready.append(s)
        return done == popcount(self.active)

    def shortest_blue_cycle(self) -> list[int] | None:
        """Shortest directed blue cycle ``[i_1, ..., i_x]`` (edge ``i_x -> i_1``
        closes it); ties go to the smallest start and BFS parents."""
        if self.is_acyclic(blue_only=True):
            return None
        best: list[int] | None = None
        for s in _bits(self.active):
            parent = {s: -1}
            seen = 1 << s
            frontier = [s]
            found = None
            depth = 0
            while frontier and found is None:
                depth += 1
                if best is not None and depth >= len(best):
                    break
                nxt = []
                for x in frontier:
                    out = self.blue[x] & self.active
                    if out >> s & 1:
                        found = x
                        break
                    for y in _bits(out & ~seen):
                        seen |= 1 << y
                        parent[y] = x
                        nxt.append(y)
                frontier = nxt
            if found is not None:
                cyc = []
                x = found
                while x != -1:
                    cyc.append(x)
                    x = parent[x]
                cyc.reverse()
                if best is None or len(cyc) < len(best):
                    best = cyc
        return best


@dataclass
class IntLam2Stats:
    rules: Counter = field(default_factory=Counter)
    peeled: int = 0


class _State:
    def __init__(self, graph: Graph, roots: list[int], coms: list[int], cuts: list[int]):
        self.graph = graph
        self.roots = roots
        self.coms = coms
        self.cuts = cuts
        self.by_com: dict[int, list[int]] = {}
        for t, a in enumerate(coms):
            self.by_com.setdefault(a, []).append(t)
        self.classes: dict[tuple[int, int], list[int]] = {}
        for t in range(len(roots)):
            self.classes.setdefault((roots[t], cuts[t]), []).append(t)
        self.ends = [(u, v) for u, v, _ in graph.edges]

    def set_cut(self, t: int, mask: int):
        key = (self.roots[t], self.cuts[t])
        members = self.classes[key]
        members.remove(t)
        if not members:
            del self.classes[key]
        self.cuts[t] = mask
        new = self.classes.setdefault((self.roots[t], mask), [])
        new.append(t)
        new.sort()

    def loads_of(self, masks) -> list[int]:
        loads = [0] * len(self.ends)
        for m in masks:
            for e, (u, v) in enumerate(self.ends):
                if (m >> u & 1) != (m >> v & 1):
                    loads[e] += 1
        return loads

    def crossing_number(self) -> int:
        counts = Counter(self.cuts)
        masks = list(counts)
        total = 0
        for x in range(len(masks)):
            a = masks[x]
            for y in range(x + 1, len(masks)):
                if _crossing(a, masks[y]):
                    total += counts[a] * counts[masks[y]]
        return total

    def check_separation(self, changed) -> None:
        for t in changed:
            for s in self.by_com[self.coms[t]]:
                if s == t:
                    continue
                both = (1 << self.roots[t]) | (1 << self.roots[s])
                if popcount(self.cuts[t] & self.cuts[s] & both) > 1:
                    raise InvariantError(f"terminals {t} and {s} of one commodity lost separation")

    def apply(self, assignment: dict[int, int], rule: str, stats: IntLam2Stats):
        """Reassign cuts, asserting that no edge load rises and that the
        crossing number strictly drops."""
        before = self.loads_of(self.cuts[t] for t in assignment)
        after = self.loads_of(assignment.values())
        if any(a > b for a, b in zip(after, before)):
            raise InvariantError(f"rule {rule} raised an edge load")
        for t, m in assignment.items():
            if not m >> self.roots[t] & 1:
                raise InvariantError(f"rule {rule} dropped terminal {t} from its own cut")
        old_cross = self.crossing_number()
        for t, m in assignment.items():
            self.set_cut(t, m)
        self.check_separation(assignment)
        if self.crossing_number() >= old_cross:
            raise InvariantError(f"rule {rule} did not reduce the crossing number")
        stats.rules[rule] += 1

    # ------------------------------------------------------------ local rules

    def _class_list(self):
        return sorted(((m, r, members) for (r, m), members in self.classes.items()), key=lambda c: c[2][0])

    def _blocked(self, t: int, own: int, other: int) -> bool:
        """Some same-commodity terminal sits in ``other`` and owns a strict superset of ``own``."""
        for s in self.by_com[self.coms[t]]:
            c = self.cuts[s]
            if other >> self.roots[s] & 1 and own & ~c == 0 and c != own:
                return True
        return False

    def step1(self, stats: IntLam2Stats) -> bool:
        cls = self._class_list()
        pairs = []
        for x in range(len(cls)):
            for y in range(x + 1, len(cls)):
                if _crossing(cls[x][0], cls[y][0]):
                    pairs.append((cls[x], cls[y]))
        if not pairs:
            return False

        # 1a: each root outside the other cut
        best = None
        for (mx, rx, tx), (my, ry, ty) in pairs:
            if not my >> rx & 1 and not mx >> ry & 1:
                cand = tuple(sorted((tx[0], ty[0])))
                if best is None or cand < best:
                    best = cand
        if best is not None:
            i, j = best
            ci, cj = self.cuts[i], self.cuts[j]
            self.apply({i: ci & ~cj, j: cj & ~ci}, "1a", stats)
            return True

        # 1b: three cuts whose roots sit pairwise in a cyclic pattern
        tri = self._three_cycle(cls)
        if tri is not None:
            i1, i2, i3 = tri
            c1, c2, c3 = self.cuts[i1], self.cuts[i2], self.cuts[i3]
            self.apply({i1: c1 & c2 & ~c3, i2: c2 & c3 & ~c1, i3: c3 & c1 & ~c2}, "1b", stats)
            return True

        # 1c: same commodity, one root inside both cuts, the other outside
        best = None
        for (mx, rx, tx), (my, ry, ty) in pairs:
            in_x, in_y = bool(my >> rx & 1), bool(mx >> ry & 1)
            if in_x == in_y:
                continue
            inner, outer = (tx, ty) if in_x else (ty, tx)
            first_outer: dict[int, int] = {}
            for t in outer:
                first_outer.setdefault(self.coms[t], t)
            for t in inner:
                s = first_outer.get(self.coms[t])
                if s is not None:
                    cand = (min(t, s), max(t, s), t, s)
                    if best is None or cand < best:
                        best = cand
        if best is not None:
            _, _, i, j = best
            ci, cj = self.cuts[i], self.cuts[j]
            self.apply({i: ci & cj, j: ci | cj}, "1c", stats)
            return True

        # 1d: different commodities, both roots inside both cuts
        cands = []
        for (mx, rx, tx), (my, ry, ty) in pairs:
            if my >> rx & 1 and mx >> ry & 1:
                for t in tx:
                    for s in ty:
                        if self.coms[t] != self.coms[s]:
                            cands.append((min(t, s), max(t, s)))
        if not cands:
            return False
        cands.sort()
        for i, j in cands:
            ci, cj = self.cuts[i], self.cuts[j]
            if not self._blocked(i, ci, cj):
                self.apply({i: ci | cj, j: ci & cj}, "1d", stats)
                return True
            if not self._blocked(j, cj, ci):
                self.apply({j: ci | cj, i: ci & cj}, "1d", stats)
                return True
        i, j = cands[0]
        self._chain(i, j, stats)
        return True

    def _three_cycle(self, cls) -> tuple[int, int, int] | None:
        # p(x, y): r_x in C_y and r_y not in C_x
        k = len(cls)
        out = [0] * k
        inn = [0] * k
        for x in range(k):
            mx, rx, _ = cls[x]
            for y in range(k):
                my, ry, _ = cls[y]
                if x != y and my >> rx & 1 and not mx >> ry & 1:
                    out[x] |= 1 << y
                    inn[y] |= 1 << x
        for x in range(k):
            for y in _bits(out[x]):
                zs = out[y] & inn[x]
                if zs:
                    z = (zs & -zs).bit_length() - 1
                    return cls[x][2][0], cls[y][2][0], cls[z][2][0]
        return None

    def _chain_moves(self, i: int, cj: int) -> dict[int, int]:
        ci = self.cuts[i]
        chain = [s for s in self.by_com[self.coms[i]]
                 if cj >> self.roots[s] & 1 and ci & ~self.cuts[s] == 0 and self.cuts[s] != ci]
        chain.sort(key=lambda s: popcount(self.cuts[s]))
        chain = [i] + chain
        x = len(chain) - 1
        c = [self.cuts[s] for s in chain]
        moves = {}
        for k in range(x - 1):
            moves[chain[k]] = c[k] | (c[k + 1] & ~cj)
        moves[chain[x - 1]] = c[x] | cj
        moves[chain[x]] = c[x] & cj & ~c[x - 1]
        return moves

    def _chain(self, i: int, j: int, stats: IntLam2Stats):
        """Both owners are blocked: rotate cuts along the nested chains of
        same-commodity terminals sitting in the other cut, on both sides at
        once, using the cuts as they were before the move."""
        ci, cj = self.cuts[i], self.cuts[j]
        moves = self._chain_moves(i, cj)
        moves.update(self._chain_moves(j, ci))
        self.apply(moves, "1d-chain", stats)

    # ------------------------------------------------------------ blue cycles

    def step2(self, stats: IntLam2Stats) -> bool:
        g = RedBlueGraph(self.roots, self.cuts)
        cyc = g.shortest_blue_cycle()
        if cyc is None:
            return False
        x = len(cyc)
        new = {}
        for idx in range(x):
            prev = cyc[idx - 1]
            new[cyc[idx]] = self.cuts[cyc[idx]] & self.cuts[prev]
        self.apply(new, "2", stats)
        return True

    # ------------------------------------------------------------ peeling

    def step3(self, stats: IntLam2Stats):
        g = RedBlueGraph(self.roots, self.cuts)
        if not g.is_acyclic():
            raise InvariantError("conflict graph has a cycle at the peeling step")
        entry = list(self.cuts)
        n = self.graph.num_vertices
        for comp in g.components():
            if len(comp) == 1:
                continue
            p = self.loads_of(entry[t] for t in comp)
            p = [2 * x for x in p]
            remaining = set(comp)
            while remaining:
                leaf = None
                for t in sorted(remaining):
                    if not any(s in remaining for s in _bits(g.out(t))):
                        leaf = t
                        break
                if leaf is None:
                    raise InvariantError("no leaf terminal found while peeling")
                meta = self._meta_node(p, self.roots[leaf], n)
                if meta & ~entry[leaf]:
                    raise InvariantError(f"peeled cut of terminal {leaf} leaves its entry cut")
                for e, (u, v) in enumerate(self.ends):
                    if (meta >> u & 1) != (meta >> v & 1):
                        if p[e] <= 0:
                            raise InvariantError("residual capacity went negative")
                        p[e] -= 1
                self.cuts[leaf] = meta
                remaining.discard(leaf)
                stats.peeled += 1

    def _meta_node(self, p: list[int], v: int, n: int) -> int:
        comp = frontier = 1 << v
        while frontier:
            nxt = 0
            for e, (a, b) in enumerate(self.ends):
                if p[e] == 0:
                    if frontier >> a & 1:
                        nxt |= 1 << b
                    if frontier >> b & 1:
                        nxt |= 1 << a
            frontier = nxt & ~comp
            comp |= frontier
        return comp


def integer_lam2(graph: Graph, commodities: Sequence[Sequence[int]], cuts: Sequence[Sequence[int]],
                 stats: IntLam2Stats | None = None, max_steps: int | None = None) -> list[list[int]]:
    """Laminar re-cut of an integral family.

    ``commodities[a]`` lists terminal vertices and ``cuts[a][x]`` is the mask
    of the terminal at ``commodities[a][x]``; the result has the same shape.
    Each input cut must contain its own vertex and no other vertex of its
    commodity.  The output is laminar, keeps one of each same-commodity pair
    separating, and loads every edge at most twice as much as the input.
    """
    stats = stats if stats is not None else IntLam2Stats()
    roots, coms, flat = [], [], []
    full = graph.all_mask
    for a, (verts, cs) in enumerate(zip(commodities, cuts)):
        if len(verts) != len(cs):
            raise ValueError(f"commodity {a}: {len(verts)} terminals but {len(cs)} cuts")
        for v, m in zip(verts, cs):
            if not m >> v & 1:
                raise ValueError(f"commodity {a}: cut {m:#x} misses its vertex {v}")
            if m & ~full or m == full:
                raise ValueError(f"commodity {a}: cut {m:#x} is not a proper vertex subset")
            for w in verts:
                if w != v and m >> w & 1:
                    raise ValueError(f"commodity {a}: cut of vertex {v} contains vertex {w}")
            roots.append(v)
            coms.append(a)
            flat.append(m)
    state = _State(graph, roots, coms, flat)
    cap = max_steps or 1000 + 4 * len(flat) ** 2
    steps = 0
    while True:
        if not state.step1(stats) and not state.step2(stats):
            break
        steps += 1
        if steps > cap:
            raise InvariantError(f"uncrossing did not settle within {cap} steps")
    state.step3(stats)
    log.debug("integer-lam-2: %s, %d peeled", dict(stats.rules), stats.peeled)
    out = []
    pos = 0
    for verts in commodities:
        out.append(state.cuts[pos:pos + len(verts)])
        pos += len(verts)
    return out

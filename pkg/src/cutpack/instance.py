"""Graphs, commodities, vertex cuts, load accounting and feasibility checks.

Vertex sets are held as integer bitmasks (bit ``v`` set iff vertex ``v`` is a
member).  :class:`Cut` wraps a mask together with the vertex count so that the
"proper nonempty subset" invariant can be enforced once, at construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence


class InstanceError(ValueError):
    """Raised when a graph, instance or cut violates its invariants."""


class InvariantError(RuntimeError):
    """An algorithm detected a broken internal invariant (a bug, not bad input)."""


class Mode(enum.Enum):
    MCP = "mcp"
    CSCP = "cscp"


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def members_of(mask: int) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True, order=True)
class Cut:
    """A vertex set ``C`` with ``{} != C != V``."""

    mask: int
    n: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.mask <= 0 or self.mask & ~full:
            raise InstanceError(f"cut mask {self.mask:#x} is empty or has vertices outside range({self.n})")
        if self.mask == full:
            raise InstanceError("a cut may not contain every vertex")

    @classmethod
    def of(cls, vertices: Iterable[int], n: int) -> "Cut":
        return cls(mask_of(vertices), n)

    @property
    def members(self) -> list[int]:
        return members_of(self.mask)

    def __contains__(self, v: int) -> bool:
        return bool(self.mask >> v & 1)

    def __len__(self) -> int:
        return popcount(self.mask)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def complement(self) -> "Cut":
        return Cut(((1 << self.n) - 1) & ~self.mask, self.n)

    def __repr__(self) -> str:
        return f"Cut({self.members})"


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.num_vertices < 2:
            raise InstanceError("a graph needs at least two vertices")
        seen = set()
        norm = []
        for idx, edge in enumerate(self.edges):
            if len(edge) != 3:
                raise InstanceError(f"edge {idx}: expected (u, v, capacity)")
            u, v, c = edge
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in (u, v, c)):
                raise InstanceError(f"edge {idx}: endpoints and capacity must be integers")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise InstanceError(f"edge {idx}: endpoint out of range")
            if u == v:
                raise InstanceError(f"edge {idx}: self-loop at {u}")
            if c < 1:
                raise InstanceError(f"edge {idx}: capacity must be a positive integer")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InstanceError(f"edge {idx}: duplicate edge {key}")
            seen.add(key)
            norm.append((key[0], key[1], c))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def capacities(self) -> list[int]:
        return [c for _, _, c in self.edges]

    @property
    def all_mask(self) -> int:
        return (1 << self.num_vertices) - 1

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """``adj[u]`` lists ``(v, edge_index)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_vertices)]
        for idx, (u, v, _) in enumerate(self.edges):
            adj[u].append((v, idx))
            adj[v].append((u, idx))
        return adj

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(u, v): i for i, (u, v, _) in enumerate(self.edges)}


@dataclass(frozen=True)
class Terminal:
    id: int
    commodity: int
    vertex: int


@dataclass(frozen=True)
class Instance:
    graph: Graph
    commodities: tuple[tuple[int, ...], ...]
    sink: int | None = None
    terminals: tuple[Terminal, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.graph.num_vertices
        comms = tuple(tuple(c) for c in self.commodities)
        object.__setattr__(self, "commodities", comms)
        if not comms:
            raise InstanceError("at least one commodity is required")
        if self.sink is not None and not 0 <= self.sink < n:
            raise InstanceError(f"sink {self.sink} out of range")
        terms = []
        for a, verts in enumerate(comms):
            if len(verts) < 2:
                raise InstanceError(f"commodity {a}: needs at least two terminals")
            if len(set(verts)) != len(verts):
                raise InstanceError(f"commodity {a}: terminals must sit at distinct vertices")
            for v in verts:
                if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < n:
                    raise InstanceError(f"commodity {a}: terminal vertex {v!r} out of range")
            if self.sink is not None:
                if len(verts) != 2 or self.sink not in verts:
                    raise InstanceError(f"commodity {a}: common-sink commodities are pairs containing the sink")
            for v in verts:
                terms.append(Terminal(len(terms), a, v))
        object.__setattr__(self, "terminals", tuple(terms))

    @property
    def n(self) -> int:
        return self.graph.num_vertices

    @property
    def k(self) -> int:
        return len(self.commodities)

    @property
    def mode(self) -> Mode:
        return Mode.CSCP if self.sink is not None else Mode.MCP

    def cut_terminals(self, mode: Mode | None = None) -> list[Terminal]:
        """Terminals that receive cuts: all of them for MCP, non-sink ones for CSCP."""
        mode = mode or self.mode
        if mode is Mode.CSCP:
            return [t for t in self.terminals if t.vertex != self.sink]
        return list(self.terminals)

    def roots(self) -> dict[int, int]:
        return {t.id: t.vertex for t in self.terminals}

    def commodity_terminals(self, a: int) -> list[Terminal]:
        return [t for t in self.terminals if t.commodity == a]

    def same_commodity_pairs(self) -> Iterator[tuple[Terminal, Terminal]]:
        for a in range(self.k):
            yield from combinations(self.commodity_terminals(a), 2)


# ---------------------------------------------------------------- operations


def boundary(cut: Cut | int, graph: Graph) -> list[int]:
    """Indices of the edges with exactly one endpoint in ``cut``."""
    mask = cut.mask if isinstance(cut, Cut) else cut
    return [i for i, (u, v, _) in enumerate(graph.edges) if (mask >> u & 1) != (mask >> v & 1)]


def crosses(c1: Cut | int, c2: Cut | int) -> bool:
    a = c1.mask if isinstance(c1, Cut) else c1
    b = c2.mask if isinstance(c2, Cut) else c2
    return bool(a & b) and bool(a & ~b) and bool(b & ~a)


def is_laminar(family: Iterable[Cut | int]) -> bool:
    masks = [c.mask if isinstance(c, Cut) else c for c in family]
    for i in range(len(masks)):
        a = masks[i]
        for j in range(i + 1, len(masks)):
            b = masks[j]
            if a & b and a & ~b and b & ~a:
                return False
    return True


@dataclass(frozen=True)
class WeightedCut:
    cut: Cut
    weight: Fraction
    owner: int

    def __post_init__(self):
        if not self.weight > 0:
            raise InstanceError(f"cut weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class FractionalLaminarFamily:
    """Weighted cuts, each owned by one terminal.

    ``roots`` maps every terminal of the family (including terminals that own
    no cut, which then fail the unit-weight check) to its vertex.
    """

    cuts: tuple[WeightedCut, ...]
    roots: Mapping[int, int]

    @property
    def terminals(self) -> list[int]:
        return sorted(self.roots)

    def of(self, terminal: int) -> list[WeightedCut]:
        return [wc for wc in self.cuts if wc.owner == terminal]

    def total_weight(self, terminal: int) -> Fraction:
        return sum((wc.weight for wc in self.cuts if wc.owner == terminal), Fraction(0))

    def union_of(self, terminal: int) -> int:
        m = 0
        for wc in self.cuts:
            if wc.owner == terminal:
                m |= wc.cut.mask
        return m

    def problems(self) -> list[str]:
        """Definition-level defects: laminarity, root containment, unit weight."""
        out = []
        masks = [wc.cut.mask for wc in self.cuts]
        for i, j in combinations(range(len(masks)), 2):
            if crosses(masks[i], masks[j]):
                out.append(f"laminarity: cuts {self.cuts[i].cut} and {self.cuts[j].cut} cross")
                break
        for wc in self.cuts:
            if wc.owner not in self.roots:
                out.append(f"ownership: cut {wc.cut} owned by unknown terminal {wc.owner}")
            elif self.roots[wc.owner] not in wc.cut:
                out.append(f"root containment: cut {wc.cut} of terminal {wc.owner} misses vertex {self.roots[wc.owner]}")
        for t in self.terminals:
            w = self.total_weight(t)
            if w != 1:
                out.append(f"unit weight: terminal {t} has total weight {w}")
        return out


@dataclass(frozen=True)
class IntegralCutFamily:
    assignment: Mapping[int, Cut]

    def cuts(self) -> list[Cut]:
        return [self.assignment[t] for t in sorted(self.assignment)]


def load_vector(family: FractionalLaminarFamily | IntegralCutFamily | Iterable[tuple[int, Fraction | int]],
                graph: Graph) -> list:
    """Per-edge load.  Integral families yield ints, fractional ones Fractions.

    Also accepts a plain iterable of ``(mask, weight)`` pairs.
    """
    if isinstance(family, IntegralCutFamily):
        items: Iterable[tuple[int, Fraction | int]] = ((c.mask, 1) for c in family.assignment.values())
        loads: list = [0] * graph.m
    elif isinstance(family, FractionalLaminarFamily):
        items = ((wc.cut.mask, wc.weight) for wc in family.cuts)
        loads = [Fraction(0)] * graph.m
    else:
        items = family
        loads = [Fraction(0)] * graph.m
    ends = [(u, v) for u, v, _ in graph.edges]
    for mask, w in items:
        for i, (u, v) in enumerate(ends):
            if (mask >> u & 1) != (mask >> v & 1):
                loads[i] += w
    return loads


# ------------------------------------------------------------------ verifiers


@dataclass
class Report:
    ok: bool
    clause: str | None = None
    detail: str = ""
    max_load: Fraction | int = 0
    max_relative_load: Fraction = Fraction(0)
    loads: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _fail(clause: str, detail: str) -> Report:
    return Report(False, clause, detail)


def verify_fractional_feasible(family: FractionalLaminarFamily, instance: Instance,
                               capacities: Sequence[Fraction | int], mode: Mode | None = None) -> Report:
    mode = mode or instance.mode
    graph = instance.graph
    expected = {t.id for t in instance.cut_terminals(mode)}
    have = set(family.roots)
    if have != expected:
        return _fail("coverage", f"family terminals {sorted(have)} != required {sorted(expected)}")
    owners = {wc.owner for wc in family.cuts}
    if owners - expected:
        return _fail("coverage", f"cuts owned by non-terminals {sorted(owners - expected)}")
    roots = instance.roots()
    for t in expected:
        if family.roots[t] != roots[t]:
            return _fail("coverage", f"terminal {t} placed at {family.roots[t]}, expected {roots[t]}")
    for wc in family.cuts:
        if wc.cut.n != graph.num_vertices:
            return _fail("definition", f"cut {wc.cut} built for {wc.cut.n} vertices")
        if roots[wc.owner] not in wc.cut:
            return _fail("root containment", f"cut {wc.cut} of terminal {wc.owner} misses vertex {roots[wc.owner]}")
    for t in sorted(expected):
        w = family.total_weight(t)
        if w != 1:
            return _fail("unit weight", f"terminal {t} has total weight {w}")
    masks = [wc.cut.mask for wc in family.cuts]
    for i, j in combinations(range(len(masks)), 2):
        if crosses(masks[i], masks[j]):
            return _fail("laminarity", f"{family.cuts[i].cut} (terminal {family.cuts[i].owner}) crosses "
                                       f"{family.cuts[j].cut} (terminal {family.cuts[j].owner})")
    if mode is Mode.CSCP:
        sink_bit = 1 << instance.sink
        for wc in family.cuts:
            if wc.cut.mask & sink_bit:
                return _fail("separation", f"cut {wc.cut} of terminal {wc.owner} contains the sink {instance.sink}")
    else:
        unions = {t: family.union_of(t) for t in expected}
        for ti, tj in instance.same_commodity_pairs():
            if unions[ti.id] >> tj.vertex & 1 and unions[tj.id] >> ti.vertex & 1:
                return _fail("separation", f"terminals {ti.id} and {tj.id} each reach the other's vertex")
    loads = load_vector(family, graph)
    for e, (load, cap) in enumerate(zip(loads, capacities)):
        if load > cap:
            u, v, _ = graph.edges[e]
            return _fail("capacity", f"edge {e} ({u},{v}) load {load} exceeds {cap}")
    rep = Report(True, loads=loads)
    rep.max_load = max(loads, default=Fraction(0))
    return rep


def verify_integral_solution(family: IntegralCutFamily, instance: Instance, mode: Mode | None = None) -> Report:
    """Separation check for per-terminal cuts; reports per-edge loads.

    For CSCP the sink terminals carry no cut and the other terminal's cut must
    exclude the sink.
    """
    mode = mode or instance.mode
    graph = instance.graph
    need = {t.id for t in instance.cut_terminals(mode)}
    if set(family.assignment) != need:
        return _fail("coverage", f"cuts given for {sorted(family.assignment)}, required {sorted(need)}")
    for t in instance.terminals:
        if t.id not in need:
            continue
        cut = family.assignment[t.id]
        if cut.n != graph.num_vertices:
            return _fail("definition", f"cut of terminal {t.id} built for {cut.n} vertices")
        if t.vertex not in cut:
            return _fail("root containment", f"terminal {t.id} not inside its cut {cut}")
    for ti, tj in instance.same_commodity_pairs():
        pair = (1 << ti.vertex) | (1 << tj.vertex)
        sep = False
        for t in (ti, tj):
            if t.id in family.assignment and popcount(family.assignment[t.id].mask & pair) == 1:
                sep = True
        if not sep:
            return _fail("separation", f"neither cut separates terminals {ti.id} and {tj.id}")
    loads = load_vector(family, graph)
    rep = Report(True, loads=loads)
    rep.max_load = max(loads, default=0)
    rep.max_relative_load = max((Fraction(l, c) for l, c in zip(loads, graph.capacities)), default=Fraction(0))
    return rep

"""Shared machinery for the rounders: meta-node history, depths, chains of
cuts around a vertex and a mutable working copy of a fractional family."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from ..instance import (FractionalLaminarFamily, Graph, InstanceError, InvariantError, WeightedCut,
                        crosses, popcount)

ZERO = Fraction(0)


class InfeasibleFamily(InstanceError):
    """The family handed to a rounder is not feasible for its capacities."""


class MetaNodeHistory:
    """Union-find over vertices that remembers every past partition.

    ``snapshot()`` freezes the current partition; snapshot 0 is all
    singletons.  The rounders take snapshot 1 after the initial contraction
    and snapshot ``t + 1`` after iteration ``t``, so ``members_at(v, t)`` is
    the meta-node of ``v`` just before iteration ``t``.
    """

    def __init__(self, n: int):
        self.n = n
        self._parent = list(range(n))
        self._snaps: list[tuple[int, ...]] = []
        # (snapshot index it first appears in, vertex mask) per merge
        self.created: list[tuple[int, int]] = []
        self.snapshot()

    def find(self, v: int) -> int:
        p = self._parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v

    def union(self, u: int, v: int) -> bool:
        a, b = self.find(u), self.find(v)
        if a == b:
            return False
        if b < a:
            a, b = b, a
        self._parent[b] = a
        self.created.append((len(self._snaps), self.members(a)))
        return True

    def members(self, v: int) -> int:
        r = self.find(v)
        return sum(1 << u for u in range(self.n) if self.find(u) == r)

    def snapshot(self) -> int:
        self._snaps.append(tuple(self.find(v) for v in range(self.n)))
        return len(self._snaps) - 1

    @property
    def time(self) -> int:
        return len(self._snaps) - 1

    def label_at(self, v: int, t: int) -> int:
        return self._snaps[t][v]

    def members_at(self, v: int, t: int) -> int:
        snap = self._snaps[t]
        lab = snap[v]
        return sum(1 << u for u in range(self.n) if snap[u] == lab)

    def joined_at(self, u: int, v: int) -> int | None:
        """First snapshot in which ``u`` and ``v`` share a meta-node."""
        for t, snap in enumerate(self._snaps):
            if snap[u] == snap[v]:
                return t
        return None


def depth(vertex: int, family: FractionalLaminarFamily | Iterable[WeightedCut]) -> Fraction:
    """Total weight of the cuts containing ``vertex``."""
    cuts = family.cuts if isinstance(family, FractionalLaminarFamily) else family
    return sum((wc.weight for wc in cuts if wc.cut.mask >> vertex & 1), ZERO)


def cut_inclusion_order(family: FractionalLaminarFamily) -> Callable[[int, int], bool]:
    """``dominates(i, j)`` is true when ``i >_CI j``: the outermost cut of ``i``
    sits strictly inside that of ``j``, or they are equal and ``i < j``."""
    outer = {t: family.union_of(t) for t in family.terminals}

    def dominates(i: int, j: int) -> bool:
        if i == j:
            return False
        oi, oj = outer[i], outer[j]
        if oi == oj:
            return i < j
        return oi & ~oj == 0

    return dominates


@dataclass
class Piece:
    mask: int
    weight: Fraction
    owner: int
    seq: int


def innermost_slice(chain: Sequence[WeightedCut], x: Fraction) -> list[WeightedCut]:
    """Innermost cuts of ``chain`` (ordered inside out) with weight exactly ``x``.

    The boundary cut enters with only the missing part of its weight.
    """
    x = Fraction(x)
    out = []
    left = x
    for wc in chain:
        if left <= 0:
            break
        take = min(wc.weight, left)
        out.append(wc if take == wc.weight else WeightedCut(wc.cut, take, wc.owner))
        left -= take
    if left > 0:
        raise InvariantError(f"chain weight is below {x}")
    return out


class WorkingFamily:
    """Mutable fractional family; a split keeps both halves in place."""

    def __init__(self, family: FractionalLaminarFamily, graph: Graph):
        self.graph = graph
        self.n = graph.num_vertices
        self.roots = dict(family.roots)
        self._seq = 0
        self.pieces: list[Piece] = []
        for wc in family.cuts:
            self.add(wc.cut.mask, wc.weight, wc.owner)
        self._ends = [(u, v) for u, v, _ in graph.edges]

    def add(self, mask: int, weight: Fraction, owner: int) -> Piece:
        p = Piece(mask, Fraction(weight), owner, self._seq)
        self._seq += 1
        self.pieces.append(p)
        return p

    def remove(self, piece: Piece):
        self.pieces.remove(piece)

    def of(self, owner: int) -> list[Piece]:
        return [p for p in self.pieces if p.owner == owner]

    def outer(self, owner: int) -> int:
        m = 0
        for p in self.pieces:
            if p.owner == owner:
                m |= p.mask
        return m

    def depth(self, v: int) -> Fraction:
        return sum((p.weight for p in self.pieces if p.mask >> v & 1), ZERO)

    def chain(self, v: int) -> list[Piece]:
        """Pieces containing ``v``, inside out.  Equal sets put the owner with
        the smaller outermost cut first, then the lower id."""
        outer: dict[int, int] = {}
        for p in self.pieces:
            outer[p.owner] = outer.get(p.owner, 0) | p.mask
        inside = [p for p in self.pieces if p.mask >> v & 1]
        inside.sort(key=lambda p: (popcount(p.mask), popcount(outer[p.owner]), p.owner, p.seq))
        return inside

    def split(self, piece: Piece, keep: Fraction) -> Piece:
        """Cut ``piece`` down to weight ``keep``; the rest becomes a new piece
        right after it.  Returns the new piece."""
        if not 0 < keep < piece.weight:
            raise InvariantError(f"cannot split weight {piece.weight} at {keep}")
        rest = Piece(piece.mask, piece.weight - keep, piece.owner, self._seq)
        self._seq += 1
        piece.weight = keep
        self.pieces.insert(self.pieces.index(piece) + 1, rest)
        return rest

    def slice(self, chain: list[Piece], x: Fraction) -> list[Piece]:
        """Innermost pieces of ``chain`` with weight exactly ``x``, splitting
        the boundary piece in the family itself."""
        out = []
        left = Fraction(x)
        for p in chain:
            if left <= 0:
                break
            if p.weight > left:
                self.split(p, left)
            out.append(p)
            left -= p.weight
        if left > 0:
            raise InvariantError(f"chain weight is below {x}")
        return out

    def loads(self) -> list[Fraction]:
        out = [ZERO] * len(self._ends)
        for p in self.pieces:
            m = p.mask
            for e, (u, v) in enumerate(self._ends):
                if (m >> u & 1) != (m >> v & 1):
                    out[e] += p.weight
        return out

    def crossing(self, e: int) -> list[Piece]:
        u, v = self._ends[e]
        return [p for p in self.pieces if (p.mask >> u & 1) != (p.mask >> v & 1)]

    def problems(self, terminals: Iterable[int], sink: int | None = None) -> list[str]:
        out = []
        terms = set(terminals)
        weight: dict[int, Fraction] = {t: ZERO for t in terms}
        for p in self.pieces:
            if p.owner not in terms:
                out.append(f"piece {p.mask:b} owned by finished terminal {p.owner}")
                continue
            weight[p.owner] += p.weight
            if not p.mask >> self.roots[p.owner] & 1:
                out.append(f"piece {p.mask:b} misses vertex {self.roots[p.owner]} of terminal {p.owner}")
            if sink is not None and p.mask >> sink & 1:
                out.append(f"piece {p.mask:b} of terminal {p.owner} contains the sink")
        for t, w in weight.items():
            if w != 1:
                out.append(f"terminal {t} has weight {w}")
        masks = sorted({p.mask for p in self.pieces})
        for a in range(len(masks)):
            for b in range(a + 1, len(masks)):
                if crosses(masks[a], masks[b]):
                    out.append(f"pieces {masks[a]:b} and {masks[b]:b} cross")
                    return out
        return out


def integral_loads(cuts: Iterable[int], graph: Graph) -> list[int]:
    out = [0] * graph.m
    for m in cuts:
        for e, (u, v, _) in enumerate(graph.edges):
            if (m >> u & 1) != (m >> v & 1):
                out[e] += 1
    return out

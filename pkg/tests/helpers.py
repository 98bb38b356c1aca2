"""Small builders shared by the test modules."""

import random
from fractions import Fraction

from cutpack.generators import random_instance
from cutpack.instance import (Cut, FractionalLaminarFamily, Graph, Instance, WeightedCut, is_laminar, load_vector,
                              popcount)


def path(n, cap=1):
    return Graph(n, tuple((i, i + 1, cap) for i in range(n - 1)))


def fam(n, roots, *cuts):
    """``cuts`` are ``(vertices, weight, owner)`` triples."""
    return FractionalLaminarFamily(
        tuple(WeightedCut(Cut.of(vs, n), Fraction(w), o) for vs, w, o in cuts), dict(roots))


def star_cscp(leaves=2, cap=1):
    # center 0 is the sink, leaves 1..leaves
    g = Graph(leaves + 1, tuple((0, v, cap) for v in range(1, leaves + 1)))
    return Instance(g, tuple((v, 0) for v in range(1, leaves + 1)), 0)


def integral_input(seed, n_max=10):
    """Random instance plus one integral cut per terminal: the terminal's own
    vertex and each vertex outside its commodity with probability one half."""
    rng = random.Random(seed)
    n = rng.randint(4, n_max)
    inst = random_instance(seed, n=n, k=rng.randint(1, 4), terminals=rng.randint(2, min(3, n)))
    cuts = []
    for verts in inst.commodities:
        cuts.append([(1 << v) | sum(1 << u for u in range(n) if u not in verts and rng.random() < 0.5)
                     for v in verts])
    return inst, cuts


def intlam2_problems(inst, cuts, out):
    """Everything wrong with an integer re-cut ``out`` of ``cuts``."""
    flat = [m for cs in out for m in cs]
    bad = []
    if not is_laminar(flat):
        bad.append("not laminar")
    before = load_vector([(m, 1) for cs in cuts for m in cs], inst.graph)
    after = load_vector([(m, 1) for m in flat], inst.graph)
    bad += [f"edge {e} load {b} > 2*{a}" for e, (a, b) in enumerate(zip(before, after)) if b > 2 * a]
    for a, verts in enumerate(inst.commodities):
        for x in range(len(verts)):
            if not out[a][x] >> verts[x] & 1:
                bad.append(f"commodity {a} cut {x} lost its vertex")
            for y in range(x + 1, len(verts)):
                pair = (1 << verts[x]) | (1 << verts[y])
                if popcount(out[a][x] & pair) != 1 and popcount(out[a][y] & pair) != 1:
                    bad.append(f"commodity {a} terminals {x},{y} not separated")
    if any(m == inst.graph.all_mask for m in flat):
        bad.append("a cut covers every vertex")
    return bad

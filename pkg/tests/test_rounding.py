import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cutpack.generators import random_laminar_family
from cutpack.instance import Cut, Graph, Instance, InvariantError, WeightedCut, load_vector, verify_integral_solution
from cutpack.rounding import round1, round2
from cutpack.rounding.common import (InfeasibleFamily, MetaNodeHistory, WorkingFamily, cut_inclusion_order,
                                     depth, innermost_slice)
from cutpack.rounding.round2 import EdgeClass, Round2Stats, _classify

from helpers import fam, path, star_cscp

F = Fraction
HALF = F(1, 2)


def test_depth_and_slice():
    f = fam(4, {0: 0}, ([0], F(1, 3), 0), ([0, 1], F(2, 3), 0))
    assert depth(0, f) == 1 and depth(1, f) == F(2, 3) and depth(3, f) == 0
    chain = sorted(f.cuts, key=lambda c: c.cut.mask.bit_count())
    out = innermost_slice(chain, HALF)
    assert [(c.cut.mask, c.weight) for c in out] == [(0b01, F(1, 3)), (0b11, F(1, 6))]
    with pytest.raises(InvariantError):
        innermost_slice(chain, F(2))


def test_cut_inclusion_order():
    f = fam(4, {0: 0, 1: 1, 2: 2}, ([0, 1], 1, 0), ([0, 1, 2], 1, 1), ([2], HALF, 2), ([0, 1, 2], HALF, 2))
    dom = cut_inclusion_order(f)
    assert dom(0, 1) and not dom(1, 0)
    # equal outermost cuts fall back to the id
    assert dom(1, 2) and not dom(2, 1)
    assert not dom(0, 0)


def test_meta_node_history():
    h = MetaNodeHistory(4)
    h.union(0, 1)
    assert h.snapshot() == 1
    h.union(1, 2)
    h.snapshot()
    assert h.members_at(0, 0) == 0b0001
    assert h.members_at(0, 1) == 0b0011
    assert h.members_at(2, 2) == 0b0111
    assert h.joined_at(0, 2) == 2 and h.joined_at(0, 3) is None
    assert h.time == 2 and h.members(3) == 0b1000


def test_working_family_split_and_slice():
    w = WorkingFamily(fam(3, {0: 0}, ([0], HALF, 0), ([0, 1], HALF, 0)), path(3))
    got = w.slice(w.chain(0), F(3, 4))
    assert [(p.mask, p.weight) for p in got] == [(0b01, HALF), (0b11, F(1, 4))]
    assert sum(p.weight for p in w.pieces) == 1 and len(w.pieces) == 3
    assert w.loads() == [HALF, F(1, 2)]
    assert w.problems([0]) == []


def test_round1_star_takes_singletons():
    inst = star_cscp(3)
    f = fam(4, {0: 1, 2: 2, 4: 3}, ([1], 1, 0), ([2], 1, 2), ([3], 1, 4))
    out = round1(inst, [1, 1, 1], f)
    assert {t: c.members for t, c in out.assignment.items()} == {0: [1], 2: [2], 4: [3]}


def test_round1_hands_freed_cut_to_other_terminal():
    # sink 3; terminal 0 at vertex 0 owns {0} and {0,1,2}, terminal 2 at vertex 1 owns {0,1} and {0,1,2}
    inst = Instance(path(4), ((0, 3), (1, 3)), 3)
    f = fam(4, {0: 0, 2: 1}, ([0], HALF, 0), ([0, 1, 2], HALF, 0), ([0, 1], HALF, 2), ([0, 1, 2], HALF, 2))
    out = round1(inst, [1, 1, 1], f)
    assert out.assignment == {0: Cut(0b0001, 4), 2: Cut(0b0111, 4)}
    assert load_vector(out, inst.graph) == [1, 0, 1]


def test_round1_rejects_infeasible_family():
    inst = star_cscp(2)
    f = fam(3, {0: 1, 2: 2}, ([1], 1, 0), ([2], 1, 2))
    with pytest.raises(InfeasibleFamily):
        round1(inst, [0, 0], f)


def test_round2_single_edge():
    inst = Instance(path(2), ((0, 1),))
    f = fam(2, {0: 0, 1: 1}, ([0], 1, 0), ([1], 1, 1))
    out = round2(inst, [2], f)
    assert out.assignment == {0: Cut(0b01, 2), 1: Cut(0b10, 2)}


def test_round2_fractional_path():
    inst = Instance(path(3), ((0, 2),))
    f = fam(3, {0: 0, 1: 2}, ([0], HALF, 0), ([0, 1], HALF, 0), ([2], 1, 1))
    stats = Round2Stats()
    out = round2(inst, [1, 2], f, stats=stats)
    assert out.assignment == {0: Cut(0b001, 3), 1: Cut(0b100, 3)}
    assert stats.defaults == 0
    assert all(cl is EdgeClass.Z for cl in stats.classes.values())


def test_round2_rejects_sink_instance():
    with pytest.raises(ValueError):
        round2(star_cscp(2), [1, 1], fam(3, {0: 1, 2: 2}, ([1], 1, 0), ([2], 1, 2)))


def test_edge_classes():
    assert _classify(EdgeClass.X_MINUS, 0, HALF, 1) is EdgeClass.X_MINUS
    assert _classify(EdgeClass.X_MINUS, 1, HALF, 1) is EdgeClass.X0
    assert _classify(EdgeClass.X0, 2, HALF, 1) is EdgeClass.X1
    assert _classify(EdgeClass.X1, 3, HALF, 1) is EdgeClass.Y
    # Y is sticky until the fractional load vanishes
    assert _classify(EdgeClass.Y, 0, HALF, 5) is EdgeClass.Y
    assert _classify(EdgeClass.Y, 3, F(0), 1) is EdgeClass.Z
    assert _classify(EdgeClass.Z, 0, HALF, 1) is EdgeClass.Z


def _rounding_problems(inst, caps, out, slack):
    rep = verify_integral_solution(out, inst)
    bad = [] if rep.ok else [rep.clause]
    bad += [f"edge {e}: {l} > {c}+{slack}" for e, (l, c) in enumerate(zip(rep.loads, caps)) if l > c + slack]
    return bad


@given(st.integers(0, 10 ** 6))
@settings(max_examples=80)
def test_round1_random_families(seed):
    rng = random.Random(seed)
    inst, f = random_laminar_family(seed, n=rng.randint(4, 10), k=rng.randint(1, 5), cscp=True,
                                    max_cuts=rng.randint(1, 4))
    caps = inst.graph.capacities
    out = round1(inst, caps, f)
    assert _rounding_problems(inst, caps, out, 1) == []


@given(st.integers(0, 10 ** 6))
@settings(max_examples=80)
def test_round2_random_families(seed):
    rng = random.Random(seed)
    inst, f = random_laminar_family(seed, n=rng.randint(4, 10), k=rng.randint(1, 4),
                                    terminals=rng.randint(2, 3), max_cuts=rng.randint(1, 4))
    caps = inst.graph.capacities
    out = round2(inst, caps, f)
    assert _rounding_problems(inst, caps, out, 3) == []


def test_round1_output_cuts_avoid_the_sink():
    for seed in range(30):
        inst, f = random_laminar_family(seed, n=7, k=3, cscp=True)
        out = round1(inst, inst.graph.capacities, f)
        assert all(not c.mask >> inst.sink & 1 for c in out.assignment.values())


def test_slice_examples():
    chain = [WeightedCut(Cut(0b001, 3), HALF, 0), WeightedCut(Cut(0b011, 3), HALF, 0)]
    assert innermost_slice(chain, F(1)) == chain
    assert innermost_slice(chain, F(0)) == []
    got = innermost_slice(chain, F(3, 4))
    assert [c.weight for c in got] == [HALF, F(1, 4)]


def test_round1_nested_path():
    # r1 = 0, r2 = 1, sink 2; terminal 0 owns {0}, terminal 2 owns {0,1}
    inst = Instance(path(3), ((0, 2), (1, 2)), 2)
    f = fam(3, {0: 0, 2: 1}, ([0], 1, 0), ([0, 1], 1, 2))
    out = round1(inst, [1, 1], f)
    loads = load_vector(out, inst.graph)
    assert loads[1] <= 2 and max(loads) <= 2
    assert verify_integral_solution(out, inst).ok


def test_round2_disjoint_components():
    inst = Instance(Graph(4, ((0, 1, 1), (2, 3, 1))), ((0, 1), (2, 3)))
    f = fam(4, {0: 0, 1: 1, 2: 2, 3: 3}, ([0], 1, 0), ([1], 1, 1), ([2], 1, 2), ([3], 1, 3))
    out = round2(inst, [2, 2], f)
    assert {t: c.mask for t, c in out.assignment.items()} == {0: 1, 1: 2, 2: 4, 3: 8}
    assert load_vector(out, inst.graph) == [2, 2]


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40)
def test_depth_difference_across_an_edge(seed):
    inst, f = random_laminar_family(seed, n=7, k=3, terminals=2)
    for u, v, _ in inst.graph.edges:
        cross = [c for c in f.cuts if (c.cut.mask >> u & 1) != (c.cut.mask >> v & 1)]
        alpha = sum((c.weight for c in cross if c.cut.mask >> u & 1), F(0))
        beta = sum((c.weight for c in cross if c.cut.mask >> v & 1), F(0))
        assert depth(v, f) == depth(u, f) - alpha + beta


def test_round2_default_path():
    # a seeded family where one terminal's meta-node touches an overloaded edge
    seed = 1678
    rng = random.Random(seed)
    inst, f = random_laminar_family(seed, n=rng.randint(4, 12), k=rng.randint(2, 8), terminals=rng.randint(2, 4),
                                    max_cuts=rng.randint(1, 6))
    stats = Round2Stats()
    out = round2(inst, inst.graph.capacities, f, stats=stats)
    assert stats.defaults >= 1
    assert _rounding_problems(inst, inst.graph.capacities, out, 3) == []

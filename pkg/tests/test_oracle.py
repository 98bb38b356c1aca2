import random
from fractions import Fraction
from itertools import product

import pytest

from cutpack.generators import clique_chain, random_instance
from cutpack.instance import Cut, Graph, Instance, IntegralCutFamily, Mode, verify_integral_solution
from cutpack.oracle import BudgetExceeded, brute_force_opt, check_guarantee, load_bound, search_size

from helpers import path


def naive_opt(inst):
    """Every coloring of every commodity, no pruning at all."""
    g = inst.graph
    n = g.num_vertices
    per = []
    for verts in inst.commodities:
        free = [v for v in range(n) if v not in verts]
        opts = []
        for combo in product(range(len(verts)), repeat=len(free)):
            color = {v: s for s, v in enumerate(verts)}
            color.update(zip(free, combo))
            opts.append([int(color[u] != color[v]) for u, v, _ in g.edges])
        per.append(opts)
    best = None
    for pick in product(*per):
        load = [sum(col) for col in zip(*pick)]
        val = max(Fraction(l, c) for l, c in zip(load, g.capacities))
        best = val if best is None else min(best, val)
    return best


def test_single_edge():
    res = brute_force_opt(Instance(path(2), ((0, 1),)))
    assert res.optimal_max_relative_load == 1


def test_identical_commodities_on_a_path():
    res = brute_force_opt(Instance(path(3), ((0, 2), (0, 2))))
    assert res.optimal_max_relative_load == 1


def test_clique_chain_needs_two():
    inst = clique_chain(4)
    res = brute_force_opt(inst)
    assert res.optimal_max_relative_load >= 2
    assert verify_integral_solution(res.witness, inst).ok


def test_disconnected_commodity_costs_nothing():
    g = Graph(4, ((0, 1, 1), (2, 3, 1)))
    res = brute_force_opt(Instance(g, ((0, 2),)))
    assert res.optimal_max_relative_load == 0


def test_matches_naive_enumeration():
    checked = 0
    for seed in range(60):
        rng = random.Random(seed)
        inst = random_instance(seed, n=rng.randint(3, 5), k=rng.randint(1, 3), terminals=rng.randint(2, 3),
                               c_max=2, cscp=rng.random() < 0.3)
        if search_size(inst) > 20000:
            continue
        res = brute_force_opt(inst)
        assert res.optimal_max_relative_load == naive_opt(inst), seed
        checked += 1
    assert checked >= 30


def test_witness_reaches_reported_value():
    for seed in range(20):
        inst = random_instance(seed, n=5, k=2, terminals=2)
        res = brute_force_opt(inst)
        rep = verify_integral_solution(res.witness, inst)
        assert rep.ok
        # a cut family counts each terminal cut; the coloring counts each commodity once
        loads = [0] * inst.graph.m
        for sides in res.colorings:
            for e, (u, v, _) in enumerate(inst.graph.edges):
                if not any(s >> u & 1 and s >> v & 1 for s in sides):
                    loads[e] += 1
        assert max(Fraction(l, c) for l, c in zip(loads, inst.graph.capacities)) == res.optimal_max_relative_load


def test_budget_refusal():
    inst = random_instance(3, n=9, k=3, terminals=3)
    with pytest.raises(BudgetExceeded):
        brute_force_opt(inst, budget=10)


def test_guarantee_bounds():
    assert load_bound(1, Mode.MCP) == 12 and load_bound(3, Mode.CSCP) == 5


def test_guarantee_flags_overload():
    inst = Instance(path(2, cap=1), ((0, 1),), None)
    good = IntegralCutFamily({0: Cut(0b01, 2), 1: Cut(0b10, 2)})
    rep = check_guarantee(good, inst, [1])
    assert rep.ok and rep.bound == "8c+4" and rep.max_slack == 10
    # three terminals whose cuts all cross the sink edge: load 3 against c + 2 = 2
    sink_inst = Instance(path(4), ((0, 3), (1, 3), (2, 3)), 3)
    cuts = IntegralCutFamily({0: Cut(0b0111, 4), 2: Cut(0b0111, 4), 4: Cut(0b0111, 4)})
    rep = check_guarantee(cuts, sink_inst, [0, 0, 0])
    assert rep.bound == "c+2" and not rep.ok
    assert rep.violations == [(2, 3, 2)]
    assert check_guarantee(cuts, sink_inst, [0, 0, 1]).ok


def test_guarantee_reports_invalid_cuts():
    inst = Instance(path(3), ((0, 2),))
    broken = IntegralCutFamily({0: Cut(0b010, 3), 1: Cut(0b100, 3)})
    rep = check_guarantee(broken, inst, [1, 1])
    assert not rep.ok and not rep.integral.ok

"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line.

All comparisons are exact (rational arithmetic, zero tolerance).  The
runtime limits are the only tolerances: the 200-instance pipeline corpus
must finish within 600 s and the oracle on clique_chain(6) within 60 s.
"""

import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from cutpack.generators import clique_chain, random_instance, random_laminar_family
from cutpack.instance import Mode, verify_fractional_feasible, verify_integral_solution
from cutpack.io import instance_to_json
from cutpack.laminar.intlam2 import integer_lam2
from cutpack.lp import solve_mcp_lp
from cutpack.oracle import brute_force_opt, check_guarantee, load_bound
from cutpack.pipeline import solve
from cutpack.rounding import round1, round2
from cutpack.rounding.round2 import Round2Stats

from helpers import integral_input, intlam2_problems

CORPUS_SIZE = 100
CORPUS_TIME_LIMIT_S = 600
ORACLE_TIME_LIMIT_S = 60
ORACLE_MAX_N = 7

ROOT = Path(__file__).resolve().parent.parent


def corpus_instance(kind, seed):
    """Seeded instance with n in [5, 12], k <= 4, |S_a| <= 3, c_e <= 3, and a grid D in {4, 6}."""
    rng = random.Random(f"{kind}-{seed}")
    n = rng.randint(5, 12)
    k = rng.randint(1, 4)
    inst = random_instance(rng.randrange(1 << 30), n=n, k=k,
                           terminals=rng.randint(2, 3) if kind == "mcp" else 2,
                           c_max=3, density=rng.uniform(0.25, 0.5), cscp=kind == "cscp")
    return inst, (4 if seed % 2 == 0 else 6) if kind == "mcp" else None


def corpus():
    return [(kind, seed) for kind in ("mcp", "cscp") for seed in range(CORPUS_SIZE)]


def _report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n{name}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture(scope="module")
def runs():
    out = {}
    start = time.perf_counter()
    for kind, seed in corpus():
        inst, grid = corpus_instance(kind, seed)
        try:
            res = solve(inst, grid=grid)
            out[kind, seed] = (inst, grid, res, None)
        except Exception as exc:  # recorded and reported by the criteria
            out[kind, seed] = (inst, grid, None, f"{type(exc).__name__}: {exc}")
    return out, time.perf_counter() - start


def _bound_failures(runs, kind):
    bad = []
    for (kd, seed), (inst, _, res, err) in runs.items():
        if kd != kind:
            continue
        if err:
            bad.append(f"{kind}-{seed}: {err}")
            continue
        mode = Mode.MCP if kind == "mcp" else Mode.CSCP
        rep = verify_integral_solution(res.cuts, inst)
        if not rep.ok:
            bad.append(f"{kind}-{seed}: {rep.clause}")
        for e, (l, c) in enumerate(zip(rep.loads, res.chat)):
            if l > load_bound(c, mode):
                bad.append(f"{kind}-{seed}: edge {e} load {l} > {load_bound(c, mode)}")
    return bad


def test_c1_mcp_bound(runs, capsys):
    results, elapsed = runs
    bad = _bound_failures(results, "mcp")
    ok = not bad and elapsed < CORPUS_TIME_LIMIT_S
    _report(capsys, "C1 multiway load <= 8c+4", ok,
            f"{CORPUS_SIZE} instances, {len(bad)} failures, corpus time {elapsed:.0f}s of {CORPUS_TIME_LIMIT_S}s")
    assert not bad, bad[:5]
    assert elapsed < CORPUS_TIME_LIMIT_S


def test_c2_cscp_bound(runs, capsys):
    bad = _bound_failures(runs[0], "cscp")
    _report(capsys, "C2 common-sink load <= c+2", not bad, f"{CORPUS_SIZE} instances, {len(bad)} failures")
    assert not bad, bad[:5]


def _synthetic(seed, cscp):
    rng = random.Random(seed)
    return random_laminar_family(seed, n=rng.randint(4, 10), k=rng.randint(1, 5),
                                 terminals=2 if cscp else rng.randint(2, 3), cscp=cscp,
                                 max_cuts=rng.randint(1, 4))


def test_c3_round1_bound(capsys):
    bad = []
    for seed in range(200):
        inst, fam = _synthetic(seed, True)
        caps = inst.graph.capacities
        try:
            out = round1(inst, caps, fam, check=True)
        except Exception as exc:
            bad.append(f"seed {seed}: {type(exc).__name__}: {exc}")
            continue
        rep = verify_integral_solution(out, inst)
        if not rep.ok or any(l > c + 1 for l, c in zip(rep.loads, caps)):
            bad.append(f"seed {seed}: {rep.clause or 'load above c+1'}")
    _report(capsys, "C3 Round-1 load <= c+1 with running invariants", not bad, f"200 families, {len(bad)} failures")
    assert not bad, bad[:5]


def test_c4_round2_bound(capsys):
    bad = []
    defaults = 0
    for seed in range(200):
        inst, fam = _synthetic(10_000 + seed, False)
        caps = inst.graph.capacities
        stats = Round2Stats()
        try:
            out = round2(inst, caps, fam, check=True, stats=stats)
        except Exception as exc:
            bad.append(f"seed {seed}: {type(exc).__name__}: {exc}")
            continue
        defaults += stats.defaults
        rep = verify_integral_solution(out, inst)
        if not rep.ok or any(l > c + 3 for l, c in zip(rep.loads, caps)):
            bad.append(f"seed {seed}: {rep.clause or 'load above c+3'}")
    _report(capsys, "C4 Round-2 load <= c+3 with running invariants", not bad,
            f"200 families, {len(bad)} failures, {defaults} defaulted terminals")
    assert not bad, bad[:5]


def test_c5_integer_lam2(capsys):
    bad = []
    for seed in range(500):
        inst, cuts = integral_input(seed, n_max=10)
        try:
            out = integer_lam2(inst.graph, inst.commodities, cuts)
        except Exception as exc:
            bad.append(f"seed {seed}: {type(exc).__name__}: {exc}")
            continue
        bad += [f"seed {seed}: {p}" for p in intlam2_problems(inst, cuts, out)]
    _report(capsys, "C5 integer laminarization", not bad, f"500 inputs, {len(bad)} failures")
    assert not bad, bad[:5]


def test_c6_laminar_feasibility(runs, capsys):
    bad = []
    for (kind, seed), (inst, grid, res, err) in runs[0].items():
        if err:
            bad.append(f"{kind}-{seed}: {err}")
            continue
        lam = res.lam
        if kind == "cscp":
            big_n = inst.n * inst.k
            caps = [lam * c + Fraction(1, big_n) for c in inst.graph.capacities]
        else:
            caps = [4 * (2 * lam * c + Fraction(1, grid)) for c in inst.graph.capacities]
        rep = verify_fractional_feasible(res.family, inst, caps)
        if not rep.ok:
            bad.append(f"{kind}-{seed}: {rep.clause}: {rep.detail}")
    _report(capsys, "C6 laminar families feasible", not bad, f"{2 * CORPUS_SIZE} families, {len(bad)} failures")
    assert not bad, bad[:5]


def test_c7_integrality_gap(capsys):
    rows = []
    ok = True
    for n in (4, 6):
        inst = clique_chain(n)
        lam = solve_mcp_lp(inst).lam
        t0 = time.perf_counter()
        opt = brute_force_opt(inst).optimal_max_relative_load
        dt = time.perf_counter() - t0
        good = lam <= 1 and opt >= 2 and (n != 6 or dt < ORACLE_TIME_LIMIT_S)
        ok &= good
        rows.append(f"n={n}: lambda {lam}, optimum {opt}, oracle {dt:.1f}s")
    _report(capsys, "C7 integrality gap >= 2", ok, "; ".join(rows))
    assert ok, rows


def test_c8_oracle_sandwich(runs, capsys):
    bad = []
    checked = 0
    for (kind, seed), (inst, _, res, err) in runs[0].items():
        if inst.n > ORACLE_MAX_N:
            continue
        if err:
            bad.append(f"{kind}-{seed}: {err}")
            continue
        checked += 1
        opt = brute_force_opt(inst).optimal_max_relative_load
        if res.lam > opt:
            bad.append(f"{kind}-{seed}: lambda {res.lam} > optimum {opt}")
        g = check_guarantee(res.cuts, inst, res.chat)
        if not g.integral.ok:
            bad.append(f"{kind}-{seed}: pipeline witness infeasible ({g.integral.clause})")
        over = [e for e, (l, c) in enumerate(zip(g.integral.loads, res.chat)) if l > 8 * c + 4]
        if over:
            bad.append(f"{kind}-{seed}: load above 8c+4 on edges {over}")
    ok = not bad and checked > 0
    _report(capsys, "C8 oracle sandwich", ok, f"{checked} instances with n <= {ORACLE_MAX_N}, {len(bad)} failures")
    assert ok, bad[:5]


_RESOLVE = """
import sys
from pathlib import Path
from cutpack.io import instance_from_json
from cutpack.pipeline import solve
src, dst = Path(sys.argv[1]), Path(sys.argv[2])
for p in sorted(src.glob("*.json")):
    grid = None if p.stem.startswith("cscp") else int(p.stem.split("-")[2])
    res = solve(instance_from_json(p.read_text()), grid=grid)
    (dst / p.name).write_text(res.solution().to_json())
"""


def test_c9_determinism(runs, capsys, tmp_path):
    """A second run of the whole corpus in a fresh interpreter, with a different
    hash seed, must write byte-identical solution files."""
    src, dst = tmp_path / "instances", tmp_path / "solutions"
    src.mkdir()
    dst.mkdir()
    first = {}
    for (kind, seed), (inst, grid, res, err) in runs[0].items():
        name = f"{kind}-{seed:03d}-{grid or 0}.json"
        (src / name).write_text(instance_to_json(inst))
        first[name] = res.solution().to_json() if res else err
    env = dict(os.environ, PYTHONHASHSEED="12345", PYTHONPATH=str(ROOT / "src"))
    proc = subprocess.run([sys.executable, "-c", _RESOLVE, str(src), str(dst)], env=env,
                          capture_output=True, text=True)
    diff = [name for name, text in first.items()
            if not (dst / name).exists() or (dst / name).read_text() != text]
    ok = proc.returncode == 0 and not diff
    _report(capsys, "C9 deterministic solution files", ok,
            f"{len(first)} files compared, {len(diff)} differ, rerun exit {proc.returncode}")
    assert proc.returncode == 0, proc.stderr[-2000:]
    assert not diff, diff[:5]

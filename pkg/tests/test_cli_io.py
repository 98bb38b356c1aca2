import json
from fractions import Fraction

import pytest

from cutpack.cli import BENCH_COLUMNS, main
from cutpack.generators import clique_chain, random_instance
from cutpack.instance import Graph, Instance
from cutpack.io import (ParseError, fraction_str, instance_from_json, instance_to_json, parse_fraction,
                        solution_from_json)
from cutpack.pipeline import solve


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fraction_strings():
    assert fraction_str(1) == "1/1" and fraction_str(Fraction(6, 4)) == "3/2"
    assert parse_fraction("3/2", "x") == Fraction(3, 2)
    for bad in ("1.5", 3, "a/b", "1/0"):
        with pytest.raises(ParseError):
            parse_fraction(bad, "x")


@pytest.mark.parametrize("inst", [clique_chain(2), random_instance(5, n=7, k=3, cscp=True),
                                  random_instance(6, n=6, k=2, terminals=3)])
def test_instance_round_trip(inst):
    text = instance_to_json(inst)
    again = instance_from_json(text)
    assert again == inst and instance_to_json(again) == text


def test_solution_round_trip():
    res = solve(random_instance(2, n=6, k=2, cscp=True))
    sol = res.solution()
    back = solution_from_json(sol.to_json(), 6)
    assert back.to_json() == sol.to_json()
    assert json.loads(sol.to_json())["lambda"] == fraction_str(res.lam)


@pytest.mark.parametrize("text", ["{", "[]", '{"n": 3, "edges": []}', '{"n": 3, "edges": [[0, 1]], "commodities": []}',
                                  '{"n": 3, "edges": [], "commodities": [[0, 1]], "extra": 1}',
                                  '{"n": 2, "edges": [[0, 5, 1]], "commodities": [[0, 1]]}'])
def test_instance_parse_errors(text):
    with pytest.raises(ParseError):
        instance_from_json(text)


def test_gen_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "gen", "random", "--seed", 7, "--n", 7, "-o", a)[0] == 0
    assert run(capsys, "gen", "random", "--seed", 7, "--n", 7, "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    instance_from_json(a.read_text())


def test_gen_rejects_single_terminal(capsys):
    code, _, err = run(capsys, "gen", "random", "--terminals", 1)
    assert code == 2 and err


def test_usage_and_parse_errors_exit_2(tmp_path, capsys):
    assert run(capsys, "solve", "--bogus")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2}')
    assert run(capsys, "solve", "-i", bad)[0] == 2
    assert run(capsys, "solve", "-i", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "bench", "-i", tmp_path / "nowhere")[0] == 2


def _solve_files(tmp_path, capsys, inst):
    ip, sp = tmp_path / "inst.json", tmp_path / "sol.json"
    ip.write_text(instance_to_json(inst))
    code, _, _ = run(capsys, "solve", "-i", ip, "-o", sp)
    return code, ip, sp


def test_solve_then_verify(tmp_path, capsys):
    code, ip, sp = _solve_files(tmp_path, capsys, clique_chain(4))
    assert code == 0
    code, out, _ = run(capsys, "verify", "-i", ip, "-s", sp)
    assert code == 0 and out.startswith("OK bound c+2")


def test_verify_names_the_broken_clause(tmp_path, capsys):
    _, ip, sp = _solve_files(tmp_path, capsys, random_instance(4, n=6, k=2, terminals=2))
    doc = json.loads(sp.read_text())
    first = next(iter(doc["cuts"]))
    doc["cuts"][first] = [v for v in range(6) if v not in doc["cuts"][first]]
    sp.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "-i", ip, "-s", sp)
    assert code == 1 and out.startswith("FAIL root containment")


def test_verify_rejects_wrong_lambda(tmp_path, capsys):
    _, ip, sp = _solve_files(tmp_path, capsys, clique_chain(2))
    doc = json.loads(sp.read_text())
    doc["lambda"] = "1/7"
    sp.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "-i", ip, "-s", sp)
    assert code == 1 and out.startswith("FAIL lambda")


def test_verify_reports_bound_breach(tmp_path, capsys):
    # five terminals on a path all cut the sink edge: load 5 against c_hat + 2 = 3
    inst = Instance(Graph(6, tuple((i, i + 1, 1) for i in range(5))), tuple((v, 5) for v in range(5)), 5)
    _, ip, sp = _solve_files(tmp_path, capsys, inst)
    doc = json.loads(sp.read_text())
    assert doc["lambda"] == "1/1"
    doc["cuts"] = {t: [0, 1, 2, 3, 4] for t in doc["cuts"]}
    doc.pop("loads")
    sp.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "-i", ip, "-s", sp)
    assert code == 1 and "FAIL bound: edge 4 (4,5) load 5 exceeds c+2 = 3" in out


def test_oracle_command(tmp_path, capsys):
    ip = tmp_path / "cc.json"
    ip.write_text(instance_to_json(clique_chain(4)))
    code, out, _ = run(capsys, "oracle", "-i", ip)
    assert code == 0 and json.loads(out)["optimum"] == "2/1"
    code, _, err = run(capsys, "oracle", "-i", ip, "--budget", 5)
    assert code == 4 and "refused" in err


def test_bench_empty_dir(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run(capsys, "bench", "-i", tmp_path, "-o", out)[0] == 0
    assert out.read_text() == ",".join(BENCH_COLUMNS) + "\n"


def test_bench_rows(tmp_path, capsys):
    d = tmp_path / "inst"
    d.mkdir()
    for s in range(10):
        (d / f"i{s:02d}.json").write_text(instance_to_json(random_instance(s, n=6, k=2, cscp=s % 2 == 0)))
    out = tmp_path / "b.csv"
    code, _, _ = run(capsys, "bench", "-i", d, "-o", out, "--jobs", 2)
    lines = out.read_text().splitlines()
    assert code == 0 and len(lines) == 11
    rows = [dict(zip(BENCH_COLUMNS, ln.split(","))) for ln in lines[1:]]
    assert all(r["status"] == "ok" for r in rows)
    assert all("/" in r["lambda"] and "/" in r["bound_ratio"] for r in rows)
    assert all(Fraction(r["bound_ratio"]) <= 1 for r in rows)

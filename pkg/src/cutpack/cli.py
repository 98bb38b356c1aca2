"""``cutpack`` command line: gen, solve, verify, oracle, bench.

Exit codes: 0 ok, 1 verification failure, 2 parse or usage error,
3 internal invariant violation, 4 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .generators import clique_chain, random_instance
from .instance import Instance, InstanceError, InvariantError, Mode, verify_integral_solution
from .io import (ParseError, dumps, fraction_str, instance_from_json, instance_to_dict, instance_to_json,
                 solution_from_json)
from .lp import LPError, solve_mcp_lp
from .oracle import DEFAULT_BUDGET, BudgetExceeded, brute_force_opt, check_guarantee
from .pipeline import as_mode, capacity_hat, solve

log = logging.getLogger("cutpack")

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INTERNAL, EXIT_BUDGET = 0, 1, 2, 3, 4

BENCH_COLUMNS = ["instance", "n", "m", "k", "lambda", "max_load_ratio", "bound_ratio", "status",
                 "wall_ms_lp", "wall_ms_laminar", "wall_ms_round", "wall_ms_verify"]


class UsageError(Exception):
    pass


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump_state(instance: Instance | None, stage: str, exc: BaseException) -> str:
    fd, path = tempfile.mkstemp(prefix="cutpack-dump-", suffix=".json")
    doc = {
        "stage": stage,
        "error": f"{type(exc).__name__}: {exc}",
        "instance": instance_to_dict(instance) if instance is not None else None,
        "traceback": traceback.format_exception(type(exc), exc, exc.__traceback__),
    }
    with open(fd, "w") as fh:
        json.dump(doc, fh, indent=1)
    return path


# ------------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    if args.kind == "clique-chain":
        inst = clique_chain(args.n)
    else:
        inst = random_instance(args.seed, n=args.n, k=args.k, terminals=args.terminals, c_max=args.c_max,
                               density=args.density, cscp=args.cscp)
    _write(args.output, instance_to_json(inst))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = instance_from_json(_read(args.input))
    try:
        result = solve(inst, None if args.mode == "auto" else args.mode, args.grid)
    except (InvariantError, LPError, AssertionError) as exc:
        path = _dump_state(inst, "solve", exc)
        print(f"internal invariant violated: {exc}\nstate dumped to {path}", file=sys.stderr)
        return EXIT_INTERNAL
    _write(args.output, result.solution().to_json())
    for e, load, allowed in result.guarantee.violations:
        print(f"violation: edge {e} load {load} > {allowed}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAIL


def cmd_verify(args) -> int:
    inst = instance_from_json(_read(args.input))
    sol = solution_from_json(_read(args.solution), inst.n)
    inst = as_mode(inst, sol.mode)
    rep = verify_integral_solution(sol.cuts, inst, sol.mode)
    if not rep.ok:
        print(f"FAIL {rep.clause}: {rep.detail}")
        return EXIT_FAIL
    lam = solve_mcp_lp(inst).lam
    if lam != sol.lam:
        print(f"FAIL lambda: solution claims {fraction_str(sol.lam)}, LP optimum is {fraction_str(lam)}")
        return EXIT_FAIL
    edges = inst.graph.edges
    if sol.loads and [tuple(x) for x in sol.loads] != [(u, v, l) for (u, v, _), l in zip(edges, rep.loads)]:
        print("FAIL loads: listed loads do not match the cuts")
        return EXIT_FAIL
    chat = capacity_hat(lam, inst.graph.capacities)
    g = check_guarantee(sol.cuts, inst, chat, sol.mode)
    for e, load, allowed in g.violations:
        u, v, _ = edges[e]
        print(f"FAIL bound: edge {e} ({u},{v}) load {load} exceeds {g.bound} = {allowed}")
    if not g.ok:
        return EXIT_FAIL
    print(f"OK bound {g.bound}, minimum slack {g.max_slack}, max relative load "
          f"{fraction_str(rep.max_relative_load)}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = instance_from_json(_read(args.input))
    if args.mode != "auto":
        inst = as_mode(inst, args.mode)
    try:
        res = brute_force_opt(inst, args.budget)
    except BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    doc = {
        "optimum": fraction_str(res.optimal_max_relative_load),
        "nodes": res.nodes,
        "cuts": {str(t): c.members for t, c in sorted(res.witness.assignment.items())},
        "note": "optimum over per-commodity colorings; an edge counts once per commodity it separates",
    }
    _write(args.output, dumps(doc))
    return EXIT_OK


def _bench_one(path: str, mode: str, grid: int | None) -> dict:
    row: dict = {"instance": Path(path).name}
    try:
        inst = instance_from_json(Path(path).read_text())
    except ParseError as exc:
        row["status"] = f"parse error: {exc}"
        return row
    row.update(n=inst.n, m=inst.graph.m, k=inst.k)
    try:
        res = solve(inst, None if mode == "auto" else mode, grid)
    except Exception as exc:  # one bad instance must not sink the batch
        row["status"] = f"error: {type(exc).__name__}: {exc}"
        return row
    chat = res.chat
    bounds = [8 * c + 4 if res.mode is Mode.MCP else c + 2 for c in chat]
    row["lambda"] = fraction_str(res.lam)
    row["max_load_ratio"] = fraction_str(max(Fraction(l, c) for l, c in zip(res.loads, chat)))
    row["bound_ratio"] = fraction_str(max(Fraction(l, b) for l, b in zip(res.loads, bounds)))
    row["status"] = "ok" if res.ok else "violation"
    for stage in ("lp", "laminar", "round", "verify"):
        row[f"wall_ms_{stage}"] = f"{res.times_ms[stage]:.3f}"
    return row


def cmd_bench(args) -> int:
    folder = Path(args.input)
    if not folder.is_dir():
        raise UsageError(f"{folder} is not a directory")
    files = sorted(str(p) for p in folder.glob("*.json"))
    if args.jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_one, files, [args.mode] * len(files), [args.grid] * len(files)))
    else:
        rows = [_bench_one(f, args.mode, args.grid) for f in files]
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        writer = csv.DictWriter(out, BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK if all(r.get("status") == "ok" for r in rows) else EXIT_FAIL


# ------------------------------------------------------------------ parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cutpack", description="Multiway and common-sink cut packing.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("kind", choices=["random", "clique-chain"])
    g.add_argument("--n", type=int, default=8, help="vertices (clique size for clique-chain)")
    g.add_argument("--k", type=int, default=2, help="commodities")
    g.add_argument("--terminals", type=int, default=2, help="terminals per commodity")
    g.add_argument("--c-max", type=int, default=3)
    g.add_argument("--density", type=float, default=0.3)
    g.add_argument("--cscp", action="store_true", help="common-sink pairs")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", "-o")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run the rounding pipeline")
    s.add_argument("--input", "-i")
    s.add_argument("--output", "-o")
    s.add_argument("--mode", choices=["auto", "mcp", "cscp"], default="auto")
    s.add_argument("--grid", type=int, default=None, help="even grid D >= 4 for multiway (default 4)")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against its instance")
    v.add_argument("--input", "-i", required=True, help="instance file")
    v.add_argument("--solution", "-s", required=True, help="solution file")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exact optimum by exhaustive search")
    o.add_argument("--input", "-i")
    o.add_argument("--output", "-o")
    o.add_argument("--mode", choices=["auto", "mcp", "cscp"], default="auto")
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="solve every *.json in a directory and write CSV")
    b.add_argument("--input", "-i", required=True, help="directory of instance files")
    b.add_argument("--output", "-o")
    b.add_argument("--mode", choices=["auto", "mcp", "cscp"], default="auto")
    b.add_argument("--grid", type=int, default=None)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"cutpack: {exc}", file=sys.stderr)
        return EXIT_PARSE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, UsageError, InstanceError) as exc:
        print(f"cutpack: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        path = _dump_state(None, args.command, exc)
        print(f"internal invariant violated: {exc}\nstate dumped to {path}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

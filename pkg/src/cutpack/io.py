"""JSON instance and solution files.  Rationals travel as "p/q" strings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .instance import Cut, Graph, Instance, InstanceError, IntegralCutFamily, Mode


class ParseError(ValueError):
    pass


def fraction_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: Any, where: str) -> Fraction:
    if not isinstance(text, str):
        raise ParseError(f"{where}: expected a \"p/q\" string, got {text!r}")
    try:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: malformed rational {text!r}") from None


def _load_json(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _int(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def instance_to_dict(instance: Instance) -> dict:
    out: dict[str, Any] = {
        "n": instance.n,
        "edges": [list(e) for e in instance.graph.edges],
        "commodities": [list(c) for c in instance.commodities],
    }
    if instance.sink is not None:
        out["sink"] = instance.sink
    return out


def dumps(doc: dict) -> str:
    """One top-level field per line, values compact; stable byte output."""
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in doc.items())
    return "{\n" + body + "\n}\n"


def instance_to_json(instance: Instance) -> str:
    return dumps(instance_to_dict(instance))


def instance_from_json(text: str) -> Instance:
    doc = _load_json(text, "instance")
    if not isinstance(doc, dict):
        raise ParseError("instance: top level must be an object")
    unknown = set(doc) - {"n", "edges", "commodities", "sink"}
    if unknown:
        raise ParseError(f"instance: unknown field(s) {sorted(unknown)}")
    for key in ("n", "edges", "commodities"):
        if key not in doc:
            raise ParseError(f"instance: missing field {key!r}")
    n = _int(doc["n"], "n")
    if not isinstance(doc["edges"], list):
        raise ParseError("edges: expected a list")
    edges = []
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, list) or len(e) != 3:
            raise ParseError(f"edges[{i}]: expected [u, v, c]")
        edges.append(tuple(_int(x, f"edges[{i}]") for x in e))
    if not isinstance(doc["commodities"], list):
        raise ParseError("commodities: expected a list")
    comms = []
    for i, c in enumerate(doc["commodities"]):
        if not isinstance(c, list):
            raise ParseError(f"commodities[{i}]: expected a list of vertices")
        comms.append(tuple(_int(x, f"commodities[{i}]") for x in c))
    sink = _int(doc["sink"], "sink") if "sink" in doc else None
    try:
        return Instance(Graph(n, tuple(edges)), tuple(comms), sink)
    except InstanceError as exc:
        raise ParseError(f"instance: {exc}") from None


@dataclass
class SolutionFile:
    mode: Mode
    grid: int | None
    lam: Fraction
    cuts: IntegralCutFamily
    loads: list[tuple[int, int, int]]
    bound: str
    violations: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "grid": self.grid,
            "lambda": fraction_str(self.lam),
            "cuts": {str(t): cut.members for t, cut in sorted(self.cuts.assignment.items())},
            "loads": [list(x) for x in self.loads],
            "bound": self.bound,
            "violations": self.violations,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def solution_from_json(text: str, n: int) -> SolutionFile:
    doc = _load_json(text, "solution")
    if not isinstance(doc, dict):
        raise ParseError("solution: top level must be an object")
    for key in ("lambda", "cuts", "bound"):
        if key not in doc:
            raise ParseError(f"solution: missing field {key!r}")
    try:
        mode = Mode(doc.get("mode", "cscp" if doc["bound"] == "c+2" else "mcp"))
    except ValueError:
        raise ParseError(f"mode: unknown value {doc.get('mode')!r}") from None
    if doc["bound"] not in ("8c+4", "c+2"):
        raise ParseError(f"bound: expected \"8c+4\" or \"c+2\", got {doc['bound']!r}")
    lam = parse_fraction(doc["lambda"], "lambda")
    if not isinstance(doc["cuts"], dict):
        raise ParseError("cuts: expected an object")
    assignment = {}
    for key, verts in doc["cuts"].items():
        try:
            t = int(key)
        except ValueError:
            raise ParseError(f"cuts: terminal id {key!r} is not an integer") from None
        if not isinstance(verts, list):
            raise ParseError(f"cuts[{key}]: expected a list of vertices")
        vs = [_int(v, f"cuts[{key}]") for v in verts]
        if any(not 0 <= v < n for v in vs):
            raise ParseError(f"cuts[{key}]: vertex out of range")
        try:
            assignment[t] = Cut.of(vs, n)
        except InstanceError as exc:
            raise ParseError(f"cuts[{key}]: {exc}") from None
    loads = [tuple(x) for x in doc.get("loads", [])]
    grid = doc.get("grid")
    return SolutionFile(mode, grid, lam, IntegralCutFamily(assignment), loads, doc["bound"],
                        list(doc.get("violations", [])))

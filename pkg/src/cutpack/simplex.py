"""Exact rational primal simplex (two-phase, fraction-free tableau).

Problems are stated as :class:`LinearProgram`; every variable needs a finite
lower bound, upper bounds are optional and become explicit rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Mapping, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Sense(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


@dataclass
class Row:
    coeffs: dict[int, Fraction]
    sense: Sense
    rhs: Fraction


@dataclass
class LinearProgram:
    num_vars: int
    objective: dict[int, Fraction] = field(default_factory=dict)
    rows: list[Row] = field(default_factory=list)
    lower: list[Fraction] = field(default_factory=list)
    upper: list[Fraction | None] = field(default_factory=list)
    maximize: bool = False

    def __post_init__(self):
        if not self.lower:
            self.lower = [ZERO] * self.num_vars
        if not self.upper:
            self.upper = [None] * self.num_vars

    def add_row(self, coeffs: Mapping[int, Fraction | int], sense: Sense | str, rhs: Fraction | int) -> int:
        for j in coeffs:
            if not 0 <= j < self.num_vars:
                raise ValueError(f"row references undeclared variable {j}")
        self.rows.append(Row({j: Fraction(c) for j, c in coeffs.items() if c}, Sense(sense), Fraction(rhs)))
        return len(self.rows) - 1


@dataclass
class SimplexResult:
    status: Status
    x: list[Fraction] = field(default_factory=list)
    objective: Fraction | None = None
    duals: list[Fraction] = field(default_factory=list)
    pivots: int = 0


class IterationLimit(RuntimeError):
    pass


def _int_row(vals: Sequence[Fraction]) -> tuple[list[int], int]:
    """Scale a rational vector to integers; returns ``(ints, scale)`` with
    ``vals[j] == ints[j] / scale`` and ``scale > 0``."""
    den = 1
    for v in vals:
        if v.denominator != 1:
            den = lcm(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in vals], den


def _reduce(row: list[int]) -> None:
    g = gcd(*row)
    if g > 1:
        for j, a in enumerate(row):
            if a:
                row[j] = a // g


class _Tableau:
    """Fraction-free tableau.

    Row ``i`` is an integer equation whose basic column carries a positive
    coefficient instead of 1; it is only ever rescaled by positive factors,
    so signs keep their meaning.  The cost row holds reduced costs times the
    positive integer ``scale``.
    """

    def __init__(self, rows: list[list[Fraction]], basis: list[int], ncols: int):
        self.rows = [_int_row(r)[0] for r in rows]
        for r in self.rows:
            _reduce(r)
        self.basis = basis
        self.ncols = ncols
        self.cost: list[int] = [0] * (ncols + 1)
        self.scale = 1
        self.pivots = 0

    def value(self, i: int) -> Fraction:
        row = self.rows[i]
        return Fraction(row[self.ncols], row[self.basis[i]])

    def reduced_cost(self, j: int) -> Fraction:
        return Fraction(self.cost[j], self.scale)

    def set_objective(self, c: Sequence[Fraction]):
        # reduced costs r_j = c_B B^-1 A_j - c_j for a maximisation
        cost = [-cj for cj in c] + [ZERO]
        for i, b in enumerate(self.basis):
            cb = c[b]
            if cb:
                row = self.rows[i]
                f = cb / row[b]
                for j, a in enumerate(row):
                    if a:
                        cost[j] += f * a
        ints, den = _int_row(cost)
        g = gcd(den, *ints)
        self.cost = [a // g for a in ints]
        self.scale = den // g

    def pivot(self, r: int, col: int):
        prow = self.rows[r]
        if prow[col] < 0:
            # only when driving out a zero-level artificial, so rhs stays 0
            for j, a in enumerate(prow):
                prow[j] = -a
        p = prow[col]
        nz = [(j, a) for j, a in enumerate(prow) if a]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[col]
            if f:
                if p != 1:
                    for j, a in enumerate(row):
                        if a:
                            row[j] = a * p
                for j, a in nz:
                    row[j] -= f * a
                _reduce(row)
        f = self.cost[col]
        if f:
            cost = self.cost
            if p != 1:
                for j, a in enumerate(cost):
                    if a:
                        cost[j] = a * p
            for j, a in nz:
                cost[j] -= f * a
            g = gcd(self.scale * p, *cost)
            self.scale = self.scale * p // g
            if g > 1:
                for j, a in enumerate(cost):
                    if a:
                        cost[j] = a // g
        self.basis[r] = col
        self.pivots += 1

    def run(self, allowed: Sequence[bool], max_pivots: int, bland_after: int = 8) -> Status:
        """Largest-coefficient pricing; after ``bland_after`` consecutive
        degenerate pivots switch to Bland's rule until the objective moves,
        which rules out cycling."""
        ncols = self.ncols
        streak = 0
        while True:
            cost = self.cost
            col = -1
            if streak >= bland_after:
                for j in range(ncols):
                    if cost[j] < 0 and allowed[j]:
                        col = j
                        break
            else:
                best_c = 0
                for j in range(ncols):
                    cj = cost[j]
                    if cj < best_c and allowed[j]:
                        best_c, col = cj, j
            if col < 0:
                return Status.OPTIMAL
            # ratio test rhs_i / a_i, ties to the smallest basic index
            bn = bd = 0
            r = -1
            for i, row in enumerate(self.rows):
                a = row[col]
                if a > 0:
                    num = row[ncols]
                    if r < 0:
                        bn, bd, r = num, a, i
                        continue
                    lhs, rhs = num * bd, bn * a
                    if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[r]):
                        bn, bd, r = num, a, i
            if r < 0:
                return Status.UNBOUNDED
            if self.pivots >= max_pivots:
                raise IterationLimit(f"simplex exceeded {max_pivots} pivots")
            streak = streak + 1 if bn == 0 else 0
            self.pivot(r, col)


def simplex_solve(lp: LinearProgram, max_pivots: int = 200_000) -> SimplexResult:
    """Solve ``lp`` exactly.

    ``duals[i]`` is the shadow price of ``lp.rows[i]`` for the objective as
    stated (minimisation or maximisation).
    """
    n = lp.num_vars
    lower = [Fraction(l) for l in lp.lower]
    if any(l is None for l in lp.lower):
        raise ValueError("every variable needs a finite lower bound")

    # shifted variables y = x - lower >= 0
    norm_rows: list[tuple[dict[int, Fraction], Sense, Fraction, int]] = []
    for idx, row in enumerate(lp.rows):
        rhs = row.rhs - sum((c * lower[j] for j, c in row.coeffs.items()), ZERO)
        norm_rows.append((dict(row.coeffs), row.sense, rhs, idx))
    for j, ub in enumerate(lp.upper):
        if ub is not None:
            if ub < lower[j]:
                return SimplexResult(Status.INFEASIBLE)
            norm_rows.append(({j: ONE}, Sense.LE, Fraction(ub) - lower[j], -1))

    m = len(norm_rows)
    signs = []
    n_slack = sum(1 for _, s, _, _ in norm_rows if s is not Sense.EQ)
    # columns: structural | slack/surplus | artificial
    slack_col = []
    art_col = []
    unit_col = []
    next_slack = n
    next_art = n + n_slack
    specs = []
    for coeffs, sense, rhs, _ in norm_rows:
        sign = 1
        if rhs < 0:
            sign = -1
            rhs = -rhs
            coeffs = {j: -c for j, c in coeffs.items()}
            sense = {Sense.LE: Sense.GE, Sense.GE: Sense.LE, Sense.EQ: Sense.EQ}[sense]
        signs.append(sign)
        s = a = -1
        if sense is Sense.LE:
            s = next_slack
            next_slack += 1
            unit_col.append(s)
        elif sense is Sense.GE:
            s = next_slack
            next_slack += 1
            a = next_art
            next_art += 1
            unit_col.append(a)
        else:
            a = next_art
            next_art += 1
            unit_col.append(a)
        slack_col.append(s)
        art_col.append(a)
        specs.append((coeffs, sense, rhs))
    ncols = next_art
    rows = []
    basis = []
    for i, (coeffs, sense, rhs) in enumerate(specs):
        row = [ZERO] * (ncols + 1)
        for j, c in coeffs.items():
            row[j] = c
        if sense is Sense.LE:
            row[slack_col[i]] = ONE
            basis.append(slack_col[i])
        elif sense is Sense.GE:
            row[slack_col[i]] = -ONE
            row[art_col[i]] = ONE
            basis.append(art_col[i])
        else:
            row[art_col[i]] = ONE
            basis.append(art_col[i])
        row[ncols] = rhs
        rows.append(row)

    tab = _Tableau(rows, basis, ncols)
    is_art = [False] * ncols
    for a in art_col:
        if a >= 0:
            is_art[a] = True

    if any(is_art):
        c1 = [ZERO] * ncols
        for j in range(ncols):
            if is_art[j]:
                c1[j] = -ONE
        tab.set_objective(c1)
        tab.run([True] * ncols, max_pivots)
        if tab.cost[ncols] < 0:
            return SimplexResult(Status.INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if is_art[tab.basis[i]]:
                row = tab.rows[i]
                for j in range(ncols):
                    if not is_art[j] and row[j]:
                        tab.pivot(i, j)
                        break

    c2 = [ZERO] * ncols
    for j, cj in lp.objective.items():
        c2[j] = Fraction(cj) if lp.maximize else -Fraction(cj)
    tab.set_objective(c2)
    status = tab.run([not a for a in is_art], max_pivots)
    if status is Status.UNBOUNDED:
        return SimplexResult(Status.UNBOUNDED, pivots=tab.pivots)

    y = [ZERO] * ncols
    for i, b in enumerate(tab.basis):
        y[b] = tab.value(i)
    x = [y[j] + lower[j] for j in range(n)]
    obj = sum((Fraction(c) * x[j] for j, c in lp.objective.items()), ZERO)
    duals = []
    flip = 1 if lp.maximize else -1
    for i, (_, _, _, orig) in enumerate(norm_rows):
        if orig < 0:
            continue
        # reduced cost of the row's unit column equals its dual price
        duals.append(flip * signs[i] * tab.reduced_cost(unit_col[i]))
    return SimplexResult(Status.OPTIMAL, x, obj, duals, tab.pivots)


def dual_of(lp: LinearProgram) -> LinearProgram:
    """LP dual of ``min c.x`` over ``x >= 0`` with ``<=``/``>=`` rows.

    Dual variable ``i`` belongs to ``lp.rows[i]`` and is sign-adjusted to be
    nonnegative; the primal ``x[j]`` is the shadow price of dual row ``j``.
    """
    if lp.maximize:
        raise ValueError("dual_of expects a minimisation")
    if any(l != 0 for l in lp.lower) or any(u is not None for u in lp.upper):
        raise ValueError("dual_of expects x >= 0 without upper bounds")
    dual = LinearProgram(len(lp.rows), maximize=True)
    cols: list[dict[int, Fraction]] = [{} for _ in range(lp.num_vars)]
    for i, row in enumerate(lp.rows):
        if row.sense is Sense.EQ:
            raise ValueError("dual_of does not handle equality rows")
        sign = 1 if row.sense is Sense.GE else -1
        if row.rhs:
            dual.objective[i] = sign * row.rhs
        for j, a in row.coeffs.items():
            cols[j][i] = sign * a
    for j, col in enumerate(cols):
        dual.add_row(col, Sense.LE, lp.objective.get(j, ZERO))
    return dual

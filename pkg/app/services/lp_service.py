"""
Exact rational linear programming.

Dense two-phase tableau simplex over ``Fraction`` with Bland's rule. Programs
are maximisation problems over nonnegative variables; every optimal witness is
re-verified against the original rows before it is returned.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)


class DimensionMismatchError(ValueError):
    """Rows, senses, right-hand sides and objective disagree in size"""
    pass


class LpVerificationError(RuntimeError):
    """An optimal witness failed exact re-verification (solver bug)"""
    pass


class Sense(str, Enum):
    """Row senses"""
    LE = "<="
    GE = ">="
    EQ = "="


class LpStatus(str, Enum):
    """Solver verdicts"""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective·x subject to rows[k]·x (sense[k]) rhs[k], x >= 0"""
    objective: Tuple[Fraction, ...]
    rows: Tuple[Tuple[Fraction, ...], ...]
    rhs: Tuple[Fraction, ...]
    senses: Tuple[Sense, ...]

    @classmethod
    def build(
        cls,
        objective: Sequence,
        rows: Sequence[Sequence],
        rhs: Sequence,
        senses: Sequence,
    ) -> "LinearProgram":
        """Coerce numbers to Fraction and sense tokens to Sense, checking dimensions."""
        width = len(objective)
        if len(rows) != len(rhs) or len(rows) != len(senses):
            raise DimensionMismatchError(
                f"{len(rows)} rows, {len(rhs)} right-hand sides and {len(senses)} senses"
            )
        for k, row in enumerate(rows):
            if len(row) != width:
                raise DimensionMismatchError(f"row {k} has width {len(row)}, objective has {width}")
        try:
            parsed_senses = tuple(Sense(s) for s in senses)
        except ValueError as e:
            raise DimensionMismatchError(f"unknown row sense: {e}") from None
        return cls(
            objective=tuple(Fraction(c) for c in objective),
            rows=tuple(tuple(Fraction(a) for a in row) for row in rows),
            rhs=tuple(Fraction(b) for b in rhs),
            senses=parsed_senses,
        )

    @property
    def variable_count(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    value: Optional[Fraction] = None
    witness: Optional[Tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: Optional[Tuple[Fraction, ...]] = field(default=None)

    def __bool__(self) -> bool:
        return self.feasible


class _Tableau:
    """Rows in canonical form with respect to ``basis``; ``costs`` holds reduced costs."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.costs: List[Fraction] = []
        self.value = Fraction(0)

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def price(self, objective: Sequence[Fraction]):
        """Reduced costs d_j = c_j - c_B·B^-1 A_j for a maximisation objective."""
        costs = list(objective)
        value = Fraction(0)
        for row, b, basic in zip(self.rows, self.rhs, self.basis):
            cb = objective[basic]
            if cb:
                for j, a in enumerate(row):
                    if a:
                        costs[j] -= cb * a
                value += cb * b
        self.costs = costs
        self.value = value

    def pivot(self, r: int, col: int):
        row = self.rows[r]
        pivot = row[col]
        if pivot != 1:
            self.rows[r] = row = [a / pivot for a in row]
            self.rhs[r] = self.rhs[r] / pivot
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            factor = other[col]
            if factor:
                self.rows[i] = [a - factor * p for a, p in zip(other, row)]
                self.rhs[i] -= factor * self.rhs[r]
        factor = self.costs[col]
        if factor:
            self.costs = [d - factor * p for d, p in zip(self.costs, row)]
            self.value += factor * self.rhs[r]
        self.basis[r] = col

    def run(self, allowed: Sequence[bool]) -> LpStatus:
        """Primal simplex with Bland's rule over the allowed columns."""
        while True:
            entering = next((j for j, d in enumerate(self.costs) if allowed[j] and d > 0), None)
            if entering is None:
                return LpStatus.OPTIMAL
            best: Optional[Tuple[Fraction, int, int]] = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    candidate = (self.rhs[i] / a, self.basis[i], i)
                    if best is None or candidate < best:
                        best = candidate
            if best is None:
                return LpStatus.UNBOUNDED
            self.pivot(best[2], entering)


def _standard_form(lp: LinearProgram):
    """
    Convert to equality rows with b >= 0.

    Column layout: original variables, one slack/surplus per inequality row,
    then one artificial per >= or = row.
    """
    n = lp.variable_count
    rows, rhs, senses = [], [], []
    for row, b, sense in zip(lp.rows, lp.rhs, lp.senses):
        row = list(row)
        if b < 0:
            row, b = [-a for a in row], -b
            sense = {Sense.LE: Sense.GE, Sense.GE: Sense.LE, Sense.EQ: Sense.EQ}[sense]
        rows.append(row)
        rhs.append(b)
        senses.append(sense)

    slack_count = sum(1 for s in senses if s != Sense.EQ)
    artificial_count = sum(1 for s in senses if s != Sense.LE)
    width = n + slack_count + artificial_count
    tableau_rows, basis = [], []
    next_slack, next_artificial = n, n + slack_count
    for row, sense in zip(rows, senses):
        full = row + [Fraction(0)] * (width - n)
        if sense == Sense.LE:
            full[next_slack] = Fraction(1)
            basis.append(next_slack)
            next_slack += 1
        else:
            if sense == Sense.GE:
                full[next_slack] = Fraction(-1)
                next_slack += 1
            full[next_artificial] = Fraction(1)
            basis.append(next_artificial)
            next_artificial += 1
        tableau_rows.append(full)
    return _Tableau(tableau_rows, rhs, basis), n + slack_count, width


def _phase_one(lp: LinearProgram) -> Tuple[Optional[_Tableau], int]:
    """Drive artificials to zero; returns (None, _) when infeasible."""
    tableau, first_artificial, width = _standard_form(lp)
    if first_artificial < width:
        objective = [Fraction(0)] * first_artificial + [Fraction(-1)] * (width - first_artificial)
        tableau.price(objective)
        tableau.run([True] * width)
        if tableau.value < 0:
            return None, first_artificial

        # artificial still basic at level zero: pivot it out or drop the redundant row
        r = 0
        while r < len(tableau.rows):
            if tableau.basis[r] >= first_artificial:
                col = next((j for j in range(first_artificial) if tableau.rows[r][j] != 0), None)
                if col is None:
                    del tableau.rows[r]
                    del tableau.rhs[r]
                    del tableau.basis[r]
                    continue
                tableau.pivot(r, col)
            r += 1
    return tableau, first_artificial


def _verify(lp: LinearProgram, witness: Sequence[Fraction], value: Fraction):
    if any(x < 0 for x in witness):
        raise LpVerificationError("witness has a negative coordinate")
    for k, (row, b, sense) in enumerate(zip(lp.rows, lp.rhs, lp.senses)):
        lhs = sum((a * x for a, x in zip(row, witness)), Fraction(0))
        ok = lhs <= b if sense == Sense.LE else lhs >= b if sense == Sense.GE else lhs == b
        if not ok:
            raise LpVerificationError(f"witness violates row {k}: {lhs} {sense.value} {b}")
    attained = sum((c * x for c, x in zip(lp.objective, witness)), Fraction(0))
    if attained != value:
        raise LpVerificationError(f"witness attains {attained}, reported {value}")


def lp_solve(lp: LinearProgram) -> LpResult:
    """
    Solve ``lp`` exactly.

    Args:
        lp: The program (maximisation, variables implicitly nonnegative)

    Returns:
        LpResult with status, and value/witness when optimal

    Raises:
        DimensionMismatchError: If the program is malformed
    """
    _check_dimensions(lp)
    tableau, first_artificial = _phase_one(lp)
    if tableau is None:
        logger.debug("LP infeasible after phase one")
        return LpResult(LpStatus.INFEASIBLE)

    n = lp.variable_count
    width = tableau.width if tableau.rows else first_artificial
    objective = list(lp.objective) + [Fraction(0)] * (width - n)
    if not tableau.rows:
        # no constraints left: any positive objective coefficient is an unbounded ray
        if any(c > 0 for c in lp.objective):
            return LpResult(LpStatus.UNBOUNDED)
        witness = tuple(Fraction(0) for _ in range(n))
        _verify(lp, witness, Fraction(0))
        return LpResult(LpStatus.OPTIMAL, Fraction(0), witness)

    tableau.price(objective)
    allowed = [j < first_artificial for j in range(width)]
    status = tableau.run(allowed)
    if status == LpStatus.UNBOUNDED:
        logger.debug("LP unbounded")
        return LpResult(LpStatus.UNBOUNDED)

    solution = [Fraction(0)] * width
    for basic, b in zip(tableau.basis, tableau.rhs):
        solution[basic] = b
    witness = tuple(solution[:n])
    _verify(lp, witness, tableau.value)
    logger.debug(f"LP optimal value {tableau.value}")
    return LpResult(LpStatus.OPTIMAL, tableau.value, witness)


def lp_feasible(rows: Sequence[Sequence], senses: Sequence, rhs: Sequence) -> FeasibilityResult:
    """
    Phase-one feasibility of {rows·x (senses) rhs, x >= 0}.

    Returns:
        FeasibilityResult, truthy when feasible, with a witness point
    """
    if not rows:
        return FeasibilityResult(True, ())
    width = len(rows[0])
    lp = LinearProgram.build([0] * width, rows, rhs, senses)
    result = lp_solve(lp)
    if result.status == LpStatus.INFEASIBLE:
        return FeasibilityResult(False)
    return FeasibilityResult(True, result.witness)


def _check_dimensions(lp: LinearProgram):
    width = lp.variable_count
    if len(lp.rows) != len(lp.rhs) or len(lp.rows) != len(lp.senses):
        raise DimensionMismatchError(
            f"{len(lp.rows)} rows, {len(lp.rhs)} right-hand sides and {len(lp.senses)} senses"
        )
    for k, row in enumerate(lp.rows):
        if len(row) != width:
            raise DimensionMismatchError(f"row {k} has width {len(row)}, objective has {width}")

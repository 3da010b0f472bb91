"""Exact feasibility of ``{x >= 0 : A x = b}`` over the rationals.

Phase one of the two-phase simplex method with Bland's least-index rule,
run on a fraction-free integer tableau. There is no objective: every caller
only asks whether a system has a nonnegative solution, and wants one.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
import math
from fractions import Fraction

from .errors import ShapeError
from .model import to_rational

ZERO = Fraction(0)


@dataclass(frozen=True)
class LinSystem:
    num_vars: int
    rows: tuple = field(default_factory=tuple)

    def __post_init__(self):
        rows = []
        for coeffs, rhs in self.rows:
            coeffs = tuple(to_rational(c) for c in coeffs)
            if len(coeffs) != self.num_vars:
                raise ShapeError(f"row has {len(coeffs)} coefficients, expected {self.num_vars}")
            rows.append((coeffs, to_rational(rhs)))
        object.__setattr__(self, "rows", tuple(rows))

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.num_vars or any(v < 0 for v in x):
            return False
        return all(sum((c * v for c, v in zip(coeffs, x)), ZERO) == rhs
                   for coeffs, rhs in self.rows)


@dataclass(frozen=True)
class LpOutcome:
    """``witness`` is None exactly when the system is infeasible."""

    witness: tuple | None

    @property
    def feasible(self) -> bool:
        return self.witness is not None

    def __bool__(self):
        return self.witness is not None


INFEASIBLE = LpOutcome(None)


def feasible(system: LinSystem) -> LpOutcome:
    return solve(system.num_vars, system.rows)


def solve(num_vars: int, rows) -> LpOutcome:
    """Decide feasibility of ``rows`` (pairs of coefficients and rhs).

    Same contract as :func:`feasible` without building a LinSystem;
    coefficients must already be Fractions (or ints).
    """
    n = num_vars
    tab: list[list[int]] = []
    for coeffs, rhs in rows:
        if len(coeffs) != n:
            raise ShapeError(f"row has {len(coeffs)} coefficients, expected {n}")
        if not any(coeffs):
            if rhs:
                return INFEASIBLE
            continue
        row = _integer_row(coeffs, rhs)
        if row[n] < 0:
            row = [-v for v in row]
        tab.append(row)
    m = len(tab)
    if m == 0:
        return LpOutcome((ZERO,) * n)

    # Integer tableau: the true entries are tab[i][j] / den. Pivoting
    # divides exactly by the previous pivot, so entries stay integral
    # and their size stays bounded by subdeterminants of the input.
    # Columns 0..n-1 are real variables, column n the right-hand side;
    # artificials n..n+m-1 start basic and never re-enter, so they are
    # not stored.
    basis = list(range(n, n + m))
    den = 1
    # phase-one objective row (minimise the sum of artificials)
    cost = [-sum(row[j] for row in tab) for j in range(n + 1)]

    while True:
        enter = next((j for j in range(n) if cost[j] < 0), None)
        if enter is None:
            break
        leave = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                if leave is None:
                    leave = i
                    continue
                # compare tab[i][n] / a with tab[leave][n] / tab[leave][enter]
                lhs = tab[i][n] * tab[leave][enter]
                rhs_ = tab[leave][n] * a
                if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[leave]):
                    leave = i
        if leave is None:
            # unbounded direction cannot occur in phase one (objective >= 0)
            raise AssertionError("phase one reported unbounded")
        den = _pivot(tab, cost, leave, enter, den)
        basis[leave] = enter

    if cost[n]:
        return INFEASIBLE
    x = [ZERO] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = Fraction(tab[i][n], den)
    return LpOutcome(tuple(x))


def _integer_row(coeffs, rhs) -> list[int]:
    if type(rhs) is int and all(type(c) is int for c in coeffs):
        return list(coeffs) + [rhs]
    vals = [Fraction(c) for c in coeffs] + [Fraction(rhs)]
    scale = math.lcm(*(v.denominator for v in vals))
    return [v.numerator * (scale // v.denominator) for v in vals]


def _pivot(tab, cost, r, c, den):
    prow = tab[r]
    piv = prow[c]
    for i, row in enumerate(tab):
        if i == r:
            continue
        f = row[c]
        if f:
            tab[i] = [(v * piv - f * pv) // den for v, pv in zip(row, prow)]
        elif piv != den:
            tab[i] = [v * piv // den for v in row]
    f = cost[c]
    if f:
        cost[:] = [(v * piv - f * pv) // den for v, pv in zip(cost, prow)]
    elif piv != den:
        cost[:] = [v * piv // den for v in cost]
    return piv

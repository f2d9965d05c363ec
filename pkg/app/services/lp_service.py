"""
LP Core Service

A small dense revised simplex and an exact 0-1 knapsack. Both serve the
row generation of conservative scales and the column generation of the
lifting relaxation; problems here have at most a few hundred rows.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.services.exceptions import LpError

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-7
REFACTOR_EVERY = 50
DEGENERATE_STREAK = 30


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass
class Constraint:
    coeffs: Dict[int, float]
    relation: str
    rhs: float


@dataclass
class LinearProgram:
    """
    max or min c.x subject to rows, lower <= x <= upper.
    A missing upper bound means +inf; lower bounds must be finite.
    """

    sense: str = "max"
    objective: List[float] = field(default_factory=list)
    rows: List[Constraint] = field(default_factory=list)
    lower: List[float] = field(default_factory=list)
    upper: List[Optional[float]] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_variable(self, objective: float = 0.0, lower: float = 0.0, upper: Optional[float] = None) -> int:
        self.objective.append(float(objective))
        self.lower.append(float(lower))
        self.upper.append(None if upper is None else float(upper))
        return len(self.objective) - 1

    def add_row(self, coeffs: Dict[int, float], relation: str, rhs: float) -> int:
        if relation not in ("<=", ">=", "="):
            raise LpError(f"unknown relation '{relation}'")
        for j in coeffs:
            if j < 0 or j >= self.num_vars:
                raise LpError(f"row references undeclared variable {j}")
        if not np.isfinite(rhs):
            raise LpError("row right-hand side must be finite")
        self.rows.append(Constraint(dict(coeffs), relation, float(rhs)))
        return len(self.rows) - 1


@dataclass
class LpResult:
    """
    Solution of a LinearProgram. duals follow the sign convention where, at a
    maximizing optimum, c_j - sum_i duals_i a_ij <= 0 for columns at their
    lower bound (so <= rows carry non-negative duals).
    """

    status: LpStatus
    value: float = 0.0
    x: List[float] = field(default_factory=list)
    duals: List[float] = field(default_factory=list)
    iterations: int = 0


class RevisedSimplex:
    """Two-phase revised simplex with an explicit basis inverse and Bland fallback."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: List[int], max_iterations: int):
        self.A = A
        self.b = b
        self.basis = list(basis)
        self.max_iterations = max_iterations
        self.iterations = 0
        self.refactor()

    def refactor(self) -> None:
        try:
            self.Binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError as e:
            raise LpError("singular basis") from e
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < 1e-12] = 0.0

    def duals(self, cost: np.ndarray) -> np.ndarray:
        return cost[self.basis] @ self.Binv

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> LpStatus:
        streak = 0
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iterations:
                return LpStatus.ITERATION_LIMIT
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0

            y = self.duals(cost)
            reduced = cost - y @ self.A
            reduced[self.basis] = 0.0
            reduced[~allowed] = 0.0
            entering_candidates = np.flatnonzero(reduced < -COST_TOL)
            if entering_candidates.size == 0:
                return LpStatus.OPTIMAL

            bland = streak >= DEGENERATE_STREAK
            if bland:
                j = int(entering_candidates[0])
            else:
                j = int(entering_candidates[np.argmin(reduced[entering_candidates])])

            u = self.Binv @ self.A[:, j]
            rows = np.flatnonzero(u > PIVOT_TOL)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = self.xB[rows] / u[rows]
            theta = ratios.min()
            ties = rows[ratios <= theta + 1e-12]
            if bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(ties[np.argmax(u[ties])])

            streak = streak + 1 if theta <= 1e-12 else 0
            self.pivot(r, j, u, theta)
            self.iterations += 1
            since_refactor += 1

    def pivot(self, r: int, j: int, u: np.ndarray, theta: float) -> None:
        self.xB -= theta * u
        self.xB[r] = theta
        self.xB[self.xB < 0] = 0.0
        pivot_row = self.Binv[r] / u[r]
        self.Binv -= np.outer(u, pivot_row)
        self.Binv[r] = pivot_row
        self.basis[r] = j


def solve_lp(lp: LinearProgram, max_iterations: Optional[int] = None) -> LpResult:
    """
    Solve a linear program.

    Returns:
        LpResult: status, optimal value, primal values and row duals.
        Infeasible and unbounded programs are reported by status.
    """
    n = lp.num_vars
    lower = np.asarray(lp.lower, dtype=float)
    c = np.asarray(lp.objective, dtype=float)
    maximize = lp.sense == "max"

    # shift lower bounds to zero, turn upper bounds into rows
    rows: List[Tuple[Dict[int, float], str, float]] = []
    for row in lp.rows:
        shift = sum(a * lower[j] for j, a in row.coeffs.items())
        rows.append((row.coeffs, row.relation, row.rhs - shift))
    for j, hi in enumerate(lp.upper):
        if hi is None:
            continue
        if hi < lower[j] - FEAS_TOL:
            return LpResult(status=LpStatus.INFEASIBLE)
        rows.append(({j: 1.0}, "<=", hi - lower[j]))

    m = len(rows)
    signs = np.ones(m)
    relations = []
    b = np.zeros(m)
    for i, (_, relation, rhs) in enumerate(rows):
        if rhs < 0:
            signs[i] = -1.0
            relation = {"<=": ">=", ">=": "<=", "=": "="}[relation]
        relations.append(relation)
        b[i] = abs(rhs)

    extra = sum(1 if rel == "<=" else (2 if rel == ">=" else 1) for rel in relations)
    N = n + extra
    A = np.zeros((m, N))
    for i, (coeffs, _, _) in enumerate(rows):
        for j, a in coeffs.items():
            A[i, j] = signs[i] * a

    basis = []
    artificial = np.zeros(N, dtype=bool)
    col = n
    for i, relation in enumerate(relations):
        if relation == "<=":
            A[i, col] = 1.0
            basis.append(col)
            col += 1
        elif relation == ">=":
            A[i, col] = -1.0
            A[i, col + 1] = 1.0
            artificial[col + 1] = True
            basis.append(col + 1)
            col += 2
        else:
            A[i, col] = 1.0
            artificial[col] = True
            basis.append(col)
            col += 1

    limit = max_iterations or 50 * (m + N) + 1000
    if m == 0:
        if np.any((c > COST_TOL) if maximize else (c < -COST_TOL)):
            return LpResult(status=LpStatus.UNBOUNDED)
        x = lower.tolist()
        return LpResult(status=LpStatus.OPTIMAL, value=float(c @ lower), x=x, duals=[])

    simplex = RevisedSimplex(A, b, basis, limit)
    everything = np.ones(N, dtype=bool)

    if artificial.any():
        phase_one = artificial.astype(float)
        status = simplex.run(phase_one, everything)
        if status == LpStatus.ITERATION_LIMIT:
            return LpResult(status=status, iterations=simplex.iterations)
        simplex.refactor()
        infeasibility = float(phase_one[simplex.basis] @ simplex.xB)
        if infeasibility > FEAS_TOL * (1.0 + float(b.max(initial=0.0))):
            return LpResult(status=LpStatus.INFEASIBLE, iterations=simplex.iterations)
        _drive_out_artificials(simplex, artificial)

    cost = np.zeros(N)
    cost[:n] = -c if maximize else c
    status = simplex.run(cost, ~artificial)
    if status != LpStatus.OPTIMAL:
        return LpResult(status=status, iterations=simplex.iterations)

    simplex.refactor()
    values = np.zeros(N)
    values[simplex.basis] = np.maximum(simplex.xB, 0.0)
    x = values[:n] + lower
    y = simplex.duals(cost)[: len(lp.rows)] * signs[: len(lp.rows)]
    if maximize:
        y = -y
    return LpResult(
        status=LpStatus.OPTIMAL,
        value=float(c @ x),
        x=x.tolist(),
        duals=y.tolist(),
        iterations=simplex.iterations,
    )


def _drive_out_artificials(simplex: RevisedSimplex, artificial: np.ndarray) -> None:
    """Pivot zero-level artificials out of the basis where a structural column allows it."""
    for r, var in enumerate(list(simplex.basis)):
        if not artificial[var]:
            continue
        row = simplex.Binv[r] @ simplex.A
        row[artificial] = 0.0
        row[simplex.basis] = 0.0
        candidates = np.flatnonzero(np.abs(row) > PIVOT_TOL)
        if candidates.size == 0:
            continue  # redundant row, the artificial stays basic at zero
        j = int(candidates[0])
        u = simplex.Binv @ simplex.A[:, j]
        simplex.pivot(r, j, u, 0.0)
    simplex.refactor()


def knapsack_01(weights: Sequence[int], capacity: int, profits: Sequence[float]) -> Tuple[float, List[int]]:
    """
    Exact 0-1 knapsack by dynamic programming over the capacity.

    Returns:
        Tuple[float, List[int]]: best profit and the chosen indices
    """
    if capacity <= 0 or not len(weights):
        return 0.0, []
    best = np.zeros(capacity + 1)
    keep = np.zeros((len(weights), capacity + 1), dtype=bool)
    for i, (w, p) in enumerate(zip(weights, profits)):
        w = int(w)
        if w > capacity or p <= 0:
            continue
        candidate = best[: capacity + 1 - w] + p
        improves = candidate > best[w:] + 1e-12
        keep[i, w:] = improves
        best[w:] = np.where(improves, candidate, best[w:])

    chosen = []
    c = capacity
    for i in range(len(weights) - 1, -1, -1):
        if keep[i, c]:
            chosen.append(i)
            c -= int(weights[i])
    chosen.reverse()
    return float(best[capacity]), chosen

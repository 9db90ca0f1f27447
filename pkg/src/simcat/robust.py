"""Loss-minimizing deterministic classification over sampled frequencies.

Given the marginal assignment percentages of one node, a binary
program picks a single category (or the dummy) per action so that the
mass voting against each choice is as small as possible, subject to
cardinality requirements.  All optima of equal loss are enumerated by
re-solving with a loss-preserving band and a no-good cut per solution
already found.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .hierarchy import ValidationError
from .lp import EQ, GE, LE, LpProblem, solve_binary_ilp
from .smaa import AssignmentDistribution

#: two losses within this many percentage points count as equal
LOSS_TOL = 1e-6


class InfeasibleRequirements(ValueError):
    """The cardinality requirements admit no assignment at all."""


@dataclass(frozen=True)
class Requirements:
    """Cardinality rules for a deterministic classification.

    ``exactly_one`` forces every action into exactly one column (a real
    category or the dummy).  Missing minimum entries default to zero
    and missing maxima to "no cap".
    """

    exactly_one: bool = True
    min_per_category: Mapping[str, int] = field(default_factory=dict)
    max_per_category: Mapping[str, int] = field(default_factory=dict)
    max_dummy: int | None = None

    def __post_init__(self) -> None:
        for name, counts in (
            ("minimum", self.min_per_category),
            ("maximum", self.max_per_category),
        ):
            for cat, v in counts.items():
                if int(v) != v or v < 0:
                    raise ValidationError(
                        f"{name} count for {cat!r} must be a nonnegative integer"
                    )
        for cat, lo in self.min_per_category.items():
            hi = self.max_per_category.get(cat)
            if hi is not None and lo > hi:
                raise ValidationError(
                    f"category {cat!r} asks for at least {lo} but at most {hi}"
                )
        if self.max_dummy is not None and (
            int(self.max_dummy) != self.max_dummy or self.max_dummy < 0
        ):
            raise ValidationError("dummy cap must be a nonnegative integer")


@dataclass(frozen=True)
class ClassificationSolution:
    """One optimal 0-1 assignment matrix with its loss (percentage points)."""

    node: tuple
    actions: tuple[str, ...]
    columns: tuple[str, ...]  # real categories then the dummy
    y: np.ndarray  # shape (len(actions), len(columns)), entries 0/1
    loss: float

    @property
    def assignment(self) -> dict[str, tuple[str, ...]]:
        return {
            a: tuple(c for j, c in enumerate(self.columns) if self.y[i, j])
            for i, a in enumerate(self.actions)
        }

    def bits(self) -> tuple[int, ...]:
        return tuple(int(v) for v in self.y.reshape(-1))


def _cost_matrix(
    dist: AssignmentDistribution, nid
) -> tuple[tuple[str, ...], np.ndarray]:
    columns = dist.categories + (dist.dummy,)
    b = np.array(
        [
            [dist.marginal(nid, a, c) for c in columns]
            for a in dist.actions
        ]
    )
    # assigning a to column h is contradicted by all mass off that column
    return columns, b.sum(axis=1, keepdims=True) - b


def _check_aggregates(req: Requirements, columns, n_actions: int) -> None:
    real = columns[:-1]
    for cat in list(req.min_per_category) + list(req.max_per_category):
        if cat not in real:
            raise ValueError(f"unknown category {cat!r} in requirements")
    for cat, lo in req.min_per_category.items():
        if lo > n_actions:
            raise InfeasibleRequirements(
                f"category {cat!r} asks for at least {lo} "
                f"of {n_actions} actions"
            )
    if req.exactly_one:
        # one column per action: minimums compete for the same actions
        total_min = sum(req.min_per_category.get(c, 0) for c in real)
        if total_min > n_actions:
            raise InfeasibleRequirements(
                f"minimum counts require {total_min} assignments "
                f"but only {n_actions} actions exist"
            )
        cap = sum(
            min(req.max_per_category.get(c, n_actions), n_actions) for c in real
        )
        cap += min(
            req.max_dummy if req.max_dummy is not None else n_actions, n_actions
        )
        if cap < n_actions:
            raise InfeasibleRequirements(
                f"maximum counts admit only {cap} of {n_actions} actions"
            )


def _base_program(
    cost: np.ndarray, req: Requirements, columns
) -> LpProblem:
    n, m = cost.shape
    p = LpProblem(cost.reshape(-1), "min")
    for i in range(n * m):
        p.set_binary(i)
    if req.exactly_one:
        for i in range(n):
            p.add_constraint({i * m + j: 1.0 for j in range(m)}, EQ, 1.0)
    for j, cat in enumerate(columns[:-1]):
        lo = req.min_per_category.get(cat, 0)
        hi = req.max_per_category.get(cat)
        col = {i * m + j: 1.0 for i in range(n)}
        if lo > 0:
            p.add_constraint(dict(col), GE, float(lo))
        if hi is not None:
            p.add_constraint(dict(col), LE, float(hi))
    if req.max_dummy is not None:
        dummy_col = {i * m + (m - 1): 1.0 for i in range(n)}
        p.add_constraint(dummy_col, LE, float(req.max_dummy))
    return p


def solve_classification(
    dist: AssignmentDistribution, r, req: Requirements
) -> ClassificationSolution:
    """Minimize the misclassification loss at node ``r`` under ``req``."""
    nid = dist.resolve_node(r)
    columns, cost = _cost_matrix(dist, nid)
    _check_aggregates(req, columns, len(dist.actions))
    result = solve_binary_ilp(_base_program(cost, req, columns))
    if not result.optimal:
        raise InfeasibleRequirements("the requirements cannot be met together")
    y = np.rint(result.x).astype(int).reshape(cost.shape)
    loss = float(np.sum(cost * y))
    if abs(loss - result.value) > LOSS_TOL:
        raise AssertionError("loss drifted away from the solver objective")
    return ClassificationSolution(nid, dist.actions, columns, y, loss)


def enumerate_optima(
    dist: AssignmentDistribution, r, req: Requirements
) -> list[ClassificationSolution]:
    """All distinct 0-1 solutions sharing the minimal loss, best-first.

    Each round re-solves with the loss pinned to the optimum and a cut
    excluding every solution already found, until nothing is left.
    """
    first = solve_classification(dist, r, req)
    nid = first.node
    columns, cost = _cost_matrix(dist, nid)
    flat_cost = {i: c for i, c in enumerate(cost.reshape(-1)) if c}
    program = _base_program(cost, req, columns)
    program.add_constraint(dict(flat_cost), LE, first.loss + LOSS_TOL)
    program.add_constraint(dict(flat_cost), GE, first.loss - LOSS_TOL)

    out = [first]
    while True:
        last = out[-1].y.reshape(-1)
        ones = int(last.sum())
        cut = {i: (1.0 if last[i] else -1.0) for i in range(last.size)}
        program.add_constraint(cut, LE, float(ones - 1))
        result = solve_binary_ilp(program)
        if not result.optimal:
            return out
        y = np.rint(result.x).astype(int).reshape(cost.shape)
        loss = float(np.sum(cost * y))
        out.append(ClassificationSolution(nid, dist.actions, columns, y, loss))

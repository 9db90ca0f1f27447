"""Dense linear programming and 0-1 integer programming kernel.

A two-phase tableau simplex with a Dantzig pivot rule (and Bland's rule
as an anti-cycling fallback), plus a depth-first branch-and-bound for
pure binary programs.  Instances in this package stay small (tens of
variables, around a hundred rows), so a dense tableau is the simplest
thing that is exact enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-8
INT_TOL = 1e-6
PIVOT_TOL = 1e-10
COST_TOL = 1e-9

LE, GE, EQ = "<=", ">=", "="


class NumericalError(RuntimeError):
    """The solver broke down numerically; distinct from infeasibility."""


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | None = None
    x: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class LpProblem:
    """Linear objective, linear rows, per-variable bounds, binary flags.

    Variables default to free; call :meth:`set_bounds` to restrict and
    :meth:`set_binary` to mark 0-1 variables for the integer solver.
    """

    def __init__(self, objective: Sequence[float], sense: str = "max") -> None:
        self.c = np.asarray(objective, dtype=float)
        if self.c.ndim != 1 or self.c.size == 0:
            raise ValueError("objective must be a nonempty vector")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective coefficients must be finite")
        if sense not in ("max", "min"):
            raise ValueError(f"unknown sense {sense!r}")
        self.sense = sense
        self.n = self.c.size
        self.rows: list[np.ndarray] = []
        self.rels: list[str] = []
        self.rhs: list[float] = []
        self.bounds: list[tuple[float | None, float | None]] = [(None, None)] * self.n
        self.binaries: set[int] = set()

    def add_constraint(self, coeffs: Sequence[float], rel: str, rhs: float) -> None:
        row = np.zeros(self.n)
        if isinstance(coeffs, dict):
            for i, v in coeffs.items():
                row[i] = v
        else:
            row[:] = np.asarray(coeffs, dtype=float)
        if not (np.all(np.isfinite(row)) and np.isfinite(rhs)):
            raise ValueError("constraint coefficients must be finite")
        if rel not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {rel!r}")
        self.rows.append(row)
        self.rels.append(rel)
        self.rhs.append(float(rhs))

    def set_bounds(self, i: int, lo: float | None = None, hi: float | None = None) -> None:
        if lo is not None and hi is not None and lo > hi:
            raise ValueError(f"variable {i}: lower bound {lo} exceeds upper bound {hi}")
        self.bounds[i] = (lo, hi)

    def set_binary(self, i: int) -> None:
        self.binaries.add(i)
        self.bounds[i] = (0.0, 1.0)

    def copy(self) -> "LpProblem":
        clone = LpProblem(self.c.copy(), self.sense)
        clone.rows = [r.copy() for r in self.rows]
        clone.rels = list(self.rels)
        clone.rhs = list(self.rhs)
        clone.bounds = list(self.bounds)
        clone.binaries = set(self.binaries)
        return clone


# ---------------------------------------------------------------------------
# Continuous solve
# ---------------------------------------------------------------------------


def _standardize(p: LpProblem):
    """Rewrite onto nonnegative variables; returns the pieces plus a decoder.

    Each variable becomes one or two nonnegative columns: shifted when a
    finite lower bound exists, mirrored when only an upper bound exists,
    split into a difference when free.  Finite ranges add an extra row.
    """
    col_of: list[list[tuple[int, float]]] = []  # per variable: (column, sign)
    offsets = np.zeros(p.n)
    n_cols = 0
    extra_rows: list[tuple[np.ndarray, str, float]] = []

    for i, (lo, hi) in enumerate(p.bounds):
        if lo is not None:
            col_of.append([(n_cols, 1.0)])
            offsets[i] = lo
            if hi is not None:
                row = np.zeros(p.n)
                row[i] = 1.0
                extra_rows.append((row, LE, hi))
            n_cols += 1
        elif hi is not None:
            col_of.append([(n_cols, -1.0)])
            offsets[i] = hi
            n_cols += 1
        else:
            col_of.append([(n_cols, 1.0), (n_cols + 1, -1.0)])
            n_cols += 2

    def expand(row: np.ndarray) -> np.ndarray:
        out = np.zeros(n_cols)
        for i, entries in enumerate(col_of):
            if row[i] != 0.0:
                for j, sign in entries:
                    out[j] += row[i] * sign
        return out

    rows = []
    for row, rel, rhs in list(zip(p.rows, p.rels, p.rhs)) + extra_rows:
        rows.append((expand(row), rel, rhs - float(row @ offsets)))

    c = p.c if p.sense == "min" else -p.c
    c_std = expand(c)

    def decode(u: np.ndarray) -> np.ndarray:
        x = offsets.copy()
        for i, entries in enumerate(col_of):
            for j, sign in entries:
                x[i] += sign * u[j]
        return x

    return rows, c_std, n_cols, decode


def _two_phase(rows, c, n_cols):
    """Tableau simplex over standard rows; returns (status, u) in column space."""
    m = len(rows)
    if m == 0:
        # Unconstrained: optimal only if no improving direction exists.
        if np.any(c < -COST_TOL):
            return "unbounded", None
        return "optimal", np.zeros(n_cols)

    # Assemble equality rows with slack columns and nonnegative rhs.
    slack_cols = sum(1 for _, rel, _ in rows if rel != EQ)
    total = n_cols + slack_cols
    A = np.zeros((m, total))
    b = np.zeros(m)
    basis = np.full(m, -1, dtype=int)
    s = n_cols
    for k, (row, rel, rhs) in enumerate(rows):
        sign = 1.0
        if rhs < 0:
            row, rhs, rel = -row, -rhs, {LE: GE, GE: LE, EQ: EQ}[rel]
        A[k, :n_cols] = row
        b[k] = rhs
        if rel == LE:
            A[k, s] = 1.0
            basis[k] = s
            s += 1
        elif rel == GE:
            A[k, s] = -1.0
            s += 1

    # Artificials for rows without a ready basic column.
    need_art = [k for k in range(m) if basis[k] < 0]
    n_art = len(need_art)
    if n_art:
        A = np.hstack([A, np.zeros((m, n_art))])
        for j, k in enumerate(need_art):
            A[k, total + j] = 1.0
            basis[k] = total + j

    tableau = np.hstack([A, b[:, None]])
    width = tableau.shape[1] - 1

    def run(cost: np.ndarray, art_cutoff: int) -> str:
        """Optimize ``cost`` in place; returns "optimal" or "unbounded"."""
        z = np.zeros(width + 1)
        z[:cost.size] = cost
        for k in range(m):
            if z[basis[k]] != 0.0:
                z -= z[basis[k]] * tableau[k]
        degenerate_streak = 0
        bland = False
        for _ in range(20000 + 50 * (m + width)):
            reduced = z[:art_cutoff]
            if bland:
                candidates = np.nonzero(reduced < -COST_TOL)[0]
                if candidates.size == 0:
                    return "optimal"
                enter = int(candidates[0])
            else:
                enter = int(np.argmin(reduced))
                if reduced[enter] >= -COST_TOL:
                    return "optimal"
            col = tableau[:m, enter]
            eligible = np.nonzero(col > PIVOT_TOL)[0]
            if eligible.size == 0:
                return "unbounded"
            ratios = tableau[eligible, -1] / col[eligible]
            best = np.min(ratios)
            tie = eligible[ratios <= best + PIVOT_TOL]
            # Deterministic tie-break: smallest basic-variable index leaves.
            leave = int(tie[np.argmin(basis[tie])])
            if best <= PIVOT_TOL:
                degenerate_streak += 1
                if degenerate_streak > 64:
                    bland = True
            else:
                degenerate_streak = 0
            pivot = tableau[leave, enter]
            tableau[leave] /= pivot
            factors = tableau[:m, enter].copy()
            factors[leave] = 0.0
            tableau[:m] -= np.outer(factors, tableau[leave])
            z -= z[enter] * tableau[leave]
            basis[leave] = enter
        raise NumericalError("simplex exceeded its pivot budget")

    if n_art:
        phase1 = np.zeros(width)
        phase1[total:] = 1.0
        status = run(phase1, total)
        if status != "optimal":  # pragma: no cover - phase 1 is bounded below
            raise NumericalError("phase 1 reported an unbounded objective")
        residual = float(tableau[:m, -1] @ (basis >= total))
        if residual > FEAS_TOL:
            return "infeasible", None
        # Drive leftover artificials out of the basis where possible.
        for k in range(m):
            if basis[k] >= total:
                nz = np.nonzero(np.abs(tableau[k, :total]) > PIVOT_TOL)[0]
                if nz.size == 0:
                    continue  # redundant row; harmless to keep
                enter = int(nz[0])
                pivot = tableau[k, enter]
                tableau[k] /= pivot
                factors = tableau[:m, enter].copy()
                factors[k] = 0.0
                tableau[:m] -= np.outer(factors, tableau[k])
                basis[k] = enter
        tableau[:, total:width] = 0.0  # fence off artificial columns

    cost2 = np.zeros(total)
    cost2[:n_cols] = c
    status = run(cost2, total)
    if status != "optimal":
        return status, None
    u = np.zeros(total)
    for k in range(m):
        if basis[k] < total:
            u[basis[k]] = tableau[k, -1]
    return "optimal", u[:n_cols]


def _check_feasible(p: LpProblem, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
    for row, rel, rhs in zip(p.rows, p.rels, p.rhs):
        lhs = float(row @ x)
        if rel == LE and lhs > rhs + tol:
            return False
        if rel == GE and lhs < rhs - tol:
            return False
        if rel == EQ and abs(lhs - rhs) > tol:
            return False
    for i, (lo, hi) in enumerate(p.bounds):
        if lo is not None and x[i] < lo - tol:
            return False
        if hi is not None and x[i] > hi + tol:
            return False
    return True


def solve_lp(p: LpProblem) -> LpResult:
    """Solve the continuous problem exactly enough (feasibility within 1e-8).

    Deterministic: a fixed pivot rule, with Bland's rule engaged only
    after a long degenerate streak, yields the same vertex every run.
    """
    if p.binaries:
        raise ValueError("solve_lp handles continuous problems only")
    rows, c_std, n_cols, decode = _standardize(p)
    status, u = _two_phase(rows, c_std, n_cols)
    if status != "optimal":
        return LpResult(status=status)
    x = decode(u)
    if not _check_feasible(p, x, tol=1e-7):
        raise NumericalError("solver returned an infeasible point")
    return LpResult(status="optimal", value=float(p.c @ x), x=x)


# ---------------------------------------------------------------------------
# Binary solve
# ---------------------------------------------------------------------------


def solve_binary_ilp(p: LpProblem) -> LpResult:
    """Exact optimum of a 0-1 program by depth-first branch and bound.

    Branches on the first unfixed binary, trying 1 before 0, and only
    replaces the incumbent on strict improvement; among optima this keeps
    the solution that sets the earliest-declared variables to 1.
    """
    if not p.binaries:
        raise ValueError("no binary variables declared")
    for i in np.nonzero(p.c)[0]:
        if int(i) not in p.binaries:
            raise ValueError("objective must be supported on binary variables")
    order = sorted(p.binaries)
    flip = 1.0 if p.sense == "min" else -1.0
    incumbent: dict = {"value": np.inf, "x": None}

    def recurse(problem: LpProblem, depth: int) -> None:
        relax = problem.copy()
        relax.binaries = set()
        relax.sense = "min"
        relax.c = flip * p.c
        res = solve_lp(relax)
        if res.status == "unbounded":
            raise NumericalError("relaxation is unbounded")
        if res.status != "optimal":
            return
        if res.value >= incumbent["value"] - 1e-9:
            return
        if depth == len(order):
            x = res.x.copy()
            for i in order:
                r = round(x[i])
                if abs(x[i] - r) > INT_TOL:  # pragma: no cover - fixed by bounds
                    raise NumericalError("fixed binary came back fractional")
                x[i] = r
            incumbent["value"] = flip * float(p.c @ x)
            incumbent["x"] = x
            return
        i = order[depth]
        for v in (1.0, 0.0):
            child = problem.copy()
            child.bounds[i] = (v, v)
            recurse(child, depth + 1)

    recurse(p, 0)
    if incumbent["x"] is None:
        return LpResult(status="infeasible")
    value = float(p.c @ incumbent["x"])
    return LpResult(status="optimal", value=value, x=incumbent["x"])

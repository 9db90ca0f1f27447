"""Uniform sampling of constraint polytopes by hit-and-run walks.

The linear rows of a :class:`~simcat.srf.ConstraintSystem` are compiled
once: equalities are eliminated through an orthonormal null-space basis,
strict rows are tightened by a small slack so that samples stay safely
inside, and a Chebyshev-center LP provides an interior starting point.
The walk itself picks a uniform direction, intersects it with the
reduced polytope, and jumps to a uniform point of the chord.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import EQ, GE, LE, LpProblem, NumericalError, solve_lp
from .srf import ConstraintSystem, FeasibilityResult, feasibility_check, parameter_set

#: strict rows are pulled in by at most this much before sampling
MAX_TIGHTEN = 1e-6

#: relative shrink applied at both chord ends when drawing a step
CHORD_SHRINK = 1e-9

_ZERO_ROW = 1e-12
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class Polytope:
    """A compiled sampling space ``x = offset + basis @ y``, ``G y <= g``.

    ``basis`` has orthonormal columns spanning the equality null space;
    ``start`` is an interior point (in reduced coordinates) and ``tau``
    the tightening applied to formerly strict rows.
    """

    system: ConstraintSystem
    offset: np.ndarray
    basis: np.ndarray
    G: np.ndarray
    g: np.ndarray
    start: np.ndarray
    tau: float
    epsilon: float

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def to_original(self, y: np.ndarray) -> np.ndarray:
        """Map reduced coordinates back to the full variable space."""
        single = np.ndim(y) == 1
        x = self.offset + np.atleast_2d(y) @ self.basis.T
        return x[0] if single else x


def compile_polytope(
    system: ConstraintSystem,
    feasibility: FeasibilityResult | None = None,
) -> Polytope:
    """Reduce a constraint system to an inequality-only sampling space."""
    if feasibility is None:
        feasibility = feasibility_check(system)
    if not feasibility.feasible:
        raise ValueError("the constraint system is infeasible; nothing to sample")
    eps = float(feasibility.epsilon)
    tau = min(MAX_TIGHTEN, eps / 2.0)

    A, rels, b, strict = system.to_arrays()
    eq_mask = np.array([r == EQ for r in rels])
    G_rows: list[np.ndarray] = []
    g_vals: list[float] = []
    for i in range(len(rels)):
        if eq_mask[i]:
            continue
        tight = tau if strict[i] else 0.0
        if rels[i] == GE:
            G_rows.append(-A[i])
            g_vals.append(-(b[i] + tight))
        else:
            G_rows.append(A[i])
            g_vals.append(b[i] - tight)
    G_full = np.array(G_rows) if G_rows else np.zeros((0, system.n))
    g_full = np.array(g_vals)

    A_eq, b_eq = A[eq_mask], b[eq_mask]
    n = system.n
    if A_eq.shape[0]:
        offset, *_ = np.linalg.lstsq(A_eq, b_eq, rcond=None)
        residual = float(np.linalg.norm(A_eq @ offset - b_eq))
        if residual > _RESIDUAL_TOL:
            raise NumericalError(f"equality rows are inconsistent (residual {residual:.2e})")
        _, s, vt = np.linalg.svd(A_eq)
        rank = int(np.sum(s > max(A_eq.shape) * np.finfo(float).eps * (s[0] if s.size else 0)))
        basis = vt[rank:].T
    else:
        offset = np.zeros(n)
        basis = np.eye(n)

    G = G_full @ basis
    g = g_full - G_full @ offset
    norms = np.linalg.norm(G, axis=1) if G.shape[0] else np.zeros(0)
    degenerate = norms <= _ZERO_ROW
    if np.any(g[degenerate] < -1e-9):
        raise NumericalError("a constraint became unsatisfiable after elimination")
    G, g, norms = G[~degenerate], g[~degenerate], norms[~degenerate]

    if basis.shape[1] == 0:
        start = np.zeros(0)
    else:
        start = _chebyshev_center(G, g, norms)

    poly = Polytope(system, offset, basis, G, g, start, tau, eps)
    _check_compiled(poly, feasibility)
    return poly


def _chebyshev_center(G: np.ndarray, g: np.ndarray, norms: np.ndarray) -> np.ndarray:
    d = G.shape[1]
    if G.shape[0] == 0:
        return np.zeros(d)
    p = LpProblem(np.concatenate([np.zeros(d), [1.0]]), "max")
    for i in range(G.shape[0]):
        p.add_constraint(np.concatenate([G[i], [norms[i]]]), LE, g[i])
    p.set_bounds(d, lo=0.0, hi=1e9)
    r = solve_lp(p)
    if not r.optimal or r.value <= _ZERO_ROW:
        raise NumericalError("the polytope has no interior ball to start the walk from")
    return r.x[:d].copy()


def _check_compiled(poly: Polytope, feasibility: FeasibilityResult) -> None:
    system = poly.system
    A, rels, b, strict = system.to_arrays()
    eq = [i for i, r in enumerate(rels) if r == EQ]
    if eq:
        residual = float(np.linalg.norm(A[eq] @ poly.offset - b[eq]))
        if residual > _RESIDUAL_TOL:
            raise NumericalError(f"offset misses the equality rows by {residual:.2e}")
        gram = poly.basis.T @ poly.basis
        if not np.allclose(gram, np.eye(poly.dim), atol=1e-10):
            raise NumericalError("null-space basis lost orthonormality")

    # the feasibility witness must land inside the tightened region
    w = feasibility.witness
    y_w = poly.basis.T @ (w - poly.offset)
    margins = system.margins(poly.to_original(y_w))
    strict_rows = np.array([row.strict for row in system.rows])
    if np.any(margins < -1e-8):
        raise NumericalError("witness projection violates a weak row")
    if strict_rows.any() and np.any(
        margins[strict_rows] < poly.epsilon - poly.tau - 1e-7
    ):
        raise NumericalError("witness projection lost its strict slack")

    if poly.dim and np.any(poly.G @ poly.start - poly.g > -_ZERO_ROW):
        raise NumericalError("start point is not strictly interior")


# ---------------------------------------------------------------------------
# The walk
# ---------------------------------------------------------------------------


def chord(poly: Polytope, y: np.ndarray, direction: np.ndarray) -> tuple[float, float]:
    """Exact parameter interval of ``{y + t * direction}`` inside the polytope."""
    a = poly.G @ direction
    s = poly.g - poly.G @ y
    t_lo, t_hi = -np.inf, np.inf
    pos = a > _ZERO_ROW
    neg = a < -_ZERO_ROW
    if pos.any():
        t_hi = float(np.min(s[pos] / a[pos]))
    if neg.any():
        t_lo = float(np.max(s[neg] / a[neg]))
    return t_lo, t_hi


@dataclass(frozen=True)
class SampleBatch:
    """Uniform draws from one compiled polytope, in original coordinates."""

    system: ConstraintSystem
    points: np.ndarray  # (n_samples, n_variables)
    tau: float

    def __len__(self) -> int:
        return self.points.shape[0]

    def parameters(self, i: int, category: str):
        """Likeness parameters of the ``i``-th draw."""
        return parameter_set(self.system, self.points[i], category)


def hit_and_run(
    poly: Polytope,
    n_samples: int,
    seed,
    burn_in: int = 1000,
    thinning: int = 5,
) -> SampleBatch:
    """Run the walk and record ``n_samples`` thinned states.

    Draw ``i`` is the state after ``burn_in + thinning * i`` steps; the
    whole batch is a deterministic function of ``seed``.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if burn_in < 0 or thinning < 1:
        raise ValueError("burn-in must be >= 0 and thinning >= 1")
    rng = np.random.default_rng(seed)

    if poly.dim == 0:
        x0 = poly.to_original(np.zeros(0))
        pts = np.tile(x0, (n_samples, 1))
        batch = SampleBatch(poly.system, pts, poly.tau)
        _check_batch(poly, batch)
        return batch

    y = poly.start.copy()
    out = np.empty((n_samples, poly.system.n))
    step = 0
    for i in range(n_samples):
        target = burn_in + thinning * i
        while step < target:
            y = _step(poly, y, rng)
            step += 1
        out[i] = poly.to_original(y)
    batch = SampleBatch(poly.system, out, poly.tau)
    _check_batch(poly, batch)
    return batch


def _step(poly: Polytope, y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.standard_normal(poly.dim)
    u /= np.linalg.norm(u)
    t_lo, t_hi = chord(poly, y, u)
    if not (np.isfinite(t_lo) and np.isfinite(t_hi)):
        raise NumericalError("the walk found an unbounded direction")
    t_lo, t_hi = min(t_lo, 0.0), max(t_hi, 0.0)
    width = t_hi - t_lo
    shrink = CHORD_SHRINK * width
    if width <= 0.0 or t_lo + shrink >= t_hi - shrink:
        return y
    t = rng.uniform(t_lo + shrink, t_hi - shrink)
    return y + t * u


def _check_batch(poly: Polytope, batch: SampleBatch) -> None:
    """Every emitted point must satisfy the original rows, strictly where due."""
    system = batch.system
    A, rels, b, strict = system.to_arrays()
    if not len(system.rows):
        return
    V = A @ batch.points.T  # (rows, samples)
    for i, rel in enumerate(rels):
        if rel == EQ:
            worst = float(np.max(np.abs(V[i] - b[i])))
            if worst > 1e-8:
                raise NumericalError(
                    f"sample violates equality row {system.rows[i].label!r} by {worst:.2e}"
                )
            continue
        margin = (V[i] - b[i]) if rel == GE else (b[i] - V[i])
        floor = poly.tau / 2.0 if strict[i] else -1e-10
        if float(np.min(margin)) < floor:
            raise NumericalError(
                f"sample violates row {system.rows[i].label!r} "
                f"(margin {float(np.min(margin)):.2e})"
            )

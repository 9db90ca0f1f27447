"""Similarity-dissimilarity evaluation and likeness-based assignment.

Per-criterion values come from piecewise-linear threshold profiles; they
aggregate to a similarity/dissimilarity pair at any node of the hierarchy
(weighted mean with pairwise interaction corrections, product-form
dissimilarity), combine into a likeness degree, and drive the assignment
of an action to every category whose reference set it resembles enough.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .hierarchy import (
    CriteriaHierarchy,
    NodeId,
    PerformanceVector,
    Problem,
    SimDisFunction,
    performance_diff,
)

NET_FLOW_TOL = 1e-9
NORM_TOL = 1e-6


def eval_simdis(f: SimDisFunction, delta: float) -> float:
    """Value in [-1, 1] of the threshold profile at a signed difference.

    1 up to d1, linear down to 0 at d2, 0 up to d3, linear down to -1 at
    d4, and -1 beyond — on the side matching the sign of ``delta``.
    Degenerate (equal) thresholds simply make the linear pieces empty.
    """
    d1, d2, d3, d4 = f.side(delta)
    m = abs(delta)
    if m <= d1:
        return 1.0
    if m <= d2:
        return (d2 - m) / (d2 - d1)
    if m <= d3:
        return 0.0
    if m <= d4:
        return -(m - d3) / (d4 - d3)
    return -1.0


def split_sd(v: float) -> tuple[float, float]:
    """Split a profile value into its (similarity, dissimilarity) parts."""
    if v > 0.0:
        return v, 0.0
    if v < 0.0:
        return 0.0, v
    return 0.0, 0.0


# ---------------------------------------------------------------------------
# Category parameters
# ---------------------------------------------------------------------------


def _pair_key(t1: NodeId, t2: NodeId) -> tuple[NodeId, NodeId]:
    return (t1, t2) if t1 <= t2 else (t2, t1)


@dataclass
class ParameterSet:
    """Elementary weights and interaction coefficients of one category.

    ``mutual`` holds the signed coefficients of mutual-strengthening
    (positive) and mutual-weakening (negative) pairs, keyed by unordered
    pair; ``antagonistic`` holds the negative coefficients k(t1 | t2) of
    ordered pairs where similarity on t1 is discounted by dissimilarity
    on t2.  Construction enforces the net-flow guard: no criterion's
    weight may be exhausted by its negative coefficients.
    """

    category: str
    weights: dict[NodeId, float]
    mutual: dict[tuple[NodeId, NodeId], float] = field(default_factory=dict)
    antagonistic: dict[tuple[NodeId, NodeId], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.weights = {tuple(t): float(w) for t, w in self.weights.items()}
        self.mutual = {
            _pair_key(tuple(t1), tuple(t2)): float(k)
            for (t1, t2), k in self.mutual.items()
        }
        self.antagonistic = {
            (tuple(t1), tuple(t2)): float(k)
            for (t1, t2), k in self.antagonistic.items()
        }
        for w in self.weights.values():
            if w < 0:
                raise ValueError(f"{self.category}: negative weight {w}")
        for (t1, t2), k in self.antagonistic.items():
            if k >= 0:
                raise ValueError(
                    f"{self.category}: antagonistic coefficient {k} must be negative"
                )
        for t1, flow in self.net_flows().items():
            if flow < -NET_FLOW_TOL:
                raise ValueError(
                    f"{self.category}: net flow {flow:.6g} on criterion {t1} is negative"
                )

    def net_flows(self) -> dict[NodeId, float]:
        """Weight of each criterion net of its negative coefficients."""
        flows = dict(self.weights)
        for (t1, t2), k in self.mutual.items():
            if k < 0:
                flows[t1] = flows.get(t1, 0.0) + k
                flows[t2] = flows.get(t2, 0.0) + k
        for (t1, _t2), k in self.antagonistic.items():
            flows[t1] = flows.get(t1, 0.0) + k
        return flows

    def normalization(self) -> float:
        return sum(self.weights.values()) + sum(self.mutual.values())

    def check_normalized(self, total: float = 100.0, tol: float = NORM_TOL) -> None:
        got = self.normalization()
        if abs(got - total) > tol:
            raise ValueError(
                f"{self.category}: weights plus mutual coefficients sum to {got!r}, "
                f"expected {total}"
            )

    def scaled(self, factor: float) -> "ParameterSet":
        """A copy with every weight and coefficient multiplied by ``factor > 0``."""
        if factor <= 0:
            raise ValueError("scaling factor must be positive")
        return ParameterSet(
            category=self.category,
            weights={t: w * factor for t, w in self.weights.items()},
            mutual={p: k * factor for p, k in self.mutual.items()},
            antagonistic={p: k * factor for p, k in self.antagonistic.items()},
        )


@dataclass(frozen=True)
class PairwiseLikeness:
    """Similarity, dissimilarity, and their combination at one node."""

    s: float
    d: float

    @property
    def delta(self) -> float:
        return self.s * (1.0 + self.d)


# ---------------------------------------------------------------------------
# Aggregation over a node
# ---------------------------------------------------------------------------


def _per_criterion(
    h: CriteriaHierarchy,
    a: PerformanceVector,
    b: PerformanceVector,
    elems: Iterable[NodeId],
) -> tuple[dict[NodeId, float], dict[NodeId, float]]:
    s: dict[NodeId, float] = {}
    d: dict[NodeId, float] = {}
    for t in elems:
        diff = performance_diff(h.scale(t), a[t], b[t])
        s[t], d[t] = split_sd(eval_simdis(h.simdis(t), diff))
    return s, d


def partial_similarity(
    h: CriteriaHierarchy,
    a: PerformanceVector,
    b: PerformanceVector,
    r: "NodeId | str",
    p: ParameterSet,
) -> float:
    """Interaction-corrected weighted similarity over the criteria under ``r``.

    Interaction terms count only when both endpoints descend from ``r``;
    a mutual pair contributes s*s*k and an antagonistic pair s*|d|*k, to
    the numerator and the normalization constant alike.
    """
    elems = h._descendants[h.resolve(r)]
    s, d = _per_criterion(h, a, b, elems)
    scope = set(elems)
    num = 0.0
    den = 0.0
    for t in elems:
        w = p.weights[t]
        num += w * s[t]
        den += w
    for (t1, t2), k in p.mutual.items():
        if t1 in scope and t2 in scope:
            term = s[t1] * s[t2] * k
            num += term
            den += term
    for (t1, t2), k in p.antagonistic.items():
        if t1 in scope and t2 in scope:
            term = s[t1] * abs(d[t2]) * k
            num += term
            den += term
    if den <= 0.0:
        # The net-flow guard on ParameterSet construction rules this out.
        raise AssertionError(
            f"normalization constant {den!r} at {h.name(r)!r} is not positive"
        )
    return min(1.0, max(0.0, num / den))


def partial_dissimilarity(
    h: CriteriaHierarchy,
    a: PerformanceVector,
    b: PerformanceVector,
    r: "NodeId | str",
) -> float:
    """Product-form dissimilarity in [-1, 0]: one vetoing criterion forces -1."""
    elems = h._descendants[h.resolve(r)]
    _, d = _per_criterion(h, a, b, elems)
    prod = 1.0
    for t in elems:
        prod *= 1.0 + d[t]
    return prod - 1.0


def pairwise_likeness(
    h: CriteriaHierarchy,
    a: PerformanceVector,
    b: PerformanceVector,
    r: "NodeId | str",
    p: ParameterSet,
) -> PairwiseLikeness:
    return PairwiseLikeness(
        s=partial_similarity(h, a, b, r, p),
        d=partial_dissimilarity(h, a, b, r),
    )


def partial_likeness(
    h: CriteriaHierarchy,
    a: PerformanceVector,
    b: PerformanceVector,
    r: "NodeId | str",
    p: ParameterSet,
) -> float:
    """Likeness degree s * (1 + d) of ``a`` toward ``b`` at node ``r``."""
    return pairwise_likeness(h, a, b, r, p).delta


def likeness_to_set(
    h: CriteriaHierarchy,
    a: PerformanceVector,
    refs: "Iterable[PerformanceVector] | Mapping[str, PerformanceVector]",
    r: "NodeId | str",
    p: ParameterSet,
) -> float:
    """Best likeness of ``a`` toward any member of a reference set."""
    if isinstance(refs, Mapping):
        refs = refs.values()
    values = [partial_likeness(h, a, b, r, p) for b in refs]
    if not values:
        raise ValueError("reference set is empty")
    return max(values)


def assign(
    problem: Problem,
    a: "str | PerformanceVector",
    r: "NodeId | str",
    params: Mapping[str, ParameterSet],
    lam: Mapping[str, float] | None = None,
) -> frozenset[str]:
    """Categories whose reference set ``a`` resembles at node ``r``.

    Returns every category with likeness at or above its threshold, or
    the singleton dummy category when none qualifies.
    """
    h = problem.hierarchy
    vec = problem.performance(a) if isinstance(a, str) else a
    rid = h.resolve(r)
    matched = []
    for cat in problem.categories:
        threshold = lam[cat] if lam is not None else problem.threshold(rid, cat)
        delta = likeness_to_set(h, vec, problem.reference_sets[cat], rid, params[cat])
        if delta >= threshold:
            matched.append(cat)
    if matched:
        return frozenset(matched)
    return frozenset({problem.dummy_category})

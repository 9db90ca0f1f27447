"""Monte Carlo acceptability indices for likeness-based assignment.

For every sampled coefficient vector the assignment rule runs at each
non-elementary node, and the resulting category sets are tallied.  The
per-criterion similarity and dissimilarity of an (action, reference)
pair do not depend on the sampled coefficients, so for a fixed pair the
aggregated similarity is a ratio of two linear forms of the sample
matrix — the whole batch is evaluated with two matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .hierarchy import NodeId, Problem, elementary_descendants
from .likeness import _per_criterion
from .lp import NumericalError
from .sampler import SampleBatch


@dataclass(frozen=True)
class AssignmentDistribution:
    """Frequencies of the sampled assignment sets per (node, action).

    ``counts[(r, a)]`` holds one integer per category bitmask; bit ``j``
    stands for the ``j``-th real category and the zero mask for the
    dummy outcome.  Percentages are derived views of these counts.
    """

    nodes: tuple[NodeId, ...]
    node_names: tuple[str, ...]
    actions: tuple[str, ...]
    categories: tuple[str, ...]
    dummy: str
    sample_count: int
    counts: Mapping[tuple[NodeId, str], np.ndarray]

    def resolve_node(self, r) -> NodeId:
        if isinstance(r, str):
            for nid, name in zip(self.nodes, self.node_names):
                if name == r:
                    return nid
            raise KeyError(f"no node named {r!r} in this distribution")
        nid = tuple(r)
        if nid not in self.nodes:
            raise KeyError(f"node {r!r} not covered by this distribution")
        return nid

    def _counts_for(self, r, a: str) -> np.ndarray:
        nid = self.resolve_node(r)
        if a not in self.actions:
            raise KeyError(f"unknown action {a!r}")
        return self.counts[(nid, a)]

    def _set_of(self, mask: int) -> frozenset[str]:
        if mask == 0:
            return frozenset({self.dummy})
        return frozenset(
            c for j, c in enumerate(self.categories) if mask & (1 << j)
        )

    def exact_frequencies(self, r, a: str) -> dict[frozenset[str], float]:
        """Nonzero exact-set percentages, keyed by the assigned set."""
        counts = self._counts_for(r, a)
        n = self.sample_count
        return {
            self._set_of(mask): 100.0 * c / n
            for mask, c in enumerate(counts)
            if c
        }

    def marginal(self, r, a: str, category: str) -> float:
        """Percentage of samples whose assignment set contains ``category``."""
        counts = self._counts_for(r, a)
        if category == self.dummy:
            return 100.0 * counts[0] / self.sample_count
        if category not in self.categories:
            raise ValueError(f"unknown category {category!r}")
        bit = 1 << self.categories.index(category)
        total = sum(int(c) for mask, c in enumerate(counts) if mask & bit)
        return 100.0 * total / self.sample_count

    def marginals(self, r, a: str) -> dict[str, float]:
        out = {c: self.marginal(r, a, c) for c in self.categories}
        out[self.dummy] = self.marginal(r, a, self.dummy)
        return out


def containment_probability(
    dist: AssignmentDistribution, r, a: str, cats: Iterable[str]
) -> float:
    """Percentage of samples whose assignment set contains every ``cats``."""
    wanted = list(cats)
    if not wanted:
        raise ValueError("containment needs a nonempty category set")
    need = 0
    for c in wanted:
        if c not in dist.categories:
            raise ValueError(f"unknown category {c!r}")
        need |= 1 << dist.categories.index(c)
    counts = dist._counts_for(r, a)
    total = sum(
        int(c) for mask, c in enumerate(counts) if mask & need == need
    )
    return 100.0 * total / dist.sample_count


def _column_map(system, h):
    """Column indices of weights and interaction coefficients in a batch."""
    weight_col: dict[NodeId, int] = {}
    mutual: list[tuple[NodeId, NodeId, int]] = []
    antagonistic: list[tuple[NodeId, NodeId, int]] = []
    for i, v in enumerate(system.variables):
        if v.kind == "weight":
            weight_col[v.key] = i
        elif v.kind == "mutual":
            mutual.append((*v.key, i))
        elif v.kind == "antagonistic":
            antagonistic.append((*v.key, i))
    for t in h.elementary():
        if t not in weight_col:
            raise ValueError(
                f"sample batch provides no weight for criterion {h.name(t)!r}"
            )
    return weight_col, mutual, antagonistic


def run_smaa(
    problem: Problem,
    batches: Mapping[str, SampleBatch],
    lam: Mapping[str, float] | None = None,
    nodes: Iterable | None = None,
) -> AssignmentDistribution:
    """Tally assignment sets over paired draws of every category's batch.

    Sample ``i`` combines the ``i``-th point of each category's batch;
    all batches must therefore have the same length.
    """
    h = problem.hierarchy
    node_ids = tuple(
        h.resolve(r) for r in (nodes if nodes is not None else h.non_elementary())
    )
    for r in node_ids:
        if h.is_elementary(r):
            raise ValueError(f"{h.name(r)!r} is elementary; nothing to aggregate")

    missing = [c for c in problem.categories if c not in batches]
    if missing:
        raise ValueError(f"no sample batch for category {missing[0]!r}")
    lengths = {c: len(batches[c]) for c in problem.categories}
    if len(set(lengths.values())) != 1:
        raise ValueError(f"sample batches differ in length: {lengths}")
    n = next(iter(lengths.values()))

    actions = tuple(problem.actions)
    all_elems = h.elementary()
    scopes = {r: frozenset(elementary_descendants(h, r)) for r in node_ids}
    masks = {(r, a): np.zeros(n, dtype=np.int64) for r in node_ids for a in actions}

    for j, cat in enumerate(problem.categories):
        batch = batches[cat]
        system = batch.system
        P = batch.points
        weight_col, mut_cols, ant_cols = _column_map(system, h)
        bit = 1 << j
        for a in actions:
            vec_a = problem.performance(a)
            best = {r: np.full(n, -np.inf) for r in node_ids}
            for vec_b in problem.reference_sets[cat].values():
                s, d = _per_criterion(h, vec_a, vec_b, all_elems)
                for r in node_ids:
                    scope = scopes[r]
                    c_num = np.zeros(system.n)
                    c_den = np.zeros(system.n)
                    for t in scope:
                        c_num[weight_col[t]] += s[t]
                        c_den[weight_col[t]] += 1.0
                    for t1, t2, col in mut_cols:
                        if t1 in scope and t2 in scope:
                            term = s[t1] * s[t2]
                            c_num[col] += term
                            c_den[col] += term
                    for t1, t2, col in ant_cols:
                        if t1 in scope and t2 in scope:
                            term = s[t1] * abs(d[t2])
                            c_num[col] += term
                            c_den[col] += term
                    den = P @ c_den
                    if np.any(den <= 0.0):
                        raise NumericalError(
                            f"normalization constant vanished at {h.name(r)!r}"
                        )
                    sim = np.clip((P @ c_num) / den, 0.0, 1.0)
                    d_r = 1.0
                    for t in scope:
                        d_r *= 1.0 + d[t]
                    delta = sim * d_r  # d_r = 1 + partial dissimilarity
                    np.maximum(best[r], delta, out=best[r])
            for r in node_ids:
                level = (
                    lam[cat] if lam is not None else problem.threshold(r, cat)
                )
                masks[(r, a)][best[r] >= level] |= bit

    q = len(problem.categories)
    counts = {
        key: np.bincount(mask, minlength=1 << q) for key, mask in masks.items()
    }
    return AssignmentDistribution(
        nodes=node_ids,
        node_names=tuple(h.name(r) for r in node_ids),
        actions=actions,
        categories=tuple(problem.categories),
        dummy=problem.dummy_category,
        sample_count=n,
        counts=counts,
    )

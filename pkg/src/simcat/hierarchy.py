"""Criteria trees, measurement scales, and classification-problem data.

The domain model: a tree of criteria whose leaves (elementary criteria)
carry a measurement scale and a similarity-dissimilarity threshold
function, plus the actions, nominal categories, and reference actions
that together define one classification problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

#: A node is addressed by its child-index path from the root; the root is ().
NodeId = tuple[int, ...]

ROOT: NodeId = ()


class ValidationError(ValueError):
    """A document or problem component violates a structural rule."""


# ---------------------------------------------------------------------------
# Scales
# ---------------------------------------------------------------------------

_SCALE_KINDS = ("ratio", "interval", "ordinal")


@dataclass(frozen=True)
class Scale:
    """Measurement scale of an elementary criterion (maximization assumed).

    ``ratio`` and ``interval`` scales are numeric with ``min < max``;
    ``ordinal`` scales are a finite, duplicate-free list of levels ordered
    from worst to best.
    """

    kind: str
    min: float | None = None
    max: float | None = None
    levels: tuple[Any, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _SCALE_KINDS:
            raise ValidationError(f"unknown scale kind {self.kind!r}")
        if self.kind == "ordinal":
            if len(self.levels) < 2:
                raise ValidationError("ordinal scale needs at least two levels")
            if len(set(self.levels)) != len(self.levels):
                raise ValidationError("ordinal scale levels must be duplicate-free")
        else:
            if self.min is None or self.max is None:
                raise ValidationError(f"{self.kind} scale needs min and max")
            if not self.min < self.max:
                raise ValidationError(
                    f"{self.kind} scale needs min < max, got [{self.min}, {self.max}]"
                )

    def contains(self, value: Any) -> bool:
        if self.kind == "ordinal":
            return value in self.levels
        return (
            isinstance(value, (int, float))
            and self.min <= value <= self.max  # type: ignore[operator]
        )

    def span(self) -> float:
        """Largest possible performance difference on this scale."""
        if self.kind == "ordinal":
            return float(len(self.levels) - 1)
        return float(self.max - self.min)  # type: ignore[operator]


def performance_diff(scale: Scale, x: Any, y: Any) -> float:
    """Signed performance difference of ``x`` over ``y`` on ``scale``.

    Numeric scales subtract; ordinal scales count levels, signed by
    direction, so that ``performance_diff(s, x, y) == -performance_diff(s, y, x)``.
    """
    if not scale.contains(x):
        raise ValidationError(f"value {x!r} is off the {scale.kind} scale")
    if not scale.contains(y):
        raise ValidationError(f"value {y!r} is off the {scale.kind} scale")
    if scale.kind == "ordinal":
        return float(scale.levels.index(x) - scale.levels.index(y))
    return float(x - y)


# ---------------------------------------------------------------------------
# Similarity-dissimilarity threshold functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimDisFunction:
    """Piecewise-linear similarity-dissimilarity profile of one criterion.

    Each side holds the four thresholds ``(d1, d2, d3, d4)``: full
    similarity up to ``d1``, fading to zero at ``d2``, neutral up to
    ``d3``, fading to full dissimilarity at ``d4``.  The two sides may
    differ; a symmetric profile stores the same quadruple on both.
    """

    negative: tuple[float, float, float, float]
    positive: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        for label, side in (("negative", self.negative), ("positive", self.positive)):
            if len(side) != 4:
                raise ValidationError(f"{label} side needs exactly 4 thresholds")
            d1, d2, d3, d4 = side
            if not (0 <= d1 <= d2 <= d3 <= d4):
                raise ValidationError(
                    f"{label} thresholds must satisfy 0 <= d1 <= d2 <= d3 <= d4, got {side}"
                )

    @classmethod
    def symmetric(cls, d1: float, d2: float, d3: float, d4: float) -> "SimDisFunction":
        quad = (float(d1), float(d2), float(d3), float(d4))
        return cls(quad, quad)

    def side(self, delta: float) -> tuple[float, float, float, float]:
        return self.positive if delta >= 0 else self.negative


# ---------------------------------------------------------------------------
# The criteria hierarchy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Node:
    name: str
    children: tuple[NodeId, ...]


class CriteriaHierarchy:
    """Tree of criteria; exactly the leaves carry a scale and a profile.

    Nodes are addressed by ``NodeId`` paths or, for convenience, by their
    (unique) names.  Internal nodes must have at least two children —
    a single-child node would duplicate its child's classification and
    add nothing.
    """

    def __init__(
        self,
        nodes: Mapping[NodeId, tuple[str, Sequence[NodeId]]],
        scales: Mapping[NodeId, Scale],
        functions: Mapping[NodeId, SimDisFunction],
    ) -> None:
        self._nodes: dict[NodeId, _Node] = {
            nid: _Node(name, tuple(children)) for nid, (name, children) in nodes.items()
        }
        self._scales = dict(scales)
        self._functions = dict(functions)
        self._by_name: dict[str, NodeId] = {}
        self._validate()
        self._descendants: dict[NodeId, tuple[NodeId, ...]] = {}
        for nid in self._preorder(ROOT):
            self._collect_descendants(nid)

    @classmethod
    def from_nested(cls, root: Mapping[str, Any]) -> "CriteriaHierarchy":
        """Build from a nested ``{"name", "children"| "scale"+"simdis"}`` tree."""
        nodes: dict[NodeId, tuple[str, list[NodeId]]] = {}
        scales: dict[NodeId, Scale] = {}
        functions: dict[NodeId, SimDisFunction] = {}

        def walk(spec: Mapping[str, Any], nid: NodeId) -> None:
            name = spec.get("name")
            if not isinstance(name, str) or not name:
                raise ValidationError(f"node at {nid} needs a nonempty name")
            children_spec = spec.get("children")
            if children_spec:
                if "scale" in spec or "simdis" in spec:
                    raise ValidationError(
                        f"criterion {name!r} has children and must not carry "
                        "a scale or similarity profile"
                    )
                child_ids = [nid + (i + 1,) for i in range(len(children_spec))]
                nodes[nid] = (name, child_ids)
                for child_id, child in zip(child_ids, children_spec):
                    walk(child, child_id)
            else:
                nodes[nid] = (name, [])
                scale = spec.get("scale")
                simdis = spec.get("simdis")
                if not isinstance(scale, Scale) or not isinstance(simdis, SimDisFunction):
                    raise ValidationError(
                        f"leaf criterion {name!r} needs a scale and a similarity profile"
                    )
                scales[nid] = scale
                functions[nid] = simdis

        walk(root, ROOT)
        return cls(nodes, scales, functions)

    def _validate(self) -> None:
        if ROOT not in self._nodes:
            raise ValidationError("hierarchy has no root node")
        for nid, node in self._nodes.items():
            for child in node.children:
                if child not in self._nodes:
                    raise ValidationError(f"node {node.name!r} lists unknown child {child}")
            if len(node.children) == 1:
                raise ValidationError(
                    f"internal node {node.name!r} has a single child; merge it with its child"
                )
            if node.name in self._by_name:
                raise ValidationError(f"duplicate criterion name {node.name!r}")
            self._by_name[node.name] = nid
            is_leaf = not node.children
            if is_leaf != (nid in self._scales) or is_leaf != (nid in self._functions):
                raise ValidationError(
                    f"criterion {node.name!r}: exactly the leaves carry scale and profile"
                )
        for nid, fn in self._functions.items():
            span = self._scales[nid].span()
            for side in (fn.negative, fn.positive):
                if side[3] > span:
                    raise ValidationError(
                        f"criterion {self._nodes[nid].name!r}: threshold d4={side[3]} "
                        f"exceeds the scale span {span}"
                    )

    def _preorder(self, nid: NodeId) -> Iterable[NodeId]:
        yield nid
        for child in self._nodes[nid].children:
            yield from self._preorder(child)

    def _collect_descendants(self, nid: NodeId) -> tuple[NodeId, ...]:
        if nid in self._descendants:
            return self._descendants[nid]
        node = self._nodes[nid]
        if not node.children:
            out: tuple[NodeId, ...] = (nid,)
        else:
            parts: list[NodeId] = []
            for child in node.children:
                parts.extend(self._collect_descendants(child))
            out = tuple(parts)
        self._descendants[nid] = out
        return out

    # -- lookup ------------------------------------------------------------

    def resolve(self, ref: "NodeId | str") -> NodeId:
        """Accept a node id or a node name and return the node id."""
        if isinstance(ref, str):
            try:
                return self._by_name[ref]
            except KeyError:
                raise ValidationError(f"unknown criterion {ref!r}") from None
        ref = tuple(ref)
        if ref not in self._nodes:
            raise ValidationError(f"unknown criterion {ref!r}")
        return ref

    def name(self, ref: "NodeId | str") -> str:
        return self._nodes[self.resolve(ref)].name

    def children(self, ref: "NodeId | str") -> tuple[NodeId, ...]:
        return self._nodes[self.resolve(ref)].children

    def is_elementary(self, ref: "NodeId | str") -> bool:
        return not self._nodes[self.resolve(ref)].children

    def scale(self, ref: "NodeId | str") -> Scale:
        return self._scales[self.resolve(ref)]

    def simdis(self, ref: "NodeId | str") -> SimDisFunction:
        return self._functions[self.resolve(ref)]

    def nodes(self) -> tuple[NodeId, ...]:
        """All node ids in depth-first preorder (root first)."""
        return tuple(self._preorder(ROOT))

    def non_elementary(self) -> tuple[NodeId, ...]:
        return tuple(nid for nid in self._preorder(ROOT) if self._nodes[nid].children)

    def elementary(self) -> tuple[NodeId, ...]:
        return self._descendants[ROOT]


def elementary_descendants(h: CriteriaHierarchy, r: "NodeId | str") -> tuple[NodeId, ...]:
    """Elementary criteria under ``r``, in document order; a leaf yields itself."""
    return h._descendants[h.resolve(r)]


# ---------------------------------------------------------------------------
# Problem = hierarchy + actions + categories
# ---------------------------------------------------------------------------

PerformanceVector = Mapping[NodeId, Any]


@dataclass(frozen=True)
class Problem:
    """One nominal-classification problem instance.

    ``categories`` are the real categories in order; actions that match no
    category fall into ``dummy_category``.  ``thresholds`` maps
    ``(node, category)`` to the likeness level required for membership.
    """

    hierarchy: CriteriaHierarchy
    actions: Mapping[str, PerformanceVector]
    categories: tuple[str, ...]
    reference_sets: Mapping[str, Mapping[str, PerformanceVector]]
    dummy_category: str
    thresholds: Mapping[tuple[NodeId, str], float]

    def threshold(self, r: "NodeId | str", category: str) -> float:
        return self.thresholds[(self.hierarchy.resolve(r), category)]

    def performance(self, action: str) -> PerformanceVector:
        try:
            return self.actions[action]
        except KeyError:
            raise ValidationError(f"unknown action {action!r}") from None


def _check_vector(h: CriteriaHierarchy, owner: str, vec: PerformanceVector) -> dict[NodeId, Any]:
    out: dict[NodeId, Any] = {}
    leaves = set(h.elementary())
    for nid in leaves:
        name = h.name(nid)
        if nid not in vec and name not in vec:  # type: ignore[operator]
            raise ValidationError(f"{owner}: missing performance on {name!r}")
    for key, value in vec.items():
        nid = h.resolve(key)
        if nid not in leaves:
            raise ValidationError(f"{owner}: {h.name(nid)!r} is not an elementary criterion")
        if not h.scale(nid).contains(value):
            raise ValidationError(
                f"{owner}: value {value!r} on {h.name(nid)!r} is off the scale"
            )
        out[nid] = value
    return out


def build_problem(
    hierarchy: CriteriaHierarchy,
    actions: Mapping[str, PerformanceVector],
    categories: Sequence[str],
    reference_sets: Mapping[str, Mapping[str, PerformanceVector]],
    dummy_category: str,
    thresholds: Mapping[Any, float],
) -> Problem:
    """Validate the pieces and assemble a :class:`Problem`.

    ``thresholds`` keys may be ``(node, category)`` pairs or bare category
    names; a bare name applies at every non-elementary node.  All
    performance values are checked against their criterion's scale, every
    real category needs a nonempty reference set, and thresholds must lie
    in [0.5, 1].
    """
    categories = tuple(categories)
    if len(set(categories)) != len(categories):
        raise ValidationError("duplicate category names")
    if dummy_category in categories:
        raise ValidationError("the dummy category must not be a real category")

    checked_actions = {
        name: _check_vector(hierarchy, f"action {name!r}", vec)
        for name, vec in actions.items()
    }

    checked_refs: dict[str, dict[str, dict[NodeId, Any]]] = {}
    for cat in categories:
        refs = reference_sets.get(cat)
        if not refs:
            raise ValidationError(f"category {cat!r} has an empty reference set")
        checked_refs[cat] = {
            ref_name: _check_vector(hierarchy, f"reference {ref_name!r}", vec)
            for ref_name, vec in refs.items()
        }
    for cat in reference_sets:
        if cat not in categories:
            raise ValidationError(f"reference set for unknown category {cat!r}")

    expanded: dict[tuple[NodeId, str], float] = {}
    non_elementary = hierarchy.non_elementary()
    # bare-category defaults first so that (node, category) pairs override
    # them no matter the mapping's iteration order
    items = sorted(thresholds.items(), key=lambda kv: not isinstance(kv[0], str))
    for key, lam in items:
        if isinstance(key, str) and key in categories:
            targets = [(r, key) for r in non_elementary]
        else:
            node_ref, cat = key
            targets = [(hierarchy.resolve(node_ref), cat)]
        for r, cat in targets:
            if cat not in categories:
                raise ValidationError(f"threshold for unknown category {cat!r}")
            if not 0.5 <= lam <= 1.0:
                raise ValidationError(
                    f"threshold {lam} for {cat!r} is out of range [0.5, 1]"
                )
            expanded[(r, cat)] = float(lam)
    for r in non_elementary:
        for cat in categories:
            if (r, cat) not in expanded:
                raise ValidationError(
                    f"missing likeness threshold for {cat!r} at {hierarchy.name(r)!r}"
                )

    return Problem(
        hierarchy=hierarchy,
        actions=checked_actions,
        categories=categories,
        reference_sets=checked_refs,
        dummy_category=dummy_category,
        thresholds=expanded,
    )

"""Card-deck weight elicitation and the polytope of admissible parameters.

Importance parameters are elicited per tree node by laying out cards on
importance levels: blank cards between consecutive levels stretch the
gaps, and a ratio bounds the top level against the bottom one.  Blank
counts and the ratio may be interval-valued, so the answers carve out a
polytope of weight vectors rather than a single point; the point case is
solved exactly by :func:`srf_deterministic`.

Interactions ride along as extra cards: a pair card ``{X, Y}`` carries
the joint importance of two criteria including their mutual coefficient,
and a shadow card ``X'`` carries a criterion's importance discounted by
the antagonism it suffers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hierarchy import (
    CriteriaHierarchy,
    NodeId,
    ValidationError,
    elementary_descendants,
)
from .likeness import ParameterSet
from .lp import EQ, GE, LE, LpProblem, solve_lp

#: verdict threshold: slack at or below this counts as degenerate
EPS_TOL = 1e-9

_MUTUAL_KINDS = ("strengthening", "weakening")
_KINDS = _MUTUAL_KINDS + ("antagonistic",)


def _node(ref) -> NodeId:
    nid = tuple(ref)
    if not all(isinstance(i, int) for i in nid):
        raise ValidationError(
            f"{ref!r} is not a node id; resolve criterion names first"
        )
    return nid


@dataclass(frozen=True)
class InteractionDecl:
    """A declared interaction between two elementary criteria.

    ``strengthening`` and ``weakening`` pairs are unordered; an
    ``antagonistic`` declaration is ordered — similarity on ``first`` is
    discounted when ``second`` is strongly dissimilar.
    """

    kind: str
    first: NodeId
    second: NodeId

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown interaction kind {self.kind!r}")
        object.__setattr__(self, "first", _node(self.first))
        object.__setattr__(self, "second", _node(self.second))
        if self.first == self.second:
            raise ValidationError("an interaction needs two distinct criteria")

    @property
    def mutual(self) -> bool:
        return self.kind in _MUTUAL_KINDS


@dataclass(frozen=True)
class Card:
    """One card in a deck: a criterion, a pair ``{X, Y}``, or a shadow ``X'``."""

    kind: str
    members: tuple[NodeId, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("criterion", "pair", "shadow"):
            raise ValidationError(f"unknown card kind {self.kind!r}")
        members = tuple(_node(m) for m in self.members)
        object.__setattr__(self, "members", members)
        expected = 2 if self.kind == "pair" else 1
        if len(members) != expected:
            raise ValidationError(f"a {self.kind} card needs {expected} member(s)")
        if len(set(members)) != len(members):
            raise ValidationError("card members must be distinct")

    @classmethod
    def criterion(cls, node: NodeId) -> "Card":
        return cls("criterion", (node,))

    @classmethod
    def pair(cls, a: NodeId, b: NodeId) -> "Card":
        return cls("pair", (a, b))

    @classmethod
    def shadow(cls, node: NodeId) -> "Card":
        return cls("shadow", (node,))


@dataclass(frozen=True)
class CardDeck:
    """Importance levels at one tree node, least important first.

    ``levels[i]`` holds the cards sharing level ``i`` (ex aequo);
    ``gaps[i] = (lo, up)`` bounds the number of blank cards between
    levels ``i`` and ``i+1``; ``z = (lo, up)`` bounds the ratio of the
    top level's weight to the bottom level's.  A deck whose gaps and
    ratio are all single points is ``deterministic``.
    """

    node: NodeId
    levels: tuple[tuple[Card, ...], ...]
    gaps: tuple[tuple[int, int], ...]
    z: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "node", _node(self.node))
        levels = tuple(
            tuple(lvl) if isinstance(lvl, (tuple, list)) else (lvl,)
            for lvl in self.levels
        )
        object.__setattr__(self, "levels", levels)
        object.__setattr__(
            self, "gaps", tuple((int(lo), int(up)) for lo, up in self.gaps)
        )
        object.__setattr__(self, "z", (float(self.z[0]), float(self.z[1])))
        if len(levels) < 2:
            raise ValidationError("a deck needs at least two levels")
        for lvl in levels:
            if not lvl:
                raise ValidationError("a deck level cannot be empty")
            for card in lvl:
                if not isinstance(card, Card):
                    raise ValidationError(f"not a card: {card!r}")
        if len(self.gaps) != len(levels) - 1:
            raise ValidationError(
                f"{len(levels)} levels need {len(levels) - 1} gap intervals, "
                f"got {len(self.gaps)}"
            )
        for lo, up in self.gaps:
            if not 0 <= lo <= up:
                raise ValidationError(f"bad blank-card interval ({lo}, {up})")
        z_lo, z_up = self.z
        if not 0 < z_lo <= z_up:
            raise ValidationError(f"bad ratio interval {self.z}")

    @property
    def deterministic(self) -> bool:
        return self.z[0] == self.z[1] and all(lo == up for lo, up in self.gaps)

    def cards(self) -> Iterable[tuple[int, Card]]:
        """All (level index, card) pairs, bottom level first."""
        for s, lvl in enumerate(self.levels):
            for card in lvl:
                yield s, card


# ---------------------------------------------------------------------------
# Constraint systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Variable:
    """One coordinate of the parameter polytope."""

    kind: str  # "weight" | "mutual" | "antagonistic" | "unit"
    key: tuple
    name: str


@dataclass(frozen=True)
class Row:
    """One linear condition ``sum(coeffs * x) rel rhs``.

    ``rel`` is the weak closure; ``strict`` marks rows that must hold
    with strict inequality (never set on equalities).
    """

    coeffs: Mapping[int, float]
    rel: str
    rhs: float
    strict: bool
    label: str

    def value(self, x: np.ndarray) -> float:
        return float(sum(c * x[i] for i, c in self.coeffs.items()))

    def margin(self, x: np.ndarray) -> float:
        """Slack of ``x`` on this row; nonnegative means weakly satisfied."""
        v = self.value(x)
        if self.rel == GE:
            return v - self.rhs
        if self.rel == LE:
            return self.rhs - v
        return -abs(v - self.rhs)


@dataclass
class ConstraintSystem:
    """A named-variable list plus linear rows over those variables."""

    variables: tuple[Variable, ...]
    rows: list[Row] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._index = {(v.kind, v.key): i for i, v in enumerate(self.variables)}
        if len(self._index) != len(self.variables):
            raise ValidationError("duplicate variables in constraint system")

    @property
    def n(self) -> int:
        return len(self.variables)

    def index(self, kind: str, key: tuple) -> int:
        return self._index[(kind, key)]

    def add_row(
        self, coeffs: Mapping[int, float], rel: str, rhs: float, label: str,
        strict: bool = False,
    ) -> None:
        if strict and rel == EQ:
            raise ValidationError("an equality row cannot be strict")
        self.rows.append(Row(dict(coeffs), rel, float(rhs), strict, label))

    def to_arrays(self) -> tuple[np.ndarray, list[str], np.ndarray, np.ndarray]:
        """Dense ``(A, relations, b, strict mask)`` view of the rows."""
        A = np.zeros((len(self.rows), self.n))
        b = np.zeros(len(self.rows))
        rels: list[str] = []
        strict = np.zeros(len(self.rows), dtype=bool)
        for i, row in enumerate(self.rows):
            for j, c in row.coeffs.items():
                A[i, j] = c
            b[i] = row.rhs
            rels.append(row.rel)
            strict[i] = row.strict
        return A, rels, b, strict

    def margins(self, x: np.ndarray) -> np.ndarray:
        return np.array([row.margin(x) for row in self.rows])


@dataclass(frozen=True)
class _ResolvedCard:
    level: int
    card: Card
    decl: InteractionDecl | None  # the interaction a pair/shadow card carries


def _resolve_deck(
    h: CriteriaHierarchy,
    deck: CardDeck,
    declarations: Sequence[InteractionDecl],
) -> list[_ResolvedCard]:
    """Check a deck's structure and attach declarations to its cards."""
    node = h.resolve(deck.node)
    if h.is_elementary(node):
        raise ValidationError(f"{h.name(node)!r} is elementary and cannot hold a deck")
    children = h.children(node)
    covered: dict[NodeId, int] = {}
    resolved: list[_ResolvedCard] = []

    for level, card in deck.cards():
        for m in card.members:
            if m not in children:
                raise ValidationError(
                    f"deck at {h.name(node)!r}: {h.name(m)!r} is not a child criterion"
                )
        if card.kind == "criterion":
            m = card.members[0]
            if m in covered:
                raise ValidationError(
                    f"deck at {h.name(node)!r}: {h.name(m)!r} appears twice"
                )
            covered[m] = level
            resolved.append(_ResolvedCard(level, card, None))

    missing = [h.name(c) for c in children if c not in covered]
    if missing:
        raise ValidationError(
            f"deck at {h.name(node)!r}: no card for {', '.join(missing)}"
        )

    for level, card in deck.cards():
        if card.kind == "criterion":
            continue
        scopes = [set(elementary_descendants(h, m)) for m in card.members]
        if card.kind == "pair":
            x_scope, y_scope = scopes
            matches = [
                d
                for d in declarations
                if d.mutual
                and (
                    (d.first in x_scope and d.second in y_scope)
                    or (d.first in y_scope and d.second in x_scope)
                )
            ]
        else:
            matches = [
                d for d in declarations if d.kind == "antagonistic" and d.first in scopes[0]
            ]
        names = " + ".join(h.name(m) for m in card.members)
        if len(matches) != 1:
            raise ValidationError(
                f"deck at {h.name(node)!r}: {card.kind} card [{names}] matches "
                f"{len(matches)} interaction declarations, expected exactly 1"
            )
        decl = matches[0]
        if card.kind == "shadow":
            base_level = covered[card.members[0]]
            if level >= base_level:
                raise ValidationError(
                    f"deck at {h.name(node)!r}: shadow card [{names}] must sit "
                    "strictly below its criterion"
                )
        elif decl.kind == "strengthening":
            if any(level <= covered[m] for m in card.members):
                raise ValidationError(
                    f"deck at {h.name(node)!r}: strengthening pair [{names}] must "
                    "sit strictly above both members"
                )
        resolved.append(_ResolvedCard(level, card, decl))
    return resolved


def build_constraints(
    hierarchy: CriteriaHierarchy,
    decks: Iterable[CardDeck],
    declarations: Sequence[InteractionDecl] = (),
) -> ConstraintSystem:
    """Translate card decks into the linear rows an admissible parameter
    vector must satisfy.

    Variables are the elementary weights, one coefficient per declared
    interaction, and one blank-card unit per deck.  Rows encode the
    level equalities and stretched gaps of every deck, the top-to-bottom
    ratio bounds, strict positivity of units, bottom levels and
    interaction signs, the 100-point total, and per-criterion
    nonnegative net flow.
    """
    h = hierarchy
    declarations = [
        d if isinstance(d, InteractionDecl) else InteractionDecl(*d) for d in declarations
    ]
    def decl_key(d: InteractionDecl) -> tuple:
        ends = (d.first, d.second)
        return ("mutual", frozenset(ends)) if d.mutual else ("antagonistic", ends)

    seen: set[tuple] = set()
    for d in declarations:
        d_first, d_second = h.resolve(d.first), h.resolve(d.second)
        if not (h.is_elementary(d_first) and h.is_elementary(d_second)):
            raise ValidationError("interactions must join elementary criteria")
        key = decl_key(d)
        if key in seen:
            raise ValidationError(
                f"duplicate interaction declaration on "
                f"{h.name(d_first)!r}, {h.name(d_second)!r}"
            )
        seen.add(key)

    deck_list = list(decks)
    by_node: dict[NodeId, CardDeck] = {}
    for deck in deck_list:
        node = h.resolve(deck.node)
        if node in by_node:
            raise ValidationError(f"two decks at {h.name(node)!r}")
        by_node[node] = deck
    undecked = [h.name(n) for n in h.non_elementary() if n not in by_node]
    if undecked:
        raise ValidationError(
            f"missing deck at {', '.join(undecked)}; every non-elementary "
            "node needs one or its weights stay unbounded"
        )
    deck_order = [n for n in h.nodes() if n in by_node]

    variables: list[Variable] = [
        Variable("weight", t, h.name(t)) for t in h.elementary()
    ]
    for d in declarations:
        if d.mutual:
            variables.append(
                Variable("mutual", (d.first, d.second), f"k({h.name(d.first)},{h.name(d.second)})")
            )
    for d in declarations:
        if not d.mutual:
            variables.append(
                Variable(
                    "antagonistic",
                    (d.first, d.second),
                    f"k({h.name(d.first)}|{h.name(d.second)})",
                )
            )
    for node in deck_order:
        variables.append(Variable("unit", node, f"unit@{h.name(node)}"))

    system = ConstraintSystem(tuple(variables))
    widx = {t: system.index("weight", t) for t in h.elementary()}

    def decl_index(d: InteractionDecl) -> int:
        kind = "mutual" if d.mutual else "antagonistic"
        return system.index(kind, (d.first, d.second))

    def card_expr(resolved: _ResolvedCard) -> dict[int, float]:
        coeffs: dict[int, float] = {}
        for m in resolved.card.members:
            for t in elementary_descendants(h, m):
                coeffs[widx[t]] = coeffs.get(widx[t], 0.0) + 1.0
        if resolved.decl is not None:
            coeffs[decl_index(resolved.decl)] = 1.0
        return coeffs

    def combine(a: Mapping[int, float], b: Mapping[int, float], sb: float) -> dict[int, float]:
        out = dict(a)
        for i, c in b.items():
            out[i] = out.get(i, 0.0) + sb * c
            if out[i] == 0.0:
                del out[i]
        return out

    used: dict[int, str] = {}
    for node in deck_order:
        deck = by_node[node]
        name = h.name(node)
        resolved = _resolve_deck(h, deck, declarations)
        for rc in resolved:
            if rc.decl is None:
                continue
            i = decl_index(rc.decl)
            if i in used:
                raise ValidationError(
                    f"interaction {system.variables[i].name} is carried by more "
                    f"than one card (decks {used[i]} and {name})"
                )
            used[i] = name

        level_exprs: dict[int, dict[int, float]] = {}
        for rc in sorted(resolved, key=lambda rc: (rc.level, rc.card.kind != "criterion")):
            expr = card_expr(rc)
            if rc.level not in level_exprs:
                level_exprs[rc.level] = expr
            else:
                system.add_row(
                    combine(expr, level_exprs[rc.level], -1.0), EQ, 0.0,
                    f"deck {name}: level {rc.level + 1} ex aequo",
                )

        uidx = system.index("unit", node)
        for s in range(len(deck.levels) - 1):
            lo, up = deck.gaps[s]
            step = combine(level_exprs[s + 1], level_exprs[s], -1.0)
            if lo == up:
                system.add_row(
                    combine(step, {uidx: 1.0}, -(lo + 1)), EQ, 0.0,
                    f"deck {name}: gap {s + 1} = {lo} blanks",
                )
            else:
                system.add_row(
                    combine(step, {uidx: 1.0}, -(lo + 1)), GE, 0.0,
                    f"deck {name}: gap {s + 1} >= {lo} blanks",
                )
                system.add_row(
                    combine(step, {uidx: 1.0}, -(up + 1)), LE, 0.0,
                    f"deck {name}: gap {s + 1} <= {up} blanks",
                )

        system.add_row({uidx: 1.0}, GE, 0.0, f"deck {name}: positive unit", strict=True)
        system.add_row(
            level_exprs[0], GE, 0.0, f"deck {name}: positive bottom level", strict=True
        )

        z_lo, z_up = deck.z
        top = level_exprs[len(deck.levels) - 1]
        bottom = level_exprs[0]
        if z_lo == z_up:
            system.add_row(
                combine(top, bottom, -z_lo), EQ, 0.0, f"deck {name}: ratio = {z_lo:g}"
            )
        else:
            system.add_row(
                combine(top, bottom, -z_lo), GE, 0.0, f"deck {name}: ratio >= {z_lo:g}"
            )
            system.add_row(
                combine(top, bottom, -z_up), LE, 0.0, f"deck {name}: ratio <= {z_up:g}"
            )

    for d in declarations:
        i = decl_index(d)
        var = system.variables[i]
        if d.kind == "strengthening":
            system.add_row({i: 1.0}, GE, 0.0, f"{var.name} > 0", strict=True)
        else:
            system.add_row({i: 1.0}, LE, 0.0, f"{var.name} < 0", strict=True)

    total = {widx[t]: 1.0 for t in h.elementary()}
    for d in declarations:
        if d.mutual:
            total[decl_index(d)] = 1.0
    system.add_row(total, EQ, 100.0, "weights and mutual coefficients total 100")

    for t in h.elementary():
        flow: dict[int, float] = {widx[t]: 1.0}
        for d in declarations:
            if d.kind == "weakening" and t in (d.first, d.second):
                flow[decl_index(d)] = 1.0
            elif d.kind == "antagonistic" and t == d.first:
                flow[decl_index(d)] = 1.0
        if len(flow) > 1:
            system.add_row(flow, GE, 0.0, f"net flow on {h.name(t)}")
    return system


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of maximizing the smallest strict-row slack.

    ``feasible`` iff the rows admit a point satisfying every strict row
    with positive slack; ``epsilon`` is the best such slack (capped at
    1) and ``witness`` attains it.
    """

    feasible: bool
    epsilon: float | None
    witness: np.ndarray | None


def feasibility_check(system: ConstraintSystem) -> FeasibilityResult:
    """Maximize a common slack on all strict rows of ``system``."""
    n = system.n
    c = np.zeros(n + 1)
    c[n] = 1.0
    p = LpProblem(c, "max")
    for row in system.rows:
        coeffs = dict(row.coeffs)
        if row.strict:
            coeffs[n] = -1.0 if row.rel == GE else 1.0
        p.add_constraint(coeffs, row.rel, row.rhs)
    p.set_bounds(n, lo=0.0, hi=1.0)
    r = solve_lp(p)
    if not r.optimal:
        return FeasibilityResult(False, None, None)
    eps = float(r.value)
    return FeasibilityResult(eps > EPS_TOL, eps, r.x[:n].copy())


def parameter_set(system: ConstraintSystem, x: np.ndarray, category: str) -> ParameterSet:
    """Read one polytope point back into likeness parameters."""
    weights: dict[NodeId, float] = {}
    mutual: dict[tuple[NodeId, NodeId], float] = {}
    antagonistic: dict[tuple[NodeId, NodeId], float] = {}
    for i, var in enumerate(system.variables):
        if var.kind == "weight":
            weights[var.key] = float(x[i])
        elif var.kind == "mutual":
            mutual[var.key] = float(x[i])
        elif var.kind == "antagonistic":
            antagonistic[var.key] = float(x[i])
    return ParameterSet(category, weights, mutual=mutual, antagonistic=antagonistic)


# ---------------------------------------------------------------------------
# The deterministic (single-point) procedure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeterministicWeights:
    """Exact weights of a deterministic deck, scaled to the given total."""

    unit: float  # raw per-blank increment, in card units
    scale: float  # card units -> weight points
    weights: dict[NodeId, float]
    pair_values: dict[tuple[NodeId, NodeId], float]
    shadow_values: dict[NodeId, float]
    mutual: dict[tuple[NodeId, NodeId], float]
    antagonistic: dict[tuple[NodeId, NodeId], float]
    net_flows: dict[NodeId, float]


def srf_deterministic(
    hierarchy: CriteriaHierarchy,
    deck: CardDeck,
    declarations: Sequence[InteractionDecl] = (),
    total: float = 100.0,
) -> DeterministicWeights:
    """Solve one point-valued deck exactly.

    The bottom level is worth one card unit and each position (a blank
    card or a level step) adds ``u`` units, with ``u`` pinned by the
    top-to-bottom ratio.  Scaling makes the criterion weights plus the
    mutual coefficients sum to ``total``; interaction coefficients then
    fall out of the pair and shadow cards by subtraction.
    """
    if not deck.deterministic:
        raise ValidationError("the deck still has interval answers")
    h = hierarchy
    declarations = [
        d if isinstance(d, InteractionDecl) else InteractionDecl(*d) for d in declarations
    ]
    resolved = _resolve_deck(h, deck, declarations)

    units_below = np.concatenate(
        [[0], np.cumsum([lo + 1 for lo, _ in deck.gaps])]
    )
    span = float(units_below[-1])
    z = deck.z[0]
    if z <= 1.0:
        raise ValidationError(
            f"ratio {z:g} must exceed 1: the top level outweighs the bottom one"
        )
    u = (z - 1.0) / span
    raw = {s: 1.0 + units_below[s] * u for s in range(len(deck.levels))}

    crit_raw: dict[NodeId, float] = {}
    pair_raw: dict[tuple[NodeId, NodeId], float] = {}
    shadow_raw: dict[NodeId, float] = {}
    decl_of: dict[tuple, InteractionDecl] = {}
    for rc in resolved:
        value = raw[rc.level]
        if rc.card.kind == "criterion":
            crit_raw[rc.card.members[0]] = value
        elif rc.card.kind == "pair":
            key = rc.card.members
            pair_raw[key] = value
            decl_of[key] = rc.decl
        else:
            key = rc.card.members[0]
            shadow_raw[key] = value
            decl_of[key] = rc.decl

    base = sum(crit_raw.values())
    for (x_m, y_m), v in pair_raw.items():
        base += v - crit_raw[x_m] - crit_raw[y_m]
    if base <= 0:
        raise ValidationError("mutual weakening exhausts the deck's total weight")
    scale = total / base

    weights = {m: v * scale for m, v in crit_raw.items()}
    pair_values = {k: v * scale for k, v in pair_raw.items()}
    shadow_values = {k: v * scale for k, v in shadow_raw.items()}
    mutual: dict[tuple[NodeId, NodeId], float] = {}
    antagonistic: dict[tuple[NodeId, NodeId], float] = {}
    for (x_m, y_m), v in pair_values.items():
        d = decl_of[(x_m, y_m)]
        mutual[(d.first, d.second)] = v - weights[x_m] - weights[y_m]
    for m, v in shadow_values.items():
        d = decl_of[m]
        antagonistic[(d.first, d.second)] = v - weights[m]

    flows: dict[NodeId, float] = dict(weights)
    for (x_m, y_m), d in ((k, decl_of[k]) for k in pair_raw):
        k_int = mutual[(d.first, d.second)]
        if k_int < 0:
            flows[x_m] += k_int
            flows[y_m] += k_int
    for m in shadow_raw:
        d = decl_of[m]
        flows[m] += antagonistic[(d.first, d.second)]
    for m, flow in flows.items():
        if flow < -EPS_TOL:
            raise ValidationError(
                f"net flow on {h.name(m)!r} is {flow:.4f}; the deck discounts "
                "the criterion below zero"
            )

    return DeterministicWeights(
        unit=u,
        scale=scale,
        weights=weights,
        pair_values=pair_values,
        shadow_values=shadow_values,
        mutual=mutual,
        antagonistic=antagonistic,
        net_flows=flows,
    )

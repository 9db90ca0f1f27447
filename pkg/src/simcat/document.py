"""JSON problem documents and their assembly into model objects.

A document carries everything one classification problem needs: the
criteria tree with named scales and similarity profiles, performances
of the actions and of the reference actions per category, likeness
thresholds, interaction declarations, the card decks of the weight
elicitation, sampling settings, and classification requirements.
"""

from __future__ import annotations

import json
from typing import Literal, Mapping, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field

from .hierarchy import (
    CriteriaHierarchy,
    Problem,
    Scale,
    SimDisFunction,
    ValidationError,
    build_problem,
)
from .robust import Requirements
from .srf import Card, CardDeck, ConstraintSystem, InteractionDecl, build_constraints

#: an elementary performance level: numeric, or a label on an ordinal scale
Value = Union[int, float, str]
Quad = tuple[float, float, float, float]


class DocumentError(ValueError):
    """The document cannot be read: bad JSON or a schema violation."""


class ScaleDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["interval", "ratio", "ordinal"]
    min: float | None = None
    max: float | None = None
    levels: list[Value] | None = None

    @pydantic.model_validator(mode="after")
    def _shape(self) -> "ScaleDoc":
        if self.kind == "ordinal":
            if self.levels is None or self.min is not None or self.max is not None:
                raise ValueError("an ordinal scale carries levels and no min/max")
        else:
            if self.levels is not None or self.min is None or self.max is None:
                raise ValueError("a numeric scale carries min/max and no levels")
        return self

    def build(self) -> Scale:
        if self.kind == "ordinal":
            return Scale("ordinal", levels=tuple(self.levels))
        return Scale(self.kind, self.min, self.max)


class SimDisDoc(BaseModel):
    """Threshold quadruples; omitting ``positive`` means a symmetric profile."""

    model_config = ConfigDict(extra="forbid")

    negative: Quad
    positive: Quad | None = None

    def build(self) -> SimDisFunction:
        return SimDisFunction(
            negative=self.negative,
            positive=self.positive if self.positive is not None else self.negative,
        )


class CriterionDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    children: list["CriterionDoc"] = Field(default_factory=list)
    scale: str | None = None
    simdis: str | None = None


class CategoryDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    reference_actions: dict[str, dict[str, Value]]
    #: one level for every node, or an explicit per-node map
    likeness_thresholds: Union[float, dict[str, float]]


class InteractionDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["strengthening", "weakening", "antagonistic"]
    first: str
    second: str


class DeckDoc(BaseModel):
    """One ranked card deck: levels listed least- to most-important.

    A level entry is a criterion name, ``"pair:X+Y"`` for the joint card
    of two interacting criteria, or ``"shadow:X"`` for a criterion
    discounted by the antagonism it suffers.
    """

    model_config = ConfigDict(extra="forbid")

    levels: list[list[str]]
    gaps: list[tuple[int, int]]
    z: Union[float, tuple[float, float]]


class SmaaDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples: int = Field(default=10_000, ge=1)
    seed: int = 0
    burn_in: int = Field(default=1_000, ge=0)
    thinning: int = Field(default=5, ge=1)


class RequirementsDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    exactly_one: bool = True
    min_per_category: dict[str, int] = Field(default_factory=dict)
    max_per_category: dict[str, int] = Field(default_factory=dict)
    max_dummy: int | None = None

    def build(self) -> Requirements:
        return Requirements(
            exactly_one=self.exactly_one,
            min_per_category=dict(self.min_per_category),
            max_per_category=dict(self.max_per_category),
            max_dummy=self.max_dummy,
        )


class ProblemDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hierarchy: CriterionDoc
    scales: dict[str, ScaleDoc]
    simdis_functions: dict[str, SimDisDoc]
    actions: dict[str, dict[str, Value]]
    categories: dict[str, CategoryDoc]
    dummy_category: str
    interactions: list[InteractionDoc] = Field(default_factory=list)
    #: per category, per non-elementary node: one card deck
    srf: dict[str, dict[str, DeckDoc]] = Field(default_factory=dict)
    smaa: SmaaDoc = Field(default_factory=SmaaDoc)
    requirements: RequirementsDoc = Field(default_factory=RequirementsDoc)


def parse_document(source: "str | bytes | Mapping") -> ProblemDocument:
    """Read a document from JSON text or an already-decoded mapping."""
    if isinstance(source, (str, bytes)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as e:
            raise DocumentError(f"not valid JSON: {e}") from e
    else:
        data = source
    try:
        return ProblemDocument.model_validate(data)
    except pydantic.ValidationError as e:
        raise DocumentError(str(e)) from e


def serialize_document(doc: ProblemDocument) -> str:
    return json.dumps(doc.model_dump(mode="json"), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Assembly into model objects
# ---------------------------------------------------------------------------


def document_hierarchy(doc: ProblemDocument) -> CriteriaHierarchy:
    scales = {name: s.build() for name, s in doc.scales.items()}
    functions = {name: f.build() for name, f in doc.simdis_functions.items()}

    def nested(node: CriterionDoc) -> dict:
        if node.children:
            return {
                "name": node.name,
                "children": [nested(c) for c in node.children],
            }
        for label, ref, pool in (
            ("scale", node.scale, scales),
            ("similarity profile", node.simdis, functions),
        ):
            if ref is None:
                raise ValidationError(
                    f"leaf criterion {node.name!r} names no {label}"
                )
            if ref not in pool:
                raise ValidationError(
                    f"leaf criterion {node.name!r} references "
                    f"unknown {label} {ref!r}"
                )
        return {
            "name": node.name,
            "scale": scales[node.scale],
            "simdis": functions[node.simdis],
        }

    return CriteriaHierarchy.from_nested(nested(doc.hierarchy))


def document_problem(
    doc: ProblemDocument, hierarchy: CriteriaHierarchy | None = None
) -> Problem:
    h = hierarchy if hierarchy is not None else document_hierarchy(doc)
    thresholds: dict = {}
    for cat, spec in doc.categories.items():
        lam = spec.likeness_thresholds
        if isinstance(lam, dict):
            for node_name, value in lam.items():
                thresholds[(node_name, cat)] = value
        else:
            thresholds[cat] = lam
    return build_problem(
        h,
        actions=doc.actions,
        categories=tuple(doc.categories),
        reference_sets={
            cat: spec.reference_actions for cat, spec in doc.categories.items()
        },
        dummy_category=doc.dummy_category,
        thresholds=thresholds,
    )


def document_declarations(
    doc: ProblemDocument, h: CriteriaHierarchy
) -> tuple[InteractionDecl, ...]:
    return tuple(
        InteractionDecl(d.kind, h.resolve(d.first), h.resolve(d.second))
        for d in doc.interactions
    )


def _card_from_spec(h: CriteriaHierarchy, spec: str) -> Card:
    if spec.startswith("pair:"):
        members = spec[len("pair:"):].split("+")
        if len(members) != 2:
            raise ValidationError(f"pair card {spec!r} needs exactly two members")
        return Card.pair(h.resolve(members[0]), h.resolve(members[1]))
    if spec.startswith("shadow:"):
        return Card.shadow(h.resolve(spec[len("shadow:"):]))
    return Card.criterion(h.resolve(spec))


def document_decks(
    doc: ProblemDocument, h: CriteriaHierarchy, category: str
) -> tuple[CardDeck, ...]:
    if category not in doc.srf:
        raise ValidationError(f"no card decks for category {category!r}")
    decks = []
    for node_name, deck in doc.srf[category].items():
        z = deck.z if isinstance(deck.z, tuple) else (deck.z, deck.z)
        decks.append(
            CardDeck(
                node=h.resolve(node_name),
                levels=tuple(
                    tuple(_card_from_spec(h, c) for c in level)
                    for level in deck.levels
                ),
                gaps=tuple(tuple(g) for g in deck.gaps),
                z=z,
            )
        )
    return tuple(decks)


def document_systems(
    doc: ProblemDocument, h: CriteriaHierarchy | None = None
) -> dict[str, ConstraintSystem]:
    """One weight-constraint system per real category."""
    if h is None:
        h = document_hierarchy(doc)
    decls = document_declarations(doc, h)
    return {
        cat: build_constraints(h, document_decks(doc, h, cat), decls)
        for cat in doc.categories
    }

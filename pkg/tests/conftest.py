"""Shared fixture data: the soldier-selection example used across the suite."""

import pytest

from simcat.hierarchy import CriteriaHierarchy, Scale, SimDisFunction, build_problem
from simcat.likeness import ParameterSet

# --- criteria ---------------------------------------------------------------

F1 = SimDisFunction.symmetric(50, 100, 150, 200)
F2 = SimDisFunction(negative=(5, 10, 20, 25), positive=(5, 10, 15, 20))
F3 = SimDisFunction.symmetric(0, 0, 1, 2)

PERCENT = Scale("interval", 0, 100)
POINTS = Scale("ratio", 600, 1000)
GRADE = Scale("ordinal", levels=(1, 2, 3, 4, 5, 6))

#: elementary criteria in hierarchy order (three per macro-criterion)
CRITERIA = ("WK", "PC", "ArMk", "PS", "PR", "PT", "PF", "M", "TS")

CATEGORIES = ("C1", "C2", "C3", "C4")
DUMMY = "C5"


def make_hierarchy() -> CriteriaHierarchy:
    def leaf(name, scale, fn):
        return {"name": name, "scale": scale, "simdis": fn}

    return CriteriaHierarchy.from_nested(
        {
            "name": "overall",
            "children": [
                {
                    "name": "MS",
                    "children": [
                        leaf("WK", PERCENT, F2),
                        leaf("PC", PERCENT, F2),
                        leaf("ArMk", PERCENT, F2),
                    ],
                },
                {
                    "name": "MR",
                    "children": [
                        leaf("PS", GRADE, F3),
                        leaf("PR", GRADE, F3),
                        leaf("PT", GRADE, F3),
                    ],
                },
                {
                    "name": "PoF",
                    "children": [
                        leaf("PF", POINTS, F1),
                        leaf("M", GRADE, F3),
                        leaf("TS", GRADE, F3),
                    ],
                },
            ],
        }
    )


# --- performance data -------------------------------------------------------

ACTIONS = {
    "a1": (75, 75, 90, 3, 4, 4, 740, 6, 4),
    "a2": (67, 80, 73, 3, 3, 3, 760, 5, 6),
    "a3": (60, 70, 70, 4, 3, 3, 770, 5, 6),
    "a4": (80, 90, 75, 2, 3, 3, 880, 4, 5),
    "a5": (65, 65, 70, 3, 2, 3, 870, 6, 6),
    "a6": (70, 75, 85, 4, 3, 4, 750, 5, 4),
    "a7": (75, 70, 70, 4, 3, 3, 710, 5, 6),
}

REFERENCES = {
    "C1": {"b11": (80, 75, 85, 4, 4, 4, 700, 6, 4)},
    "C2": {"b21": (70, 70, 75, 3, 3, 3, 800, 6, 6)},
    "C3": {"b31": (80, 90, 85, 2, 2, 3, 950, 4, 4)},
    "C4": {"b41": (60, 65, 65, 3, 3, 3, 700, 5, 6)},
}

LAMBDA = {"C1": 0.65, "C2": 0.60, "C3": 0.65, "C4": 0.60}

# --- one compatible weighting per category ----------------------------------
# Elementary weights as published for the example; the two mutual
# coefficients are pinned by back-solving the PoF similarity cells of a3
# and the 100-point normalization identity (see tests/test_likeness.py),
# the antagonistic coefficient is only sign-constrained by those cells and
# is fixed mid-range of what the card decks allow.

WEIGHTS = {
    "C1": (8.925, 16.269, 26.777, 7.537, 11.537, 14.347, 5.312, 2.361, 8.133),
    "C2": (4.809, 12.621, 16.140, 13.301, 16.621, 22.599, 2.615, 4.508, 7.274),
    "C3": (5.033, 2.304, 5.033, 12.239, 7.082, 12.239, 23.561, 23.561, 9.320),
    "C4": (5.557, 5.557, 22.231, 15.011, 18.649, 22.708, 1.838, 4.083, 4.083),
}

#: (ArMk-PR strengthening, PF-TS weakening) per category
MUTUAL = {
    "C1": (0.5, -1.698),
    "C2": (0.3306867469879518, -0.8186867469879518),
    "C3": (2.7, -3.072),
    "C4": (0.3977747747747748, -0.1147747747747748),
}

#: PS|PF antagonistic coefficient per category
ANTAGONISTIC = {"C1": -2.0, "C2": -6.0, "C3": -8.0, "C4": -5.0}


# --- card decks ---------------------------------------------------------------
# per category and node: (levels least to most important, blank-card
# intervals between consecutive levels, top-to-bottom ratio interval);
# "pair:X+Y" is the joint card of two interacting criteria and
# "shadow:X" is X discounted by the antagonism it suffers

DECKS = {
    "C1": {
        "overall": ([["PoF"], ["MR"], ["MS"], ["pair:MS+MR"]],
                    [(1, 1), (1, 2), (2, 3)], (4, 6)),
        "MS": ([["WK"], ["PC"], ["ArMk"]], [(0, 1), (0, 2)], (3, 3)),
        "MR": ([["shadow:PS"], ["PS"], ["PR"], ["PT"]],
               [(0, 1), (1, 2), (1, 1)], (2, 3)),
        "PoF": ([["M"], ["PF"], ["TS"], ["pair:PF+TS"]],
                [(1, 2), (1, 2), (1, 2)], (4, 6)),
    },
    "C2": {
        "overall": ([["PoF"], ["MS"], ["MR"], ["pair:MS+MR"]],
                    [(1, 2), (1, 1), (2, 3)], (6, 6)),
        "MS": ([["WK"], ["PC"], ["ArMk"]], [(1, 2), (0, 0)], (3, 5)),
        "MR": ([["shadow:PS"], ["PS"], ["PR"], ["PT"]],
               [(0, 1), (0, 0), (0, 1)], (3, 4)),
        "PoF": ([["PF"], ["M"], ["TS"], ["pair:PF+TS"]],
                [(1, 2), (2, 3), (1, 1)], (3, 6)),
    },
    "C3": {
        "overall": ([["MS"], ["MR"], ["pair:MS+MR"], ["PoF"]],
                    [(2, 3), (2, 3), (1, 1)], (4, 6)),
        "MS": ([["PC"], ["WK", "ArMk"]], [(1, 1)], (2, 4)),
        "MR": ([["shadow:PS"], ["PR"], ["PS", "PT"]],
               [(0, 1), (1, 1)], (2, 4)),
        "PoF": ([["TS"], ["PF", "M"], ["pair:PF+TS"]],
                [(1, 2), (0, 1)], (3, 4)),
    },
    "C4": {
        "overall": ([["PoF"], ["MS"], ["MR"], ["pair:MS+MR"]],
                    [(1, 2), (1, 1), (1, 2)], (9, 9)),
        "MS": ([["PC", "WK"], ["ArMk"]], [(1, 2)], (4, 4)),
        "MR": ([["shadow:PS"], ["PS"], ["PR"], ["PT"]],
               [(0, 1), (0, 0), (0, 1)], (2, 4)),
        "PoF": ([["PF"], ["M", "TS"], ["pair:PF+TS"]],
                [(1, 2), (1, 3)], (3, 5)),
    },
}

#: interaction structure shared by all four categories
INTERACTIONS = (
    ("strengthening", "ArMk", "PR"),
    ("weakening", "PF", "TS"),
    ("antagonistic", "PS", "PF"),
)


def _parse_card(h: CriteriaHierarchy, spec: str):
    from simcat.srf import Card

    if spec.startswith("pair:"):
        a, b = spec[5:].split("+")
        return Card.pair(h.resolve(a), h.resolve(b))
    if spec.startswith("shadow:"):
        return Card.shadow(h.resolve(spec[7:]))
    return Card.criterion(h.resolve(spec))


def make_declarations(h: CriteriaHierarchy):
    from simcat.srf import InteractionDecl

    return tuple(
        InteractionDecl(kind, h.resolve(a), h.resolve(b))
        for kind, a, b in INTERACTIONS
    )


def make_decks(h: CriteriaHierarchy, category: str):
    from simcat.srf import CardDeck

    decks = []
    for node, (levels, gaps, z) in DECKS[category].items():
        decks.append(
            CardDeck(
                node=h.resolve(node),
                levels=tuple(tuple(_parse_card(h, c) for c in lvl) for lvl in levels),
                gaps=tuple(gaps),
                z=z,
            )
        )
    return decks


def make_vector(h: CriteriaHierarchy, values):
    return {h.resolve(name): v for name, v in zip(CRITERIA, values)}


def make_params(h: CriteriaHierarchy, category: str) -> ParameterSet:
    ap, pfts = MUTUAL[category]
    return ParameterSet(
        category=category,
        weights={h.resolve(n): w for n, w in zip(CRITERIA, WEIGHTS[category])},
        mutual={
            (h.resolve("ArMk"), h.resolve("PR")): ap,
            (h.resolve("PF"), h.resolve("TS")): pfts,
        },
        antagonistic={(h.resolve("PS"), h.resolve("PF")): ANTAGONISTIC[category]},
    )


def make_problem(h: CriteriaHierarchy | None = None):
    h = h or make_hierarchy()
    return build_problem(
        hierarchy=h,
        actions={name: make_vector(h, row) for name, row in ACTIONS.items()},
        categories=CATEGORIES,
        reference_sets={
            cat: {ref: make_vector(h, row) for ref, row in refs.items()}
            for cat, refs in REFERENCES.items()
        },
        dummy_category=DUMMY,
        thresholds=dict(LAMBDA),
    )


@pytest.fixture(scope="session")
def soldier_hierarchy():
    return make_hierarchy()


@pytest.fixture(scope="session")
def soldier_problem(soldier_hierarchy):
    return make_problem(soldier_hierarchy)


@pytest.fixture(scope="session")
def soldier_params(soldier_hierarchy):
    return {cat: make_params(soldier_hierarchy, cat) for cat in CATEGORIES}


@pytest.fixture(scope="session")
def soldier_systems(soldier_hierarchy):
    """Per-category constraint systems built from the card decks."""
    from simcat.srf import build_constraints

    h = soldier_hierarchy
    decls = make_declarations(h)
    return {
        cat: build_constraints(h, make_decks(h, cat), decls) for cat in CATEGORIES
    }

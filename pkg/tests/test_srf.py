"""Card decks, their constraint systems, and the point procedure."""

import time

import numpy as np
import pytest

from simcat.hierarchy import CriteriaHierarchy, Scale, SimDisFunction, ValidationError
from simcat.srf import (
    Card,
    CardDeck,
    ConstraintSystem,
    InteractionDecl,
    Variable,
    build_constraints,
    feasibility_check,
    parameter_set,
    srf_deterministic,
)
from simcat.lp import GE, LE

from conftest import CATEGORIES, make_declarations, make_decks, make_hierarchy


def flat_hierarchy(names):
    scale = Scale("interval", 0, 1000)
    fn = SimDisFunction.symmetric(50, 100, 150, 200)
    return CriteriaHierarchy.from_nested(
        {
            "name": "root",
            "children": [{"name": n, "scale": scale, "simdis": fn} for n in names],
        }
    )


# --- deck validation -----------------------------------------------------------


def test_deck_needs_two_levels():
    h = flat_hierarchy(["a", "b"])
    with pytest.raises(ValidationError, match="two levels"):
        CardDeck(h.resolve("root"), ((Card.criterion(h.resolve("a")),),), (), (2, 2))


def test_deck_gap_count_must_match():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    with pytest.raises(ValidationError, match="gap"):
        CardDeck(h.resolve("root"), ((ca,), (cb,)), ((0, 0), (0, 0)), (2, 2))


def test_deck_rejects_bad_intervals():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    with pytest.raises(ValidationError, match="blank-card"):
        CardDeck(h.resolve("root"), ((ca,), (cb,)), ((2, 1),), (2, 2))
    with pytest.raises(ValidationError, match="ratio"):
        CardDeck(h.resolve("root"), ((ca,), (cb,)), ((0, 0),), (3, 2))


def test_card_member_counts():
    with pytest.raises(ValidationError):
        Card("pair", ((0,),))
    with pytest.raises(ValidationError):
        Card("criterion", ((0,), (1,)))
    with pytest.raises(ValidationError, match="node id"):
        Card.criterion("WK")  # names must be resolved to ids first


def test_deterministic_flag():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    assert CardDeck(h.resolve("root"), ((ca,), (cb,)), ((1, 1),), (3, 3)).deterministic
    assert not CardDeck(h.resolve("root"), ((ca,), (cb,)), ((1, 2),), (3, 3)).deterministic
    assert not CardDeck(h.resolve("root"), ((ca,), (cb,)), ((1, 1),), (3, 4)).deterministic


# --- structural resolution -------------------------------------------------------


def test_missing_criterion_card_rejected():
    h = flat_hierarchy(["a", "b", "c"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    deck = CardDeck(h.resolve("root"), ((ca,), (cb,)), ((0, 0),), (2, 2))
    with pytest.raises(ValidationError, match="no card for c"):
        build_constraints(h, [deck])


def test_duplicate_criterion_card_rejected():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    deck = CardDeck(h.resolve("root"), ((ca,), (cb, ca)), ((0, 0),), (2, 2))
    with pytest.raises(ValidationError, match="twice"):
        build_constraints(h, [deck])


def test_pair_card_needs_exactly_one_declaration():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    pair = Card.pair(h.resolve("a"), h.resolve("b"))
    deck = CardDeck(h.resolve("root"), ((ca,), (cb,), (pair,)), ((0, 0), (0, 0)), (3, 3))
    with pytest.raises(ValidationError, match="matches 0"):
        build_constraints(h, [deck], ())


def test_shadow_must_sit_below_its_criterion():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    shadow = Card.shadow(h.resolve("a"))
    decls = (InteractionDecl("antagonistic", h.resolve("a"), h.resolve("b")),)
    deck = CardDeck(h.resolve("root"), ((ca,), (cb,), (shadow,)), ((0, 0), (0, 0)), (3, 3))
    with pytest.raises(ValidationError, match="below"):
        build_constraints(h, [deck], decls)


def test_strengthening_pair_must_top_both_members():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    pair = Card.pair(h.resolve("a"), h.resolve("b"))
    decls = (InteractionDecl("strengthening", h.resolve("a"), h.resolve("b")),)
    deck = CardDeck(h.resolve("root"), ((ca,), (pair,), (cb,)), ((0, 0), (0, 0)), (3, 3))
    with pytest.raises(ValidationError, match="above"):
        build_constraints(h, [deck], decls)


def test_duplicate_mutual_declaration_rejected():
    h = flat_hierarchy(["a", "b"])
    a, b = h.resolve("a"), h.resolve("b")
    ca, cb = Card.criterion(a), Card.criterion(b)
    pair = Card.pair(a, b)
    deck = CardDeck(h.resolve("root"), ((ca,), (cb,), (pair,)), ((0, 0), (0, 0)), (3, 3))
    decls = (
        InteractionDecl("strengthening", a, b),
        InteractionDecl("weakening", b, a),
    )
    with pytest.raises(ValidationError, match="duplicate"):
        build_constraints(h, [deck], decls)


def test_mutual_and_antagonistic_may_share_a_pair():
    # one pair of criteria can strengthen each other and still have an
    # asymmetric opposition; both coefficients stay distinct
    h, g, decls, deck = point_example()
    system = build_constraints(h, [deck], decls)
    assert sum(v.kind == "mutual" for v in system.variables) == 2
    assert sum(v.kind == "antagonistic" for v in system.variables) == 1


def test_every_non_elementary_node_needs_a_deck():
    h = make_hierarchy()
    decks = [d for d in make_decks(h, "C1") if d.node != h.resolve("MS")]
    with pytest.raises(ValidationError, match="missing deck at MS"):
        build_constraints(h, decks, make_declarations(h))


def test_variable_layout():
    h = make_hierarchy()
    system = build_constraints(h, make_decks(h, "C1"), make_declarations(h))
    kinds = [v.kind for v in system.variables]
    assert kinds == ["weight"] * 9 + ["mutual"] * 2 + ["antagonistic"] + ["unit"] * 4
    names = [v.name for v in system.variables]
    assert names[:3] == ["WK", "PC", "ArMk"]
    assert "k(ArMk,PR)" in names and "k(PS|PF)" in names
    assert names[-4] == "unit@overall"


# --- feasibility -----------------------------------------------------------------


def test_trivial_strict_system_has_full_slack():
    system = ConstraintSystem((Variable("weight", (1,), "x"),))
    system.add_row({0: 1.0}, GE, 0.0, "x > 0", strict=True)
    system.add_row({0: 1.0}, LE, 1.0, "x <= 1")
    r = feasibility_check(system)
    assert r.feasible
    assert r.epsilon == pytest.approx(1.0, abs=1e-9)
    assert r.witness[0] == pytest.approx(1.0, abs=1e-8)


def test_contradictory_deck_is_infeasible():
    # four blanks force a positive distance that the unit ratio forbids
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    deck = CardDeck(h.resolve("root"), ((ca,), (cb,)), ((4, 4),), (1, 1))
    r = feasibility_check(build_constraints(h, [deck]))
    assert not r.feasible
    assert r.epsilon == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("cat", CATEGORIES)
def test_soldier_decks_are_feasible(soldier_systems, cat):
    t0 = time.perf_counter()
    r = feasibility_check(soldier_systems[cat])
    assert time.perf_counter() - t0 < 1.0
    assert r.feasible and r.epsilon > 1e-6
    margins = soldier_systems[cat].margins(r.witness)
    strict = np.array([row.strict for row in soldier_systems[cat].rows])
    assert np.all(margins >= -1e-8)
    assert np.all(margins[strict] >= r.epsilon - 1e-9)


@pytest.mark.parametrize("cat", CATEGORIES)
def test_witness_reads_back_into_valid_parameters(soldier_systems, soldier_problem, cat):
    system = soldier_systems[cat]
    r = feasibility_check(system)
    p = parameter_set(system, r.witness, cat)
    p.check_normalized(100.0, tol=1e-6)
    assert all(f >= -1e-9 for f in p.net_flows().values())
    assert len(p.weights) == 9 and len(p.mutual) == 2 and len(p.antagonistic) == 1
    h = soldier_problem.hierarchy
    from simcat.likeness import partial_likeness

    a3 = soldier_problem.performance("a3")
    b = next(iter(soldier_problem.reference_sets[cat].values()))
    assert 0.0 <= partial_likeness(h, a3, b, "overall", p) <= 1.0


def test_published_weights_fit_inside_each_polytope(soldier_systems):
    # box the nine elementary weights near their published values and let
    # the interaction coefficients and units float
    from conftest import CRITERIA, WEIGHTS

    h = make_hierarchy()
    for cat, system in soldier_systems.items():
        boxed = ConstraintSystem(system.variables, list(system.rows))
        for name, w in zip(CRITERIA, WEIGHTS[cat]):
            i = system.index("weight", h.resolve(name))
            boxed.add_row({i: 1.0}, GE, w - 0.002, f"{name} >= published")
            boxed.add_row({i: 1.0}, LE, w + 0.002, f"{name} <= published")
        r = feasibility_check(boxed)
        assert r.feasible, cat


def test_relabeling_criteria_preserves_slack(soldier_systems):
    import conftest as cf

    renamed = {}
    spec = {
        "name": "overall*",
        "children": [
            {
                "name": "MS*",
                "children": [
                    {"name": "WK*", "scale": cf.PERCENT, "simdis": cf.F2},
                    {"name": "PC*", "scale": cf.PERCENT, "simdis": cf.F2},
                    {"name": "ArMk*", "scale": cf.PERCENT, "simdis": cf.F2},
                ],
            },
            {
                "name": "MR*",
                "children": [
                    {"name": "PS*", "scale": cf.GRADE, "simdis": cf.F3},
                    {"name": "PR*", "scale": cf.GRADE, "simdis": cf.F3},
                    {"name": "PT*", "scale": cf.GRADE, "simdis": cf.F3},
                ],
            },
            {
                "name": "PoF*",
                "children": [
                    {"name": "PF*", "scale": cf.POINTS, "simdis": cf.F1},
                    {"name": "M*", "scale": cf.GRADE, "simdis": cf.F3},
                    {"name": "TS*", "scale": cf.GRADE, "simdis": cf.F3},
                ],
            },
        ],
    }
    h2 = CriteriaHierarchy.from_nested(spec)
    # node ids coincide because the shapes do, so the decks carry over
    decls = tuple(
        InteractionDecl(kind, h2.resolve(a + "*"), h2.resolve(b + "*"))
        for kind, a, b in cf.INTERACTIONS
    )
    decks = make_decks(make_hierarchy(), "C1")
    renamed_system = build_constraints(h2, decks, decls)
    r1 = feasibility_check(soldier_systems["C1"])
    r2 = feasibility_check(renamed_system)
    assert r2.epsilon == pytest.approx(r1.epsilon, abs=1e-9)


def test_widening_answers_never_shrinks_slack(soldier_systems):
    h = make_hierarchy()
    decls = make_declarations(h)
    for cat in CATEGORIES:
        wide = [
            CardDeck(
                d.node,
                d.levels,
                tuple((lo, up + 1) for lo, up in d.gaps),
                (d.z[0], d.z[1] + 1),
            )
            for d in make_decks(h, cat)
        ]
        base = feasibility_check(soldier_systems[cat]).epsilon
        widened = feasibility_check(build_constraints(h, wide, decls)).epsilon
        assert widened >= base - 1e-9


def test_to_arrays_round_trip(soldier_systems):
    system = soldier_systems["C1"]
    A, rels, b, strict = system.to_arrays()
    assert A.shape == (len(system.rows), system.n)
    assert len(rels) == len(system.rows) and b.shape == (len(system.rows),)
    r = feasibility_check(system)
    vals = A @ r.witness
    for i, row in enumerate(system.rows):
        assert vals[i] == pytest.approx(row.value(r.witness), abs=1e-9)
        assert strict[i] == row.strict


# --- the deterministic point procedure -------------------------------------------


def point_example():
    """A four-criterion deck with every card type, solved by hand."""
    h = flat_hierarchy(["g1", "g2", "g3", "g4"])
    g = {n: h.resolve(n) for n in ("g1", "g2", "g3", "g4")}
    decls = (
        InteractionDecl("strengthening", g["g3"], g["g4"]),
        InteractionDecl("weakening", g["g2"], g["g4"]),
        InteractionDecl("antagonistic", g["g4"], g["g3"]),
    )
    deck = CardDeck(
        node=h.resolve("root"),
        levels=(
            (Card.criterion(g["g3"]),),
            (Card.criterion(g["g1"]),),
            (Card.shadow(g["g4"]),),
            (Card.criterion(g["g4"]),),
            (Card.criterion(g["g2"]),),
            (Card.pair(g["g3"], g["g4"]),),
            (Card.pair(g["g2"], g["g4"]),),
        ),
        gaps=((1, 1), (2, 2), (0, 0), (2, 2), (0, 0), (2, 2)),
        z=(20, 20),
    )
    return h, g, decls, deck


def test_point_procedure_exact_values():
    h, g, decls, deck = point_example()
    out = srf_deterministic(h, deck, decls)
    A = lambda x: pytest.approx(x, abs=1e-6)  # noqa: E731

    assert out.unit == A(19 / 13)
    assert out.scale == A(1300 / 387)
    assert out.weights[g["g3"]] == A(3.359173)
    assert out.weights[g["g1"]] == A(13.178295)
    assert out.weights[g["g4"]] == A(32.816537)
    assert out.weights[g["g2"]] == A(47.545220)
    assert out.shadow_values[g["g4"]] == A(27.906977)
    assert out.pair_values[(g["g3"], g["g4"])] == A(52.454780)
    assert out.pair_values[(g["g2"], g["g4"])] == A(67.183463)
    assert out.mutual[(g["g3"], g["g4"])] == A(16.279070)
    assert out.mutual[(g["g2"], g["g4"])] == A(-13.178295)
    assert out.antagonistic[(g["g4"], g["g3"])] == A(-4.909561)
    assert out.net_flows[g["g2"]] == A(34.366925)
    assert out.net_flows[g["g4"]] == A(14.728682)

    total = sum(out.weights.values()) + sum(out.mutual.values())
    assert total == pytest.approx(100.0, abs=1e-9)


def test_point_procedure_satisfies_its_own_deck():
    h, g, decls, deck = point_example()
    out = srf_deterministic(h, deck, decls)
    system = build_constraints(h, [deck], decls)
    x = np.zeros(system.n)
    for node, w in out.weights.items():
        x[system.index("weight", node)] = w
    for key, k in out.mutual.items():
        x[system.index("mutual", key)] = k
    for key, k in out.antagonistic.items():
        x[system.index("antagonistic", key)] = k
    x[system.index("unit", h.resolve("root"))] = out.unit * out.scale
    assert np.all(system.margins(x) >= -1e-9)


def test_point_procedure_rejects_interval_decks():
    h = make_hierarchy()
    deck = next(d for d in make_decks(h, "C1") if d.node == h.resolve("overall"))
    with pytest.raises(ValidationError, match="interval"):
        srf_deterministic(h, deck, make_declarations(h))


def test_point_procedure_rejects_flat_ratio():
    h = flat_hierarchy(["a", "b"])
    ca, cb = Card.criterion(h.resolve("a")), Card.criterion(h.resolve("b"))
    deck = CardDeck(h.resolve("root"), ((ca,), (cb,)), ((0, 0),), (1, 1))
    with pytest.raises(ValidationError, match="ratio"):
        srf_deterministic(h, deck)


def test_point_procedure_rejects_negative_net_flow():
    h = flat_hierarchy(["g2", "g3", "g4"])
    g = {n: h.resolve(n) for n in ("g2", "g3", "g4")}
    decls = (
        InteractionDecl("weakening", g["g2"], g["g4"]),
        InteractionDecl("antagonistic", g["g4"], g["g3"]),
    )
    deck = CardDeck(
        node=h.resolve("root"),
        levels=(
            (Card.shadow(g["g4"]),),
            (Card.criterion(g["g3"]),),
            (Card.criterion(g["g2"]),),
            (Card.criterion(g["g4"]),),
            (Card.pair(g["g2"], g["g4"]),),
        ),
        gaps=((0, 0),) * 4,
        z=(5, 5),
    )
    with pytest.raises(ValidationError, match="net flow"):
        srf_deterministic(h, deck, decls)

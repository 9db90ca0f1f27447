"""Tree structure, scales, threshold functions, and problem validation."""

import pytest
from hypothesis import given, strategies as st

from simcat.hierarchy import (
    ROOT,
    CriteriaHierarchy,
    Scale,
    SimDisFunction,
    ValidationError,
    build_problem,
    elementary_descendants,
    performance_diff,
)

from conftest import (
    CRITERIA,
    F2,
    GRADE,
    LAMBDA,
    PERCENT,
    make_hierarchy,
    make_problem,
    make_vector,
)


# --- Scale -------------------------------------------------------------------


def test_interval_scale_contains():
    s = Scale("interval", 0, 100)
    assert s.contains(0) and s.contains(100) and s.contains(37.5)
    assert not s.contains(-1) and not s.contains(100.5)
    assert s.span() == 100


def test_ordinal_scale():
    s = Scale("ordinal", levels=(1, 2, 3, 4, 5, 6))
    assert s.contains(4)
    assert not s.contains(7)
    assert s.span() == 5


def test_scale_rejects_bad_bounds():
    with pytest.raises(ValidationError):
        Scale("ratio", 10, 10)
    with pytest.raises(ValidationError):
        Scale("interval", 5, -5)


def test_ordinal_scale_rejects_duplicates():
    with pytest.raises(ValidationError):
        Scale("ordinal", levels=(1, 2, 2, 3))
    with pytest.raises(ValidationError):
        Scale("ordinal", levels=(1,))


def test_performance_diff_numeric():
    s = Scale("ratio", 600, 1000)
    assert performance_diff(s, 740, 700) == 40
    assert performance_diff(s, 700, 740) == -40


def test_performance_diff_ordinal_is_signed_index_distance():
    s = Scale("ordinal", levels=("low", "mid", "high", "top"))
    assert performance_diff(s, "top", "mid") == 2
    assert performance_diff(s, "low", "high") == -2
    assert performance_diff(s, "mid", "mid") == 0


def test_performance_diff_off_scale():
    with pytest.raises(ValidationError):
        performance_diff(GRADE, 7, 3)


# --- SimDisFunction ----------------------------------------------------------


def test_simdis_requires_sorted_thresholds():
    with pytest.raises(ValidationError):
        SimDisFunction(negative=(10, 5, 20, 25), positive=(5, 10, 15, 20))
    with pytest.raises(ValidationError):
        SimDisFunction(negative=(5, 10, 20, 25), positive=(5, 10, 25, 20))


def test_simdis_symmetric_constructor():
    f = SimDisFunction.symmetric(1, 2, 3, 4)
    assert f.negative == f.positive == (1, 2, 3, 4)


def test_simdis_side_selection():
    assert F2.side(-12) == (5, 10, 20, 25)
    assert F2.side(12) == (5, 10, 15, 20)
    assert F2.side(0) == (5, 10, 15, 20)


# --- CriteriaHierarchy -------------------------------------------------------


def test_soldier_tree_shape():
    h = make_hierarchy()
    assert h.name(ROOT) == "overall"
    assert [h.name(c) for c in h.children(ROOT)] == ["MS", "MR", "PoF"]
    assert len(h.elementary()) == 9
    assert [h.name(n) for n in h.elementary()] == list(CRITERIA)
    assert [h.name(n) for n in h.non_elementary()] == ["overall", "MS", "MR", "PoF"]


def test_resolve_by_name_and_path():
    h = make_hierarchy()
    pc = h.resolve("PC")
    assert pc == (1, 2)
    assert h.resolve(pc) == pc
    assert h.resolve(()) == ROOT
    with pytest.raises(ValidationError):
        h.resolve("nope")


def test_elementary_descendants():
    h = make_hierarchy()
    names = [h.name(t) for t in elementary_descendants(h, h.resolve("MR"))]
    assert names == ["PS", "PR", "PT"]
    assert len(elementary_descendants(h, ROOT)) == 9
    leaf = h.resolve("WK")
    assert elementary_descendants(h, leaf) == (leaf,)


def test_single_child_node_rejected():
    with pytest.raises(ValidationError, match="child"):
        CriteriaHierarchy.from_nested(
            {
                "name": "root",
                "children": [
                    {
                        "name": "only",
                        "children": [{"name": "x", "scale": PERCENT, "simdis": F2}],
                    },
                    {"name": "y", "scale": PERCENT, "simdis": F2},
                ],
            }
        )


def test_duplicate_names_rejected():
    with pytest.raises(ValidationError, match="uplicate"):
        CriteriaHierarchy.from_nested(
            {
                "name": "root",
                "children": [
                    {"name": "x", "scale": PERCENT, "simdis": F2},
                    {"name": "x", "scale": PERCENT, "simdis": F2},
                ],
            }
        )


def test_internal_node_with_scale_rejected():
    with pytest.raises(ValidationError):
        CriteriaHierarchy.from_nested(
            {
                "name": "root",
                "scale": PERCENT,
                "children": [
                    {"name": "x", "scale": PERCENT, "simdis": F2},
                    {"name": "y", "scale": PERCENT, "simdis": F2},
                ],
            }
        )


def test_leaf_without_function_rejected():
    with pytest.raises(ValidationError):
        CriteriaHierarchy.from_nested(
            {
                "name": "root",
                "children": [
                    {"name": "x", "scale": PERCENT, "simdis": F2},
                    {"name": "y", "scale": PERCENT},
                ],
            }
        )


def test_function_wider_than_scale_rejected():
    wide = SimDisFunction.symmetric(10, 50, 90, 150)
    with pytest.raises(ValidationError, match="span"):
        CriteriaHierarchy.from_nested(
            {
                "name": "root",
                "children": [
                    {"name": "x", "scale": PERCENT, "simdis": wide},
                    {"name": "y", "scale": PERCENT, "simdis": F2},
                ],
            }
        )


# --- Problem assembly --------------------------------------------------------


def test_build_problem_happy_path():
    p = make_problem()
    assert p.categories == ("C1", "C2", "C3", "C4")
    assert p.dummy_category == "C5"
    assert p.threshold(ROOT, "C1") == 0.65
    assert p.threshold(p.hierarchy.resolve("MR"), "C2") == 0.60
    wk = p.hierarchy.resolve("WK")
    assert p.performance("a1")[wk] == 75


def test_build_problem_rejects_off_scale_performance():
    h = make_hierarchy()
    bad = dict(make_vector(h, (75, 75, 90, 3, 4, 4, 740, 6, 4)))
    bad[h.resolve("PS")] = 9  # not a grade level
    with pytest.raises(ValidationError, match="PS"):
        build_problem(
            hierarchy=h,
            actions={"a1": bad},
            categories=("C1",),
            reference_sets={"C1": {"b11": make_vector(h, (80, 75, 85, 4, 4, 4, 700, 6, 4))}},
            dummy_category="C2",
            thresholds={"C1": 0.65},
        )


def test_build_problem_rejects_empty_reference_set():
    h = make_hierarchy()
    a = make_vector(h, (75, 75, 90, 3, 4, 4, 740, 6, 4))
    with pytest.raises(ValidationError, match="reference"):
        build_problem(
            hierarchy=h,
            actions={"a1": a},
            categories=("C1",),
            reference_sets={"C1": {}},
            dummy_category="C2",
            thresholds={"C1": 0.65},
        )


@pytest.mark.parametrize("lam", [0.49, 1.01, -0.2])
def test_build_problem_rejects_threshold_outside_band(lam):
    h = make_hierarchy()
    a = make_vector(h, (75, 75, 90, 3, 4, 4, 740, 6, 4))
    with pytest.raises(ValidationError, match="threshold"):
        build_problem(
            hierarchy=h,
            actions={"a1": a},
            categories=("C1",),
            reference_sets={"C1": {"b11": a}},
            dummy_category="C2",
            thresholds={"C1": lam},
        )


def test_per_node_threshold_override():
    h = make_hierarchy()
    a = make_vector(h, (75, 75, 90, 3, 4, 4, 740, 6, 4))
    thresholds = {"C1": 0.65, (h.resolve("MR"), "C1"): 0.8}
    p = build_problem(
        hierarchy=h,
        actions={"a1": a},
        categories=("C1",),
        reference_sets={"C1": {"b11": a}},
        dummy_category="C2",
        thresholds=thresholds,
    )
    assert p.threshold(h.resolve("MR"), "C1") == 0.8
    assert p.threshold(ROOT, "C1") == 0.65
    assert p.threshold(h.resolve("MS"), "C1") == 0.65


def test_dummy_category_must_not_collide():
    h = make_hierarchy()
    a = make_vector(h, (75, 75, 90, 3, 4, 4, 740, 6, 4))
    with pytest.raises(ValidationError, match="dummy"):
        build_problem(
            hierarchy=h,
            actions={"a1": a},
            categories=("C1", "C2"),
            reference_sets={"C1": {"b": a}, "C2": {"b2": a}},
            dummy_category="C2",
            thresholds={"C1": 0.65, "C2": 0.65},
        )


# --- properties --------------------------------------------------------------


@st.composite
def quadruples(draw):
    vals = sorted(draw(st.lists(st.integers(0, 100), min_size=4, max_size=4)))
    return tuple(float(v) for v in vals)


@given(neg=quadruples(), pos=quadruples(), x=st.integers(0, 100), y=st.integers(0, 100))
def test_ordinal_diff_antisymmetry_on_numeric(neg, pos, x, y):
    s = Scale("interval", 0, 100)
    assert performance_diff(s, x, y) == -performance_diff(s, y, x)


@given(
    levels=st.lists(st.integers(0, 50), min_size=2, max_size=8, unique=True),
    data=st.data(),
)
def test_ordinal_diff_antisymmetry(levels, data):
    s = Scale("ordinal", levels=tuple(levels))
    x = data.draw(st.sampled_from(levels))
    y = data.draw(st.sampled_from(levels))
    assert performance_diff(s, x, y) == -performance_diff(s, y, x)

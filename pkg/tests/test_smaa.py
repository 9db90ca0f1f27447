"""Acceptability indices from sampled coefficient batches."""

import numpy as np
import pytest

from simcat.likeness import assign
from simcat.sampler import compile_polytope, hit_and_run
from simcat.smaa import AssignmentDistribution, containment_probability, run_smaa

from conftest import CATEGORIES, DUMMY


NODES = ("MS", "MR", "PoF", "overall")


def _batches(systems, n, seed, burn_in=200, thinning=2):
    out = {}
    for idx, cat in enumerate(CATEGORIES):
        poly = compile_polytope(systems[cat])
        ss = np.random.SeedSequence((seed, idx))
        out[cat] = hit_and_run(poly, n, seed=ss, burn_in=burn_in, thinning=thinning)
    return out


@pytest.fixture(scope="module")
def small_dist(soldier_problem, soldier_systems):
    batches = _batches(soldier_systems, 400, seed=2026)
    return run_smaa(soldier_problem, batches), batches


# ---------------------------------------------------------------------------
# agreement with the single-point rule
# ---------------------------------------------------------------------------


def test_single_sample_reproduces_assign(soldier_problem, soldier_systems):
    batches = _batches(soldier_systems, 1, seed=77, burn_in=50)
    dist = run_smaa(soldier_problem, batches)
    params = {cat: batches[cat].parameters(0, cat) for cat in CATEGORIES}
    for r in NODES:
        for a in soldier_problem.actions:
            freq = dist.exact_frequencies(r, a)
            assert len(freq) == 1
            (only_set, pct), = freq.items()
            assert pct == 100.0
            assert only_set == assign(soldier_problem, a, r, params)


# ---------------------------------------------------------------------------
# distribution invariants
# ---------------------------------------------------------------------------


def test_exact_sets_sum_to_100(small_dist):
    dist, _ = small_dist
    for r in NODES:
        for a in dist.actions:
            total = sum(dist.exact_frequencies(r, a).values())
            assert total == pytest.approx(100.0, abs=1e-6)


def test_marginals_derive_from_exact_sets(small_dist):
    dist, _ = small_dist
    for r in NODES:
        for a in dist.actions:
            freq = dist.exact_frequencies(r, a)
            for c in dist.categories:
                expected = sum(p for s, p in freq.items() if c in s)
                assert dist.marginal(r, a, c) == pytest.approx(expected, abs=1e-9)
            dummy = sum(p for s, p in freq.items() if DUMMY in s)
            assert dist.marginal(r, a, DUMMY) == pytest.approx(dummy, abs=1e-9)


def test_containment_is_superset_mass(small_dist):
    dist, _ = small_dist
    for a in dist.actions:
        freq = dist.exact_frequencies("overall", a)
        for c in dist.categories:
            single = containment_probability(dist, "overall", a, {c})
            assert single == pytest.approx(dist.marginal("overall", a, c), abs=1e-9)
        both = containment_probability(dist, "overall", a, {"C2", "C4"})
        expected = sum(p for s, p in freq.items() if {"C2", "C4"} <= s)
        assert both == pytest.approx(expected, abs=1e-9)


def test_containment_monotone_under_set_growth(small_dist):
    dist, _ = small_dist
    for r in NODES:
        for a in dist.actions:
            for c1 in dist.categories:
                for c2 in dist.categories:
                    if c1 == c2:
                        continue
                    pair = containment_probability(dist, r, a, {c1, c2})
                    assert pair <= containment_probability(dist, r, a, {c1}) + 1e-12


def test_containment_rejects_bad_sets(small_dist):
    dist, _ = small_dist
    with pytest.raises(ValueError, match="nonempty"):
        containment_probability(dist, "overall", "a1", set())
    with pytest.raises(ValueError, match="unknown"):
        containment_probability(dist, "overall", "a1", {"C9"})
    with pytest.raises(ValueError, match="unknown"):
        containment_probability(dist, "overall", "a1", {DUMMY})


def test_distribution_lookup_errors(small_dist):
    dist, _ = small_dist
    with pytest.raises(KeyError, match="node"):
        dist.exact_frequencies("WK", "a1")
    with pytest.raises(KeyError, match="action"):
        dist.exact_frequencies("overall", "a99")
    with pytest.raises(ValueError, match="category"):
        dist.marginal("overall", "a1", "C9")


# ---------------------------------------------------------------------------
# run_smaa argument handling
# ---------------------------------------------------------------------------


def test_batch_length_mismatch_rejected(soldier_problem, soldier_systems):
    batches = _batches(soldier_systems, 5, seed=3, burn_in=20)
    poly = compile_polytope(soldier_systems["C4"])
    batches["C4"] = hit_and_run(poly, 6, seed=4, burn_in=20, thinning=2)
    with pytest.raises(ValueError, match="length"):
        run_smaa(soldier_problem, batches)


def test_missing_category_batch_rejected(soldier_problem, soldier_systems):
    batches = _batches(soldier_systems, 5, seed=3, burn_in=20)
    del batches["C3"]
    with pytest.raises(ValueError, match="C3"):
        run_smaa(soldier_problem, batches)


def test_elementary_node_rejected(soldier_problem, soldier_systems):
    batches = _batches(soldier_systems, 2, seed=3, burn_in=20)
    with pytest.raises(ValueError, match="elementary"):
        run_smaa(soldier_problem, batches, nodes=("WK",))


def test_node_subset_restricts_output(soldier_problem, soldier_systems):
    batches = _batches(soldier_systems, 10, seed=9, burn_in=20)
    dist = run_smaa(soldier_problem, batches, nodes=("MS",))
    assert dist.node_names == ("MS",)
    dist.exact_frequencies("MS", "a1")
    with pytest.raises(KeyError):
        dist.exact_frequencies("overall", "a1")


def test_determinism(soldier_problem, soldier_systems):
    one = run_smaa(soldier_problem, _batches(soldier_systems, 60, seed=5))
    two = run_smaa(soldier_problem, _batches(soldier_systems, 60, seed=5))
    assert isinstance(one, AssignmentDistribution)
    for key, counts in one.counts.items():
        assert np.array_equal(counts, two.counts[key])


def test_raising_thresholds_never_grows_marginals(soldier_problem, soldier_systems):
    batches = _batches(soldier_systems, 120, seed=31)
    base = run_smaa(soldier_problem, batches)
    strict = run_smaa(
        soldier_problem, batches, lam={c: 0.99 for c in CATEGORIES}
    )
    for r in NODES:
        for a in base.actions:
            for c in base.categories:
                assert strict.marginal(r, a, c) <= base.marginal(r, a, c) + 1e-12


# ---------------------------------------------------------------------------
# small-sample reproduction smoke check
# ---------------------------------------------------------------------------


def test_soldier_panels_smoke(small_dist):
    dist, _ = small_dist
    # stable full-mass cells hold already at modest sample sizes
    assert dist.marginal("overall", "a1", "C1") >= 99.0
    assert containment_probability(dist, "overall", "a3", {"C2", "C4"}) >= 99.0
    assert dist.marginal("MS", "a4", DUMMY) >= 99.0
    # the split cell stays a split: both outcomes appear
    pof_a4 = dist.marginals("PoF", "a4")
    assert pof_a4["C3"] + pof_a4[DUMMY] == pytest.approx(100.0, abs=1e-6)
    assert pof_a4["C3"] >= 80.0

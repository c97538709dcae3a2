from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from probshare.access_structure import (
    CoverageError, MonotoneStructure, StructureError, all_infinite_witness,
    builtin_structure, diagonal_refutation, disjoint_progressions, gdelta_membership,
    gen_membership, grid_rows, important_participants, intersect_families,
    minimize_generators, normalize_witness, subsets)

from catalogue import brute_minimal_sets

UNIVERSE = range(1, 7)

small_sets = st.frozensets(st.integers(1, 6), min_size=1, max_size=4)
families = st.lists(small_sets, max_size=5)


def fs(*xs):
    return frozenset(xs)


@pytest.mark.parametrize("gens, A, expected", [
    ([{1, 2}], {1, 2, 3}, True),
    ([{1, 2}], {1, 3}, False),
    ([{1, 2}, {3, 4}], {3, 4}, True),
    ([], {1, 2}, False),
])
def test_gen_membership_examples(gens, A, expected):
    assert gen_membership(gens, A) is expected


@pytest.mark.parametrize("gens, expected", [
    ([{1, 2}, {1, 2, 3}], (fs(1, 2),)),
    ([{1, 3}, {2, 4}, {1, 3, 5}], (fs(1, 3), fs(2, 4))),
    ([], ()),
])
def test_minimize_examples(gens, expected):
    assert minimize_generators(gens) == expected


def test_canonical_order_is_size_then_lex():
    assert minimize_generators([{3, 4}, {1, 5, 6}, {2, 3}, {1, 4}]) == (
        fs(1, 4), fs(2, 3), fs(3, 4), fs(1, 5, 6))


@given(families)
@settings(max_examples=150)
def test_monotone(gens):
    for A in subsets(UNIVERSE):
        if gen_membership(gens, A):
            for x in UNIVERSE:
                assert gen_membership(gens, A | {x})


@given(families)
@settings(max_examples=150)
def test_minimize_idempotent_and_preserving(gens):
    m = minimize_generators(gens)
    assert minimize_generators(m) == m
    assert not any(a < b for a in m for b in m)
    for A in subsets(UNIVERSE):
        assert gen_membership(m, A) == gen_membership(gens, A)


def test_constructor_rejects_singletons_and_empty():
    with pytest.raises(StructureError):
        MonotoneStructure.from_generators([{1}, {2, 3}])
    with pytest.raises(StructureError):
        MonotoneStructure.from_generators([])
    with pytest.raises(StructureError):
        MonotoneStructure.from_generators([set()])
    s = MonotoneStructure.from_generators([{1}], permissive=True)
    assert s.qualified({1})


def test_constructor_absorbs_singleton_superset_only_when_permissive():
    # {1} absorbs {1,2}; the public constructor still sees the singleton
    with pytest.raises(StructureError):
        MonotoneStructure.from_generators([{1}, {1, 2}])


@pytest.mark.parametrize("layers, expected", [
    ([[{1}], [{2}]], [[{1}], [{1, 2}]]),
    ([[{1, 2}], [{1, 2}]], [[{1, 2}], [{1, 2}]]),
])
def test_normalize_trivial_examples(layers, expected):
    w = normalize_witness(layers)
    assert w.normalized
    assert [list(map(set, level)) for level in w.levels] == expected


def test_normalize_against_brute_force_intersection():
    layers = [[{1}, {2}], [{3}]]
    # oracle: enumerate subsets of {1,2,3} lying in both generated families
    both = lambda A: gen_membership(layers[0], A) and gen_membership(layers[1], A)
    oracle = brute_minimal_sets({1, 2, 3}, both)
    assert oracle == [fs(1, 3), fs(2, 3)]
    w = normalize_witness(layers)
    assert w.levels[0] == (fs(1), fs(2))
    assert list(w.levels[1]) == oracle


@given(st.lists(families, min_size=1, max_size=4))
@settings(max_examples=80)
def test_normalize_matches_brute_force_and_decreases(layers):
    w = normalize_witness(layers)
    assert w.is_decreasing()
    for i in range(len(layers)):
        for A in subsets(UNIVERSE):
            direct = all(gen_membership(layers[j], A) for j in range(i + 1))
            assert gen_membership(w.levels[i], A) == direct
            if i:
                assert not gen_membership(w.levels[i], A) or gen_membership(w.levels[i - 1], A)


def test_intersect_families_is_polynomial_form():
    assert intersect_families([{1}, {2}], [{1}]) == (fs(1),)


def test_gdelta_membership_examples():
    w = all_infinite_witness(6, 3)
    assert gdelta_membership(w, {1, 2, 3}, 3)
    assert not gdelta_membership(w, {1, 2}, 3)
    w2 = normalize_witness([[{1}], [{2}]])
    assert not gdelta_membership(w2, {1}, 2)
    with pytest.raises(StructureError):
        gdelta_membership(w2, {1}, 3)
    with pytest.raises(StructureError):
        gdelta_membership(w2, {1}, 0)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_all_infinite_levels_count_sizes(n):
    w = all_infinite_witness(n, n)
    for k in range(1, n + 1):
        for A in subsets(range(1, n + 1)):
            assert gdelta_membership(w, A, k) == (len(A) >= k)


def test_builtin_all_infinite_example():
    w = builtin_structure("all_infinite", max_index=4, levels=2)
    assert w.levels[0] == tuple(fs(i) for i in range(1, 5))
    assert w.levels[1] == tuple(frozenset(c) for c in combinations(range(1, 5), 2))


def test_builtin_forbidden_level_one():
    w = builtin_structure("forbidden", forbidden=[{1, 2}], max_index=6, levels=1)
    assert w.levels[0] == (fs(3), fs(4), fs(5), fs(6))


def test_builtin_forbidden_semantics():
    F = [{1, 2}, {2, 3}, {4}]
    w = builtin_structure("forbidden", forbidden=F, max_index=5, levels=3)
    for n in range(1, 4):
        assert all(len(B) <= n for B in w.levels[n - 1])
        for A in subsets(range(1, 6)):
            assert gen_membership(w.levels[n - 1], A) == all(not A <= set(f) for f in F[:n])


def test_builtin_grid_rows():
    s = builtin_structure("grid_rows", m=2)
    assert s.generators == (fs(1, 2), fs(3, 4))


def test_builtin_errors():
    with pytest.raises(StructureError):
        builtin_structure("nope")
    with pytest.raises(StructureError):
        builtin_structure("all_infinite", max_index=0, levels=2)
    with pytest.raises(StructureError):
        builtin_structure("grid_rows", m=-1)


def test_diagonal_refutation_progressions():
    sets = disjoint_progressions(3, 12)
    assert sets[0] == fs(3, 6, 9, 12)
    # oracle: smallest lexicographic i-subset of the i-th set
    expected = frozenset()
    for i, A in enumerate(sets, start=1):
        expected |= frozenset(min(combinations(sorted(A), i)))
    assert expected == fs(3, 1, 4, 2, 5, 8)
    B = diagonal_refutation(sets, all_infinite_witness(12, 3))
    assert B == expected


def test_diagonal_refutation_single_and_coverage_error():
    w = normalize_witness([[{1}]])
    assert diagonal_refutation([{1, 2}], w) == fs(1)
    with pytest.raises(CoverageError):
        diagonal_refutation([{1, 2}], normalize_witness([[{3}]]))


def test_diagonal_refutation_rejects_swallowed_candidate():
    with pytest.raises(StructureError):
        diagonal_refutation([{1, 2}], normalize_witness([[{1, 2}]]))


@pytest.mark.parametrize("m, levels", [(3, 2), (4, 3), (5, 4)])
def test_diagonal_refutation_grid_rows(m, levels):
    rows = grid_rows(m)[:levels]
    # witness covering the rows: first i points of every row
    layers = [[set(sorted(r)[:i]) for r in grid_rows(m)] for i in range(1, levels + 1)]
    w = normalize_witness(layers)
    B = diagonal_refutation(rows, w)
    for i in range(levels):
        assert gen_membership(w.levels[i], B)
    assert all((B & r) < r for r in rows)


def test_important_participants():
    thr = MonotoneStructure.from_generators(combinations([1, 2, 3], 2))
    assert important_participants(thr, [1, 2, 3]) == fs(1, 2, 3)
    empty = MonotoneStructure.from_generators([], permissive=True)
    assert important_participants(empty, [1, 2, 3]) == frozenset()
    assert important_participants(MonotoneStructure.from_generators([{1, 2}]), [1, 2, 3]) == fs(1, 2)


def test_important_participants_of_all_infinite_truncation_is_empty():
    for n in range(1, 7):
        w = all_infinite_witness(n, n + 1)
        assert important_participants(lambda A: gdelta_membership(w, A), range(1, n + 1)) == frozenset()

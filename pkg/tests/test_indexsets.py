"""Interval boxes, set surgery, staggered words, and their partition identities."""

import itertools
import math

import pytest

from conftest import assert_report_passes
from weylcells import coxeter, indexsets


def all_subsets(n: int):
    base = list(range(1, n + 1))
    for mask in range(1 << n):
        yield frozenset(g for b, g in enumerate(base) if mask >> b & 1)


def test_jk_set_frozen():
    assert indexsets.jk_set(3, 1) == frozenset({1, 2})
    assert indexsets.jk_set(2, 2) == frozenset()
    assert indexsets.jk_set(5, 3) == frozenset({1, 2})
    with pytest.raises(ValueError):
        indexsets.jk_set(2, 3)


def test_complement_tuple_frozen():
    assert indexsets.complement_tuple(2, {2}) == (1,)
    assert indexsets.complement_tuple(3, frozenset()) == (1, 2, 3)
    assert indexsets.complement_tuple(4, {1, 3}) == (2, 4)


def test_modified_set_frozen():
    assert indexsets.modified_set(indexsets.jk_set(2, 1), {1}, {2}) == (
        frozenset({2})
    )
    assert indexsets.modified_set(frozenset({1}), {3}, {3}) == frozenset({1})
    with pytest.raises(ValueError):
        indexsets.modified_set(frozenset(), {1}, set())


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_modified_set_recovers_subset(n):
    for subset in all_subsets(n):
        k = n - len(subset)
        comp = indexsets.complement_tuple(n, subset)
        rebuilt = indexsets.modified_set(
            indexsets.jk_set(n, k), set(comp), set(range(n - k + 1, n + 1))
        )
        assert rebuilt == subset


def test_cell_box_frozen():
    assert indexsets.box_elements(indexsets.cell_box(2, 1, {2})) == [(2,), (3,)]
    assert indexsets.box_elements(indexsets.cell_box(2, 1, {1})) == [(3,)]
    assert indexsets.box_elements(indexsets.cell_box(2, 2, frozenset())) == [
        (2, 3)
    ]


def test_box_size_matches_enumeration():
    assert indexsets.box_size(((3, 2),)) == 0
    assert indexsets.box_elements(((3, 2),)) == []
    for n in range(1, 5):
        for subset in all_subsets(n):
            k = n - len(subset)
            if k == 0:
                continue
            box = indexsets.cell_box(n, k, subset)
            comp = indexsets.complement_tuple(n, subset)
            predicted = math.prod(
                n - k + pos + 1 - comp[pos - 1] for pos in range(1, k + 1)
            )
            elems = indexsets.box_elements(box)
            assert len(elems) == indexsets.box_size(box) == predicted
            assert len(set(elems)) == len(elems)


def test_cell_box_variant_frozen():
    full = indexsets.cell_box_variant(2, 1, {2}, 3, "C0")
    assert indexsets.box_elements(full) == [(2,), (3,)]
    assert indexsets.box_size(indexsets.cell_box_variant(2, 1, {2}, 3, "Ck")) == 0
    empty_d = indexsets.cell_box_variant(3, 2, {2}, 4, "D", t=1, t2=1)
    assert indexsets.box_size(empty_d) == 0


@pytest.mark.parametrize(
    "a, b, blocks, pairs",
    [(1, 1, 2, 2), (1, 2, 4, 6), (2, 4, 6, 12)],
)
def test_lshape_partition_counts(a, b, blocks, pairs):
    parts = indexsets.lshape_partition(a, b)
    assert len(parts) == blocks
    seen: set[tuple[int, ...]] = set()
    for box in parts:
        for member in indexsets.box_elements(box):
            assert member not in seen
            seen.add(member)
    rectangle = {
        (r1, r2)
        for r1 in range(a, b + 1)
        for r2 in range(a, b + 2)
    }
    assert seen == rectangle
    assert len(seen) == pairs
    with pytest.raises(ValueError):
        indexsets.lshape_partition(3, 2)


def test_tuple_to_weyl_frozen():
    assert indexsets.tuple_to_weyl(2, 1, (3,)) == coxeter.identity(2)
    assert indexsets.tuple_to_weyl(1, 1, (1,)) == coxeter.simple_reflection(1, 1)
    assert indexsets.tuple_to_weyl(2, 2, (1, 1)) == coxeter.from_word(2, (1, 2, 1))
    with pytest.raises(ValueError):
        indexsets.tuple_to_weyl(2, 1, (4,))


@pytest.mark.parametrize("n", [2, 3])
def test_cell_box_tuples_hit_distinct_cosets(n):
    for subset in all_subsets(n):
        k = n - len(subset)
        if k == 0:
            continue
        jsub = coxeter.parabolic_subgroup(n, indexsets.jk_set(n, k))
        reps = set()
        for r in indexsets.box_elements(indexsets.cell_box(n, k, subset)):
            w = indexsets.tuple_to_weyl(n, k, r)
            reps.add(indexsets.coset_representative(w, jsub))
        assert len(reps) == indexsets.box_size(indexsets.cell_box(n, k, subset))


def test_full_box_enumerates_quotient():
    n = 3
    for k in range(1, n + 1):
        jsub = coxeter.parabolic_subgroup(n, indexsets.jk_set(n, k))
        box = tuple((1, n - k + pos + 1) for pos in range(1, k + 1))
        reps = {
            indexsets.coset_representative(indexsets.tuple_to_weyl(n, k, r), jsub)
            for r in indexsets.box_elements(box)
        }
        assert len(reps) == math.factorial(n + 1) // math.factorial(n - k + 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_box_partition_identities(n):
    for subset in all_subsets(n):
        k = n - len(subset)
        if k == 0:
            continue
        comp = indexsets.complement_tuple(n, subset)
        for i_top in range(comp[-1] + 1, n + 2):
            assert_report_passes(
                indexsets.verify_box_partitions(n, k, subset, i_top)
            )


def test_box_partition_identities_spot_n4():
    assert_report_passes(indexsets.verify_box_partitions(4, 2, {1, 4}, 5))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_coset_decomposition_suite(n):
    assert_report_passes(indexsets.verify_coset_decompositions(n))

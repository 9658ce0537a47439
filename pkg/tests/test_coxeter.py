"""Permutation Weyl group: words, lengths, runs, rotations, double cosets."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import assert_report_passes
from weylcells import coxeter


def small_words(n: int, max_len: int = 10):
    return st.lists(st.integers(1, n), max_size=max_len).map(tuple)


def brute_inversions(w: coxeter.WeylElement) -> int:
    m = w.n + 1
    return sum(
        1
        for a in range(1, m + 1)
        for b in range(a + 1, m + 1)
        if coxeter.apply(w, a) > coxeter.apply(w, b)
    )


def test_simple_reflection_swaps_adjacent_letters():
    s1 = coxeter.simple_reflection(2, 1)
    assert s1.perm == (2, 1, 3)
    s2 = coxeter.simple_reflection(2, 2)
    assert s2.perm == (1, 3, 2)
    assert coxeter.length(s1) == 1
    with pytest.raises(ValueError):
        coxeter.simple_reflection(2, 3)


def test_multiply_applies_right_factor_first():
    s1 = coxeter.simple_reflection(2, 1)
    s2 = coxeter.simple_reflection(2, 2)
    prod = coxeter.multiply(s1, s2)
    for j in range(1, 4):
        assert coxeter.apply(prod, j) == coxeter.apply(s1, coxeter.apply(s2, j))
    assert prod.perm == (2, 3, 1)


@settings(max_examples=60)
@given(word=small_words(3))
def test_inverse_and_identity(word):
    w = coxeter.from_word(3, word)
    e = coxeter.identity(3)
    assert coxeter.multiply(w, coxeter.inverse(w)) == e
    assert coxeter.multiply(coxeter.inverse(w), w) == e
    assert coxeter.multiply(w, e) == w


@settings(max_examples=60)
@given(word=small_words(3))
def test_length_counts_inversions(word):
    w = coxeter.from_word(3, word)
    assert coxeter.length(w) == brute_inversions(w)


@settings(max_examples=60)
@given(word=small_words(4, max_len=12))
def test_reduced_word_roundtrip(word):
    w = coxeter.from_word(4, word)
    red = coxeter.reduced_word(w)
    assert len(red) == coxeter.length(w)
    assert coxeter.from_word(4, red) == w


def test_braid_relation_frozen():
    lhs = coxeter.from_word(2, (1, 2, 1))
    rhs = coxeter.from_word(2, (2, 1, 2))
    assert lhs == rhs
    assert coxeter.length(lhs) == 3
    assert lhs.perm == (3, 2, 1)


def test_segment_word_frozen():
    assert coxeter.segment_word(3, 2, 3) == (2, 3)
    assert coxeter.segment_word(3, 1, 3) == (1, 2, 3)
    assert coxeter.segment_word(3, 2, 1) == ()
    assert coxeter.segment_element(3, 2, 1) == coxeter.identity(3)
    with pytest.raises(ValueError):
        coxeter.segment_word(3, 0, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_rotation_element_is_cyclic_shift(n):
    for i in range(n + 1):
        w = coxeter.rotation_element(n, i)
        expected = tuple((j - 1 + i) % (n + 1) + 1 for j in range(1, n + 2))
        assert w.perm == expected
        assert coxeter.length(w) == i * (n + 1 - i)
        assert len(coxeter.rotation_word(n, i)) == i * (n + 1 - i)
    step = coxeter.rotation_element(n, 1)
    acc = coxeter.identity(n)
    for _ in range(n + 1):
        acc = coxeter.multiply(step, acc)
    assert acc == coxeter.identity(n)


def test_all_elements_count_and_rank_guard():
    for n in range(1, 5):
        elems = coxeter.all_elements(n)
        assert len(elems) == math.factorial(n + 1)
        assert len(set(elems)) == len(elems)
    with pytest.raises(ValueError):
        coxeter.all_elements(8)


@pytest.mark.parametrize(
    "n, gens, order",
    [
        (2, frozenset(), 1),
        (2, {1}, 2),
        (3, {1, 2}, 6),
        (3, {1, 3}, 4),
        (3, {1, 2, 3}, 24),
    ],
)
def test_parabolic_subgroup_orders(n, gens, order):
    sub = coxeter.parabolic_subgroup(n, gens)
    assert len(sub) == order
    assert len(set(sub)) == order
    assert coxeter.identity(n) in sub


def test_double_cosets_frozen_pair():
    cosets = coxeter.double_cosets(2, {1}, {1})
    assert [len(c) for c in cosets] == [2, 4]
    reps = [coxeter.minimal_representative(c) for c in cosets]
    assert reps[0] == coxeter.identity(2)
    assert reps[1] == coxeter.simple_reflection(2, 2)


def test_double_cosets_trivial_pair():
    cosets = coxeter.double_cosets(2, frozenset(), frozenset())
    assert len(cosets) == 6
    assert all(len(c) == 1 for c in cosets)


@pytest.mark.parametrize("n", [2, 3])
def test_double_cosets_partition_whole_group(n):
    gens = list(range(1, n + 1))
    subsets = []
    for mask in range(1 << n):
        subsets.append(frozenset(g for b, g in enumerate(gens) if mask >> b & 1))
    everything = set(coxeter.all_elements(n))
    for left in subsets:
        for right in subsets:
            cosets = coxeter.double_cosets(n, left, right)
            union = set()
            for c in cosets:
                assert not (union & c)
                union |= c
                for g in left:
                    s = coxeter.simple_reflection(n, g)
                    assert all(coxeter.multiply(s, w) in c for w in c)
                for g in right:
                    s = coxeter.simple_reflection(n, g)
                    assert all(coxeter.multiply(w, s) in c for w in c)
            assert union == everything


def test_tuple_word_frozen():
    assert coxeter.tuple_word(1, 1, (1,)) == (1,)
    assert coxeter.tuple_word(1, 1, (2,)) == ()
    assert coxeter.from_word(2, coxeter.tuple_word(2, 2, (1, 1))) == (
        coxeter.from_word(2, (1, 2, 1))
    )
    assert coxeter.from_word(3, coxeter.tuple_word(3, 2, (3, 4))) == (
        coxeter.identity(3)
    )


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_shift_identity_suite(n):
    assert_report_passes(coxeter.verify_shift_identity(n))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_translation_identity_suite(n):
    assert_report_passes(coxeter.verify_translation_identity(n))


def test_rotation_inverse_factorization_sweep():
    for n in range(1, 5):
        for k in range(1, n + 1):
            for i in range(0, n - k + 2):
                assert_report_passes(
                    coxeter.verify_rotation_inverse_factorization(n, k, i),
                )

"""Integer cell-function model: fiber sums, span membership, reduction checks."""

import math
from random import Random

import pytest

from conftest import assert_report_passes
from weylcells import coxeter, indexsets, spmodel


def all_subsets(n: int):
    base = list(range(1, n + 1))
    for mask in range(1 << n):
        yield frozenset(g for b, g in enumerate(base) if mask >> b & 1)


def basis_reps(n: int, k: int):
    reps, _ = spmodel.coset_basis(n, k)
    return reps


def test_coset_basis_sizes():
    assert len(basis_reps(2, 0)) == 1
    assert len(basis_reps(2, 1)) == 3
    assert len(basis_reps(2, 2)) == 6
    assert len(basis_reps(3, 3)) == 24
    for n in range(1, 5):
        for k in range(n + 1):
            expected = math.factorial(n + 1) // math.factorial(n - k + 1)
            assert len(basis_reps(n, k)) == expected


def test_fiber_sum_frozen():
    e = coxeter.identity(2)
    s1 = coxeter.simple_reflection(2, 1)
    s2 = coxeter.simple_reflection(2, 2)

    whole = spmodel.fiber_sum(e, 1, 2)
    assert whole.coeffs == (1, 1, 1)

    pair = spmodel.fiber_sum(e, 2, 2)
    assert pair == spmodel.cell_function(e, 2) + spmodel.cell_function(s2, 2)

    run = spmodel.fiber_sum(e, 2, 1)
    assert run == spmodel.cell_function(e, 2) + spmodel.cell_function(s1, 2)

    with pytest.raises(ValueError):
        spmodel.fiber_sum(e, 1, 1)


def test_fiber_sum_constant_on_fiber():
    for n, k in ((2, 1), (2, 2), (3, 2)):
        reps, index_of = spmodel.coset_basis(n, k)
        for w in reps:
            for j in range(n - k + 1, n + 1):
                base = spmodel.fiber_sum(w, k, j)
                for u in reps:
                    if base.coeffs[index_of[u.perm]]:
                        assert spmodel.fiber_sum(u, k, j) == base


def test_product_indicator_frozen():
    e = coxeter.identity(2)
    s2 = coxeter.simple_reflection(2, 2)
    assert spmodel.product_indicator(2, 1, {1}) == spmodel.cell_function(e, 1)
    assert spmodel.product_indicator(2, 1, {2}) == (
        spmodel.cell_function(e, 1) + spmodel.cell_function(s2, 1)
    )
    assert spmodel.product_indicator(1, 1, frozenset()) == (
        spmodel.cell_function(coxeter.identity(1), 1)
    )


def test_indicator_sum_matches_manual_sum():
    n, k = 2, 1
    box = indexsets.cell_box(n, k, frozenset({2}))
    total = spmodel.zero_function(n, k)
    for r in indexsets.box_elements(box):
        total = total + spmodel.cell_function(indexsets.tuple_to_weyl(n, k, r), k)
    assert spmodel.indicator_sum(n, k, box) == total


def test_rotation_action_order_and_identity():
    n, k = 3, 2
    f = spmodel.fiber_sum(coxeter.identity(n), k, 3)
    assert spmodel.act_rotation(0, f) == f
    current = f
    for _ in range(n + 1):
        current = spmodel.act_rotation(1, current)
    assert current == f


def test_rotation_action_preserves_degenerate_span():
    rng = Random(13)
    for n, k in ((2, 1), (2, 2), (3, 2)):
        for _ in range(5):
            w = coxeter.from_word(
                n, tuple(rng.randint(1, n) for _ in range(rng.randint(0, 4)))
            )
            j = rng.randint(n - k + 1, n)
            f = spmodel.fiber_sum(w, k, j)
            for i in range(n + 1):
                member, _ = spmodel.in_degenerate_span(spmodel.act_rotation(i, f))
                assert member


def test_membership_certificates_re_multiply():
    n, k = 3, 2
    e = coxeter.identity(n)
    f = spmodel.fiber_sum(e, k, 2) + spmodel.fiber_sum(e, k, 3)
    member, cert = spmodel.in_degenerate_span(f, full_certificate=True)
    assert member
    assert any(cert)


def test_single_basis_vector_not_degenerate():
    for n in range(1, 4):
        for k in range(1, n + 1):
            member, cert = spmodel.in_degenerate_span(
                spmodel.cell_function(coxeter.identity(n), k)
            )
            assert not member
            assert cert is None


def test_membership_modulo_torsion():
    n, k = 2, 1
    doubled = spmodel.cell_function(coxeter.identity(n), k).scale(2)
    member, _ = spmodel.in_degenerate_span(doubled, mod=2)
    assert member
    member, _ = spmodel.in_degenerate_span(doubled)
    assert not member


def test_quotient_rank_oracle():
    for n in range(1, 5):
        for k in range(n + 1):
            assert spmodel.quotient_rank(n, k) == math.comb(n, k)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tail_sign_relation(n):
    for k in range(1, n + 1):
        assert_report_passes(spmodel.verify_tail_sign_relation(n, k))


def test_lshape_relation_instances():
    e2 = coxeter.identity(2)
    assert_report_passes(spmodel.verify_lshape_relation(2, 2, e2, e2, 1, 2, 2))
    assert_report_passes(spmodel.verify_lshape_relation(2, 2, e2, e2, 2, 2, 2))
    rot = coxeter.rotation_element(2, 1)
    assert_report_passes(spmodel.verify_lshape_relation(2, 2, rot, e2, 1, 2, 2))
    e3 = coxeter.identity(3)
    braided = coxeter.multiply(
        coxeter.simple_reflection(3, 3), coxeter.simple_reflection(3, 2)
    )
    assert_report_passes(spmodel.verify_lshape_relation(3, 3, e3, braided, 1, 2, 3))
    with pytest.raises(ValueError):
        spmodel.verify_lshape_relation(2, 2, e2, e2, 1, 2, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_product_reduction_sweep(n):
    for subset in all_subsets(n):
        k = n - len(subset)
        if k == 0:
            continue
        comp = indexsets.complement_tuple(n, subset)
        for i_top in range(comp[-1] + 1, n + 2):
            assert_report_passes(
                spmodel.verify_product_reduction(n, k, subset, i_top)
            )
    with pytest.raises(ValueError):
        spmodel.verify_product_reduction(2, 1, frozenset({2}), 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_long_box_model_sweep(n):
    count = 0
    for subset in all_subsets(n):
        k = n - len(subset)
        if k == 0:
            continue
        comp = indexsets.complement_tuple(n, subset)
        if comp[-1] != n:
            continue
        count += 1
        assert_report_passes(spmodel.verify_hc2_model(n, k, subset))
    assert count > 0
    with pytest.raises(ValueError):
        spmodel.verify_hc2_model(2, 1, frozenset({2}))


@pytest.mark.parametrize("n", [2, 3])
def test_alternating_trade_model_sweep(n):
    count = 0
    for subset in all_subsets(n):
        k = n - len(subset)
        if k == 0:
            continue
        comp = indexsets.complement_tuple(n, subset)
        for i_top in range(comp[-1] + 1, n + 1):
            count += 1
            assert_report_passes(spmodel.verify_hc4_model(n, k, subset, i_top))
    assert count > 0


@pytest.mark.parametrize("n, k", [(2, 1), (2, 2), (3, 2)])
def test_rotation_stability_report(n, k):
    assert_report_passes(spmodel.verify_rotation_stability(n, k))


def test_admissible_subsets_counts():
    for n in range(1, 5):
        for k in range(1, n + 1):
            subsets = list(spmodel.admissible_subsets(n, k))
            assert len(subsets) == math.comb(n, k)
            assert all(
                len(indexsets.complement_tuple(n, s)) == k for s in subsets
            )

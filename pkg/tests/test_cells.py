"""Finite-group cell decompositions and the triangular normal form over K."""

from random import Random

import numpy as np
import pytest

from conftest import assert_report_passes
from weylcells import cells, coxeter, exactfield, indexsets


def all_subsets(n: int):
    base = list(range(1, n + 1))
    for mask in range(1 << n):
        yield frozenset(g for b, g in enumerate(base) if mask >> b & 1)


def test_group_order_frozen():
    assert cells.group_order(1, 2) == 6
    assert cells.group_order(2, 2) == 168
    assert cells.group_order(2, 3) == 11232
    assert cells.group_order(3, 2) == 20160
    assert len(cells.enumerate_group(1, 2)) == 6
    assert len(cells.enumerate_group(2, 2)) == 168


def test_borel_and_parabolic_orders():
    assert cells.borel_order(1, 2) == 2
    assert cells.borel_order(1, 3) == 12
    assert cells.borel_order(2, 2) == 8
    assert len(cells.parabolic_kappa(2, 2, frozenset())) == 8
    assert len(cells.parabolic_kappa(2, 2, {1})) == 24
    assert len(cells.parabolic_kappa(2, 2, {1, 2})) == 168


def test_borel_cell_sizes_frozen():
    tree_cells = cells.bruhat_cells(1, 2)
    sizes = {w: arr.size for w, arr in tree_cells.items()}
    assert sizes[coxeter.identity(1)] == 2
    assert sizes[coxeter.simple_reflection(1, 1)] == 4

    plane_cells = cells.bruhat_cells(2, 2)
    assert len(plane_cells) == 6
    total = 0
    for w, arr in plane_cells.items():
        assert arr.size == 2 ** coxeter.length(w) * cells.borel_order(2, 2)
        total += arr.size
    assert total == 168


def test_bruhat_class_of_permutation_matrices():
    for w in coxeter.all_elements(2):
        mat = exactfield.mat_reduce_mod_pi(exactfield.permutation_matrix(2, w, 2))
        assert cells.bruhat_class_kappa(2, 2, mat) == w


def test_bruhat_class_lower_unipotent_frozen():
    assert cells.bruhat_class_kappa(1, 2, [[1, 0], [1, 1]]) == (
        coxeter.simple_reflection(1, 1)
    )


def test_bruhat_class_invariant_under_borel_moves():
    rng = Random(3)
    q = 2
    n = 2
    group = cells.enumerate_group(n, q)
    borel = cells.parabolic_kappa(n, q, frozenset())
    for _ in range(30):
        g = group.mats[rng.randrange(len(group))]
        b1 = borel.mats[rng.randrange(len(borel))]
        b2 = borel.mats[rng.randrange(len(borel))]
        moved = b1 @ g @ b2 % q
        assert cells.bruhat_class_kappa(n, q, moved) == (
            cells.bruhat_class_kappa(n, q, g)
        )


@pytest.mark.parametrize(
    "n, q, left, right, classes",
    [
        (1, 2, frozenset(), frozenset(), 2),
        (2, 2, frozenset(), frozenset(), 6),
        (2, 2, frozenset({1, 2}), frozenset({1, 2}), 1),
        (2, 3, frozenset({1}), frozenset({2}), 4),
    ],
)
def test_bruhat_bijection_reports(n, q, left, right, classes):
    rep = cells.verify_bruhat_bijection(n, q, left, right)
    assert_report_passes(rep)
    assert len(coxeter.double_cosets(n, left, right)) == classes


def test_commuting_parahoric_products():
    assert_report_passes(
        cells.verify_commuting_parahoric_products(3, 2, {1}, {3})
    )
    assert_report_passes(
        cells.verify_commuting_parahoric_products(3, 2, {1}, frozenset()),
        require_instances=True,
    )
    with pytest.raises(ValueError):
        cells.verify_commuting_parahoric_products(2, 2, {1}, {2})


def test_parahoric_product_sizes_frozen():
    assert cells.parahoric_product_kappa(2, 2, 1, {2}).size == 72
    assert cells.parahoric_product_kappa(2, 2, 1, {1}).size == 24
    assert cells.parahoric_product_kappa(1, 2, 1, frozenset()).size == 2
    assert cells.parahoric_product_kappa(2, 2, 2, frozenset()).size == 8


def test_product_cell_decomposition_worked_instance():
    rep = cells.verify_product_cell_decomposition(2, 2, 1, {2})
    assert_report_passes(rep)
    assert rep["product_size"] == 72
    plane_cells = cells.bruhat_cells(2, 2)
    e = coxeter.identity(2)
    s1 = coxeter.simple_reflection(2, 1)
    s2 = coxeter.simple_reflection(2, 2)
    s2s1 = coxeter.multiply(s2, s1)
    piece_e = plane_cells[e].size + plane_cells[s1].size
    piece_s2 = plane_cells[s2].size + plane_cells[s2s1].size
    assert piece_e == 24
    assert piece_s2 == 48
    product = set(cells.parahoric_product_kappa(2, 2, 1, {2}).tolist())
    union = set(plane_cells[e].tolist()) | set(plane_cells[s1].tolist())
    union |= set(plane_cells[s2].tolist()) | set(plane_cells[s2s1].tolist())
    assert product == union


def test_product_cell_decomposition_sweep():
    for n, q in ((1, 2), (2, 2), (1, 3)):
        for subset in all_subsets(n):
            k = n - len(subset)
            if k == 0:
                continue
            assert_report_passes(
                cells.verify_product_cell_decomposition(n, q, k, subset)
            )


def build_matrix(q, rows):
    return [
        [c if isinstance(c, exactfield.RatFunc) else exactfield.const(q, c) for c in row]
        for row in rows
    ]


def test_normal_form_frozen_cases():
    q = 2
    ident = exactfield.mat_identity(2, q)
    fac = cells.iwasawa_class(ident)
    assert fac.w == coxeter.identity(1)
    s1 = coxeter.simple_reflection(1, 1)
    fac = cells.iwasawa_class(exactfield.permutation_matrix(1, s1, q))
    assert fac.w == s1
    lower = build_matrix(q, [[1, 0], [exactfield.t_power(q, -1), 1]])
    assert cells.iwasawa_class(lower).w == s1
    assert cells.iwasawa_permutation(lower) == s1


def test_normal_form_reconstructs_and_classifies():
    rng = Random(9)
    for n, q in ((1, 2), (2, 2), (1, 3)):
        for _ in range(10):
            g = exactfield.random_invertible_matrix(n, q, rng)
            fac = cells.iwasawa_class(g)
            product = exactfield.mat_mul(
                exactfield.mat_mul(
                    fac.left, exactfield.permutation_matrix(n, fac.w, q)
                ),
                fac.right,
            )
            assert exactfield.mat_equal(product, g)
            assert cells.is_iwahori(fac.left)
            assert cells.is_upper_triangular_invertible(fac.right)
            assert cells.iwasawa_permutation(g) == fac.w


def test_normal_form_agrees_with_residue_class_on_integral_matrices():
    rng = Random(21)
    for n, q in ((1, 2), (2, 2)):
        found = 0
        while found < 10:
            g = exactfield.random_integral_matrix(n, q, rng)
            if exactfield.mat_valuation_of_det(g) != 0:
                continue
            found += 1
            w = cells.iwasawa_class(g).w
            assert w == cells.bruhat_class_kappa(
                n, q, exactfield.mat_reduce_mod_pi(g)
            )


def test_normal_form_sampled_reports():
    recon, stable = cells.verify_iwasawa_normal_form_sampled(
        1, 2, samples=40, perturbations=5, seed=1
    )
    assert_report_passes(recon)
    assert_report_passes(stable)


def test_double_coset_sampled_report():
    rep = cells.verify_iwasawa_double_coset_sampled(
        2, 2, {1}, {2}, samples=25, seed=3, perturbations=3
    )
    assert_report_passes(rep)

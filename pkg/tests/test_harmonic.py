"""Harmonicity checkers, boundary-measure cochains, and set-identity reports."""

from random import Random

import pytest

from conftest import assert_report_passes, assert_report_fails
from weylcells import building, coxeter, exactfield, harmonic


def tree_chart(q: int, radius: int):
    return building.ball(1, q, radius)


def identity_rows(q: int):
    return [[exactfield.one(q), exactfield.zero(q)],
            [exactfield.zero(q), exactfield.one(q)]]


def test_zero_cochain_passes_everything():
    chart = tree_chart(2, 3)
    support = {cell: 0 for cell in harmonic.tree_edge_support(chart)}
    h = harmonic.Cochain(1, 1, support)
    for check in (harmonic.check_hc1, harmonic.check_hc2, harmonic.check_hc3):
        assert_report_passes(check(h, chart))
    rep = harmonic.check_hc4(h, chart)
    assert rep["status"] == "pass"
    assert rep["counts"]["instances"] == 0


def test_boundary_measure_normalization():
    q = 2
    mu = harmonic.boundary_measure(q, [(1, 1, 2), (0, 1, -2)])
    assert len(mu.atoms) == 2
    assert sum(w for _, _, w in mu.atoms) == 0
    with pytest.raises(ValueError):
        harmonic.boundary_measure(q, [(1, 0, 1)])
    with pytest.raises(ValueError):
        harmonic.boundary_measure(3, [(1, 0, 1), (2, 0, -1)])
    with pytest.raises(ValueError):
        harmonic.boundary_measure(q, [(0, 0, 1), (1, 0, -1)])


def test_measure_routing_frozen():
    q = 2
    chart = tree_chart(q, 2)
    mu = harmonic.boundary_measure(q, [(1, 0, 1), (0, 1, -1)])
    h = harmonic.measure_cochain(mu, chart)
    one, zero = exactfield.one(q), exactfield.zero(q)
    pi = exactfield.t_power(q, 1)
    toward_first_axis = building.pointed_cell(
        1, q, [identity_rows(q), [[one, zero], [zero, pi]]]
    )
    toward_second_axis = building.standard_cell(1, q, frozenset())
    toward_diagonal = building.pointed_cell(
        1, q, [identity_rows(q), [[one, one], [zero, pi]]]
    )
    assert h.value(toward_first_axis) == 1
    assert h.value(toward_second_axis) == -1
    assert h.value(toward_diagonal) == 0


def test_measure_cochains_are_harmonic():
    rng = Random(17)
    for q in (2, 3):
        chart = tree_chart(q, 3)
        for _ in range(3):
            mu = harmonic.random_boundary_measure(q, rng)
            h = harmonic.measure_cochain(mu, chart)
            assert_report_passes(harmonic.check_hc1(h, chart))
            assert_report_passes(harmonic.check_hc2(h, chart))
            assert_report_passes(harmonic.check_hc3(h, chart))
            rep = harmonic.check_hc4(h, chart)
            assert rep["status"] == "pass"


def test_measure_cochain_linear_in_measure():
    q = 2
    chart = tree_chart(q, 2)
    a1 = [(1, 0, 1), (0, 1, -1)]
    a2 = [(1, 1, 2), (exactfield.t_power(q, 1), exactfield.one(q), -2)]
    h1 = harmonic.measure_cochain(harmonic.boundary_measure(q, a1), chart)
    h2 = harmonic.measure_cochain(harmonic.boundary_measure(q, a2), chart)
    combined = harmonic.measure_cochain(
        harmonic.boundary_measure(q, a1 + a2), chart
    )
    for cell, value in combined.values.items():
        assert value == h1.values[cell] + h2.values[cell]


def test_corrupted_cochain_fails_with_witness():
    q = 2
    chart = tree_chart(q, 3)
    mu = harmonic.boundary_measure(q, [(1, 0, 1), (0, 1, -1)])
    h = harmonic.measure_cochain(mu, chart)
    target = building.standard_cell(1, q, frozenset())
    values = dict(h.values)
    values[target] += 1
    bad = harmonic.Cochain(1, 1, values)
    assert_report_fails(harmonic.check_hc2(bad, chart))


def test_constant_vertex_cochain_rigidity():
    q = 2
    chart = tree_chart(q, 2)
    cells = {
        building.pointed_cell(1, q, [[list(row) for row in v.matrix]]): 7
        for v in chart.distances
    }
    assert_report_passes(harmonic.check_hc4(harmonic.Cochain(1, 0, cells), chart))
    skewed = dict(cells)
    skewed[building.pointed_cell(1, q, [identity_rows(q)])] = 3
    assert_report_fails(harmonic.check_hc4(harmonic.Cochain(1, 0, skewed), chart))


def test_load_measure_text_fixture():
    mu = harmonic.load_measure(2, [["1", "0", 1], ["0", "1", -1]])
    direct = harmonic.boundary_measure(2, [(1, 0, 1), (0, 1, -1)])
    assert mu == direct


def test_pushforward_keeps_mass_and_atoms():
    q = 2
    mu = harmonic.boundary_measure(q, [(1, 0, 1), (0, 1, -1)])
    g = exactfield.permutation_matrix(1, Random(1).choice([]) if False else __import__("weylcells.coxeter", fromlist=["x"]).simple_reflection(1, 1), q)
    moved = harmonic.pushforward_measure(mu, g)
    assert len(moved.atoms) == 2
    assert sum(w for _, _, w in moved.atoms) == 0
    ident = exactfield.mat_identity(2, q)
    assert harmonic.pushforward_measure(mu, ident) == mu


def test_random_measure_determinism_and_caps():
    a = harmonic.random_boundary_measure(3, Random(5))
    b = harmonic.random_boundary_measure(3, Random(5))
    assert a == b
    for seed in range(10):
        mu = harmonic.random_boundary_measure(2, Random(seed))
        assert 2 <= len(mu.atoms) <= 6
        assert sum(w for _, _, w in mu.atoms) == 0


def test_refinement_exchange_reports():
    rep = harmonic.verify_refinement_exchange(2, 2, frozenset(), 1, 2)
    assert_report_passes(rep)
    assert rep["multiplicity"] == 1

    rep = harmonic.verify_refinement_exchange(2, 2, frozenset(), 1, 1)
    assert_report_passes(rep)
    assert rep["multiplicity"] == 1

    rep = harmonic.verify_refinement_exchange(2, 2, frozenset({2}), 1, 1)
    assert_report_passes(rep)
    assert rep["multiplicity"] == 3


def test_tree_duality_reports():
    assert_report_passes(harmonic.verify_tree_duality(2, 3, 5, 7))
    assert_report_passes(harmonic.verify_tree_duality(3, 2, 3, 1))


@pytest.mark.parametrize("n, q, k", [(1, 2, 1), (2, 2, 1), (2, 2, 2)])
def test_harmonicity_reduction_reports(n, q, k):
    assert_report_passes(harmonic.verify_harmonicity_reductions(n, q, k))


def test_cochain_json_dump():
    q = 2
    chart = tree_chart(q, 2)
    mu = harmonic.boundary_measure(q, [(1, 0, 1), (0, 1, -1)])
    h = harmonic.measure_cochain(mu, chart)
    dump = harmonic.cochain_to_json(h)
    assert len(dump["values"]) == len(h.values)

"""Lattice classes, pointed cells, local enumeration, and orbit checks."""

from collections import Counter
from random import Random

import pytest

from conftest import assert_report_passes
from weylcells import building, exactfield
from weylcells.building import (
    ball,
    cell_type,
    hc2_set,
    hc3_set,
    rotate_pointer,
    standard_cell,
    standard_vertex,
    vertex_neighbors,
    vertex_type,
)


def all_subsets(n: int):
    base = list(range(1, n + 1))
    for mask in range(1 << n):
        yield frozenset(g for b, g in enumerate(base) if mask >> b & 1)


def test_standard_vertex_frozen():
    q = 2
    v0 = standard_vertex(2, q, 0)
    ident = exactfield.mat_identity(3, q)
    assert [list(row) for row in v0.matrix] == [list(row) for row in ident]
    v1 = standard_vertex(2, q, 1)
    pi = exactfield.t_power(q, 1)
    one = exactfield.one(q)
    zero = exactfield.zero(q)
    assert [list(row) for row in v1.matrix] == [
        [pi, zero, zero],
        [zero, one, zero],
        [zero, zero, one],
    ]
    assert [vertex_type(standard_vertex(2, q, i)) for i in range(3)] == [0, 1, 2]
    with pytest.raises(ValueError):
        standard_vertex(2, q, 3)


def test_vertex_canonicalization_identifies_homothetic_lattices():
    q = 2
    pi = exactfield.t_power(q, 1)
    v = standard_vertex(1, q, 1)
    scaled = building.vertex_from_rows(
        1, q, [[entry * pi for entry in row] for row in v.matrix]
    )
    assert scaled == v
    shuffled = building.vertex_from_rows(
        1, q, [list(v.matrix[1]), list(v.matrix[0])]
    )
    assert shuffled == v


def test_standard_cell_types_frozen():
    q = 2
    assert cell_type(standard_cell(2, q, frozenset({1, 2}))) == (3,)
    assert cell_type(standard_cell(2, q, frozenset({1}))) == (2, 1)
    assert cell_type(standard_cell(2, q, frozenset())) == (1, 1, 1)
    assert cell_type(standard_cell(3, q, frozenset({1}))) == (2, 1, 1)


def test_action_fixes_and_composes():
    q = 2
    chamber = standard_cell(2, q, frozenset())
    ident = exactfield.mat_identity(3, q)
    assert building.act(ident, chamber) == chamber
    pi = exactfield.t_power(q, 1)
    homothety = [[pi if r == c else exactfield.zero(q) for c in range(3)] for r in range(3)]
    assert building.act(homothety, chamber) == chamber
    rng = Random(5)
    for _ in range(10):
        g = exactfield.random_invertible_matrix(2, q, rng)
        h = exactfield.random_invertible_matrix(2, q, rng)
        lhs = building.act(g, building.act(h, chamber))
        rhs = building.act(exactfield.mat_mul(g, h), chamber)
        assert lhs == rhs
        assert cell_type(building.act(g, chamber)) == cell_type(chamber)


def test_rotate_pointer_cycles_types():
    q = 2
    cell = standard_cell(3, q, frozenset({1}))
    assert cell_type(cell) == (2, 1, 1)
    assert cell_type(rotate_pointer(cell)) == (1, 1, 2)
    current = cell
    for _ in range(3):
        current = rotate_pointer(current)
    assert current == cell
    vertex = standard_cell(2, q, frozenset({1, 2}))
    assert rotate_pointer(vertex) == vertex


def test_refinement_set_sizes_frozen():
    q = 2
    edge = standard_cell(1, q, frozenset())
    assert hc3_set(edge, 0) == [edge]
    assert hc3_set(edge, 1) == [edge]
    cell = standard_cell(2, q, frozenset({2}))
    refinements = hc3_set(cell, 1)
    assert len(refinements) == 3
    swapped = standard_cell(2, q, frozenset({1}))
    assert cell_type(swapped) == (2, 1)
    assert all(cell_type(c) == (2, 1) for c in refinements)
    assert swapped in refinements


def test_completion_set_sizes_frozen():
    q = 2
    base_vertex = standard_cell(1, q, frozenset({1}))
    edges = hc2_set(base_vertex, (1, 1), None)
    assert len(edges) == 3
    assert hc2_set(base_vertex, (1, 2), None) == []


def test_ball_counts_frozen():
    tree = ball(1, 2, 3)
    shells = Counter(tree.distances.values())
    assert shells == Counter({0: 1, 1: 3, 2: 6, 3: 12})
    assert len(ball(2, 2, 1).distances) == 15
    assert len(vertex_neighbors(standard_vertex(1, 2, 1))) == 3
    for radius in (1, 2, 3, 4):
        boundary = Counter(ball(1, 2, radius).distances.values())[radius]
        assert boundary == 3 * 2 ** (radius - 1)


def test_ball_guards():
    with pytest.raises(ValueError):
        ball(1, 2, 5)
    with pytest.raises(ValueError):
        ball(2, 2, 3)
    with pytest.raises(ValueError):
        ball(3, 2, 1)


@pytest.mark.parametrize("n, q", [(1, 2), (2, 2), (1, 3)])
def test_rotation_action_report(n, q):
    assert_report_passes(building.verify_rotation_action(n, q))


def test_parahoric_orbit_reports():
    rep = building.verify_parahoric_orbits(1, 2, frozenset(), 1)
    assert_report_passes(rep)
    assert rep["face_orbit"] == rep["face_target"] == 3
    rep = building.verify_parahoric_orbits(2, 2, frozenset({2}), 1)
    assert_report_passes(rep)
    assert rep["refinement_orbit"] == rep["refinement_target"] == 3


def test_parahoric_orbit_rejects_bad_position():
    with pytest.raises(ValueError):
        building.verify_parahoric_orbits(2, 2, frozenset({2}), 2)


def test_parahoric_orbit_stuck_sampler_is_inconclusive():
    q = 2

    def sampler(stab, rng):
        return exactfield.mat_identity(3, q)

    rep = building.verify_parahoric_orbits(
        2, 2, frozenset(), 1, sampler=sampler, cap_factor=2
    )
    assert rep["status"] == "inconclusive"

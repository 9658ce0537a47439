"""Lattice chains over the valuation ring: vertices, pointed cells, balls.

A vertex is a homothety class of full-rank lattices in K^m, K the rational
function field with uniformizer t and m the matrix size.  A lattice is
stored by its unique triangular basis: row j has first nonzero entry t^a_j
at position j, and the entries above the diagonal in column j are partial
expansions with all exponents below a_j.  Homothety classes scale that
basis so the smallest diagonal exponent is zero.  Equality of classes is
then literal equality of matrices.

A pointed cell is a strictly decreasing lattice chain, from the
distinguished lattice down to just above t times it; rotating the pointer
shifts the chain one step.  The two enumerations the harmonicity axioms
quantify over are :func:`hc3_set` (replace one link by the preimages of
the lines of its quotient) and :func:`hc2_set` (insert one link with a
prescribed quotient splitting).

Everything is exact; no floating point and no approximation anywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from random import Random
from typing import Callable

from . import cells as cells_mod
from . import coxeter, exactfield, indexsets
from .exactfield import Matrix, RatFunc, laurent_truncate, t_power, valuation, zero
from .report import Report, make_report

BALL_RADIUS_LIMITS = {1: 4, 2: 2, 3: 1}

KappaVector = tuple[int, ...]


def _lattice_canonical(q: int, rows: list[list[RatFunc]], m: int) -> list[list[RatFunc]]:
    """The triangular basis of the lattice generated by the given rows.

    Any generating family works; the rows must span a full-rank lattice.
    """
    work = [row[:] for row in rows if any(row)]
    basis: list[list[RatFunc]] = []
    for col in range(m):
        best = None
        for idx, row in enumerate(work):
            if row[col]:
                v = valuation(row[col])
                if best is None or v < best[0]:
                    best = (v, idx)
        if best is None:
            raise ValueError("generators do not span a full-rank lattice")
        pivot_val, idx = best
        pivot_row = work.pop(idx)
        unit = pivot_row[col] / t_power(q, int(pivot_val))
        pivot_row = [x / unit for x in pivot_row]
        for row in work:
            if row[col]:
                f = row[col] / pivot_row[col]
                for c in range(m):
                    row[c] = row[c] - f * pivot_row[c]
        basis.append(pivot_row)
    for row in work:
        if any(row):
            raise AssertionError("leftover generator row failed to reduce to zero")
    for j in range(1, m):
        a_j = int(valuation(basis[j][j]))
        for i in range(j):
            entry = basis[i][j]
            reduced = laurent_truncate(entry, a_j)
            if entry == reduced:
                continue
            f = (entry - reduced) / basis[j][j]
            for c in range(m):
                basis[i][c] = basis[i][c] - f * basis[j][c]
    return basis


def _scale_rows(mat: list[list[RatFunc]], factor: RatFunc) -> list[list[RatFunc]]:
    return [[x * factor for x in row] for row in mat]


def _freeze(mat: list[list[RatFunc]]) -> tuple[tuple[RatFunc, ...], ...]:
    return tuple(tuple(row) for row in mat)


def _diag_valuations(mat) -> list[int]:
    return [int(valuation(mat[d][d])) for d in range(len(mat))]


@dataclass(frozen=True)
class LatticeVertex:
    """A homothety class of lattices, keyed by its normalized basis."""

    n: int
    q: int
    matrix: tuple[tuple[RatFunc, ...], ...]


def vertex_from_rows(n: int, q: int, rows: list[list[RatFunc]]) -> LatticeVertex:
    m = n + 1
    canon = _lattice_canonical(q, rows, m)
    shift = -min(_diag_valuations(canon))
    if shift:
        canon = _scale_rows(canon, t_power(q, shift))
    return LatticeVertex(n, q, _freeze(canon))


def vertex_type(v: LatticeVertex) -> int:
    """Sum of diagonal exponents modulo the matrix size."""
    return sum(_diag_valuations(v.matrix)) % (v.n + 1)


def standard_vertex(n: int, q: int, i: int) -> LatticeVertex:
    """Class of the lattice with first i basis vectors scaled by t."""
    if not 0 <= i <= n + 1:
        raise ValueError(f"index {i} out of range 0..{n + 1}")
    rows = [
        [
            (t_power(q, 1) if r == c and r < i else
             exactfield.one(q) if r == c else zero(q))
            for c in range(n + 1)
        ]
        for r in range(n + 1)
    ]
    return vertex_from_rows(n, q, rows)


@dataclass(frozen=True)
class PointedCell:
    """A strictly decreasing lattice chain up to common homothety.

    ``lattices[0]`` is the distinguished lattice, normalized to smallest
    diagonal exponent zero; the others keep the same overall scaling.
    """

    n: int
    q: int
    lattices: tuple[tuple[tuple[RatFunc, ...], ...], ...]

    @property
    def k(self) -> int:
        return len(self.lattices) - 1


def _contains(q: int, outer, inner, m: int) -> bool:
    """Does the lattice of ``outer`` contain the lattice of ``inner``."""
    inv = exactfield.mat_inverse([list(row) for row in outer])
    coords = exactfield.mat_mul([list(row) for row in inner], inv)
    return all(valuation(x) >= 0 for row in coords for x in row)


def pointed_cell(n: int, q: int, chain: list[list[list[RatFunc]]]) -> PointedCell:
    """Build and normalize a pointed cell from lattice generating rows.

    Validates that the chain decreases strictly and stays above t times the
    distinguished lattice.
    """
    m = n + 1
    canon = [_lattice_canonical(q, rows, m) for rows in chain]
    dets = [sum(_diag_valuations(mat)) for mat in canon]
    for j in range(len(canon) - 1):
        if not (_contains(q, canon[j], canon[j + 1], m) and dets[j + 1] > dets[j]):
            raise ValueError(f"chain fails strict containment at step {j}")
    bottom = _scale_rows(canon[0], t_power(q, 1))
    if not (_contains(q, canon[-1], bottom, m) and dets[0] + m > dets[-1]):
        raise ValueError("chain leaves the window above t times the top lattice")
    shift = -min(_diag_valuations(canon[0]))
    if shift:
        factor = t_power(q, shift)
        canon = [_scale_rows(mat, factor) for mat in canon]
    return PointedCell(n, q, tuple(_freeze(mat) for mat in canon))


def standard_cell(n: int, q: int, subset: frozenset[int] | set[int]) -> PointedCell:
    """The pointed cell on the standard vertices indexed by the complement.

    The chain starts at the unit lattice and descends through the standard
    lattices at the complementary indices i_1 < ... < i_k.
    """
    comp = indexsets.complement_tuple(n, subset)
    chain = []
    for i in (0,) + comp:
        rows = [
            [
                (t_power(q, 1) if r == c and r < i else
                 exactfield.one(q) if r == c else zero(q))
                for c in range(n + 1)
            ]
            for r in range(n + 1)
        ]
        chain.append(rows)
    return pointed_cell(n, q, chain)


def cell_type(cell: PointedCell) -> tuple[int, ...]:
    """Successive quotient dimensions, ending with the wrap to t times the top."""
    dets = [sum(_diag_valuations(mat)) for mat in cell.lattices]
    dets.append(dets[0] + cell.n + 1)
    return tuple(dets[j + 1] - dets[j] for j in range(len(dets) - 1))


def cell_vertex(cell: PointedCell, idx: int) -> LatticeVertex:
    return vertex_from_rows(
        cell.n, cell.q, [list(row) for row in cell.lattices[idx]]
    )


def rotate_pointer(cell: PointedCell) -> PointedCell:
    """Move the distinguished lattice one step down the chain."""
    t_top = _scale_rows([list(r) for r in cell.lattices[0]], t_power(cell.q, 1))
    chain = [[list(r) for r in mat] for mat in cell.lattices[1:]] + [t_top]
    return pointed_cell(cell.n, cell.q, chain)


def _right_translate_cell(cell: PointedCell, m: Matrix) -> PointedCell:
    chain = [
        exactfield.mat_mul([list(r) for r in mat], m) for mat in cell.lattices
    ]
    return pointed_cell(cell.n, cell.q, chain)


def act(g: Matrix, obj):
    """Action of an invertible matrix: lattices transform by the inverse on
    the right (lattices are row spans)."""
    ginv = exactfield.mat_inverse(g)
    if isinstance(obj, LatticeVertex):
        rows = exactfield.mat_mul([list(r) for r in obj.matrix], ginv)
        return vertex_from_rows(obj.n, obj.q, rows)
    if isinstance(obj, PointedCell):
        return _right_translate_cell(obj, ginv)
    raise TypeError(f"cannot act on {type(obj).__name__}")


def _rref(q: int, vectors: list[KappaVector]) -> list[KappaVector]:
    """Reduced row echelon form over F_q, zero rows dropped."""
    work = [list(v) for v in vectors]
    cols = len(work[0]) if work else 0
    basis: list[list[int]] = []
    for c in range(cols):
        pivot = next((r for r in range(len(work)) if work[r][c] % q), None)
        if pivot is None:
            continue
        row = work.pop(pivot)
        inv = pow(row[c], -1, q)
        row = [(x * inv) % q for x in row]
        for other in work:
            if other[c] % q:
                f = other[c]
                for cc in range(cols):
                    other[cc] = (other[cc] - f * row[cc]) % q
        for other in basis:
            if other[c] % q:
                f = other[c]
                for cc in range(cols):
                    other[cc] = (other[cc] - f * row[cc]) % q
        basis.append(row)
    return [tuple(row) for row in basis]


def _rref_key(q: int, vectors: list[KappaVector]) -> tuple[KappaVector, ...]:
    return tuple(sorted(_rref(q, vectors)))


def _subspace_coordinate_matrices(q: int, d: int, b: int) -> list[list[KappaVector]]:
    """All b-dimensional subspaces of the coordinate space F_q^d, each given
    by its reduced echelon basis."""
    if not 0 <= b <= d:
        return []
    out: list[list[KappaVector]] = []
    for pivots in itertools.combinations(range(d), b):
        free_positions = [
            (r, c)
            for r in range(b)
            for c in range(pivots[r] + 1, d)
            if c not in pivots
        ]
        for values in itertools.product(range(q), repeat=len(free_positions)):
            rows = [[0] * d for _ in range(b)]
            for r in range(b):
                rows[r][pivots[r]] = 1
            for (r, c), val in zip(free_positions, values):
                rows[r][c] = val
            out.append([tuple(row) for row in rows])
    return out


def _quotient_basis(
    q: int, upper, lower, m: int
) -> list[KappaVector]:
    """Basis of (upper lattice)/(lower lattice) as residue vectors in the
    coordinates of the lower basis, for a quotient killed by t."""
    inv = exactfield.mat_inverse([list(row) for row in lower])
    coords = exactfield.mat_mul([list(row) for row in upper], inv)
    t = t_power(q, 1)
    vectors: list[KappaVector] = []
    for row in coords:
        scaled = [t * x for x in row]
        if any(valuation(x) < 0 for x in scaled):
            raise AssertionError("quotient is not killed by t")
        vectors.append(tuple(exactfield.reduce_mod_pi(x) for x in scaled))
    return _rref(q, vectors)


def _lift_subspace(
    q: int, lower, subspace: list[KappaVector], m: int
) -> list[list[RatFunc]]:
    """Rows generating the preimage lattice of a residue subspace."""
    rows = [[x for x in row] for row in lower]
    inv_t = t_power(q, -1)
    for vec in subspace:
        lifted = [zero(q) for _ in range(m)]
        for coeff, base_row in zip(vec, lower):
            if coeff:
                for c in range(m):
                    lifted[c] = lifted[c] + coeff * base_row[c]
        rows.append([x * inv_t for x in lifted])
    return rows


def hc3_set(cell: PointedCell, j: int) -> list[PointedCell]:
    """Replace link j by the preimages of the lines of its quotient.

    The quotient is lattice j over lattice j+1 (reading t times the top
    lattice past the end).  Each line of that quotient has a unique preimage
    lattice; the returned cells substitute it at position j.  When the
    quotient is itself a line the result is the singleton {cell}.
    """
    if not 0 <= j <= cell.k:
        raise ValueError(f"position {j} out of range 0..{cell.k}")
    q = cell.q
    m = cell.n + 1
    upper = cell.lattices[j]
    if j < cell.k:
        lower = cell.lattices[j + 1]
    else:
        lower = _freeze(_scale_rows([list(r) for r in cell.lattices[0]], t_power(q, 1)))
    basis = _quotient_basis(q, upper, lower, m)
    out = []
    for line in _subspace_coordinate_matrices(q, len(basis), 1):
        ambient = [
            tuple(
                sum(c * v[i] for c, v in zip(row, basis)) % q for i in range(m)
            )
            for row in line
        ]
        replacement = _lift_subspace(q, lower, ambient, m)
        chain = [[list(r) for r in mat] for mat in cell.lattices]
        chain[j] = replacement
        out.append(pointed_cell(cell.n, q, chain))
    return out


def hc2_set(
    eta: PointedCell,
    target_type: tuple[int, ...],
    ball: "Ball | None" = None,
) -> list[PointedCell]:
    """All pointed cells of the target type with ``eta`` as pointed face.

    The target type must refine the type of ``eta`` by splitting exactly one
    part in two; the returned cells insert one link realizing the split, in
    every admissible slot and with every possible quotient subspace.  With a
    ball given, only cells all of whose vertices lie inside it are returned
    (the enumeration is then restricted, not complete).
    """
    q = eta.q
    m = eta.n + 1
    eta_type = cell_type(eta)
    if len(target_type) != len(eta_type) + 1 or sum(target_type) != m:
        raise ValueError(f"type {target_type} does not refine {eta_type}")
    out: list[PointedCell] = []
    for slot in range(1, eta.k + 2):
        upper_part = target_type[slot - 1]
        lower_part = target_type[slot]
        if (
            tuple(target_type[: slot - 1]) != tuple(eta_type[: slot - 1])
            or tuple(target_type[slot + 1 :]) != tuple(eta_type[slot:])
            or upper_part + lower_part != eta_type[slot - 1]
            or upper_part < 1
            or lower_part < 1
        ):
            continue
        upper = eta.lattices[slot - 1]
        if slot - 1 < eta.k:
            lower = eta.lattices[slot]
        else:
            lower = _freeze(
                _scale_rows([list(r) for r in eta.lattices[0]], t_power(q, 1))
            )
        basis = _quotient_basis(q, upper, lower, m)
        for sub in _subspace_coordinate_matrices(q, len(basis), lower_part):
            ambient = [
                tuple(
                    sum(c * v[i] for c, v in zip(row, basis)) % q
                    for i in range(m)
                )
                for row in sub
            ]
            inserted = _lift_subspace(q, lower, ambient, m)
            chain = [[list(r) for r in mat] for mat in eta.lattices]
            chain.insert(slot, inserted)
            candidate = pointed_cell(eta.n, q, chain)
            if ball is not None and not all(
                cell_vertex(candidate, idx) in ball.distances
                for idx in range(candidate.k + 1)
            ):
                continue
            out.append(candidate)
    if len(set(out)) != len(out):
        raise AssertionError("insertion produced a duplicate cell")
    return out


@dataclass(frozen=True)
class Ball:
    """All vertices within a given gallery distance of a center vertex."""

    n: int
    q: int
    radius: int
    center: LatticeVertex
    distances: dict[LatticeVertex, int]
    adjacency: dict[LatticeVertex, tuple[LatticeVertex, ...]]


def vertex_neighbors(v: LatticeVertex) -> list[LatticeVertex]:
    """Classes of the lattices strictly between t times a representative and
    the representative itself."""
    q = v.q
    m = v.n + 1
    rows = [list(row) for row in v.matrix]
    out = []
    for d in range(1, m):
        for sub in _subspace_coordinate_matrices(q, m, d):
            gens = _scale_rows(rows, t_power(q, 1))
            for vec in sub:
                combo = [zero(q) for _ in range(m)]
                for coeff, base_row in zip(vec, rows):
                    if coeff:
                        for c in range(m):
                            combo[c] = combo[c] + coeff * base_row[c]
                gens.append(combo)
            out.append(vertex_from_rows(v.n, q, gens))
    return out


def ball(n: int, q: int, radius: int) -> Ball:
    """Breadth-first ball around the class of the unit lattice."""
    limit = BALL_RADIUS_LIMITS.get(n)
    if limit is None or radius > limit or radius < 0:
        raise ValueError(
            f"radius {radius} outside the supported range for size {n + 1} "
            f"(limits: {BALL_RADIUS_LIMITS})"
        )
    center = standard_vertex(n, q, 0)
    distances = {center: 0}
    frontier = [center]
    for step in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for nb in vertex_neighbors(v):
                if nb not in distances:
                    distances[nb] = step
                    nxt.append(nb)
        frontier = nxt
    adjacency = {
        v: tuple(nb for nb in vertex_neighbors(v) if nb in distances)
        for v in distances
    }
    return Ball(n, q, radius, center, distances, adjacency)


def verify_rotation_action(n: int, q: int) -> Report:
    """Check that scaled rotation matrices move the base point of the building.

    Vertex level: acting with the product of the step-i scaling matrix and
    the i-step rotation's permutation matrix sends the fundamental vertex
    to the i-th standard vertex.  Cell level: every pointed face of the
    fundamental chamber is that same action, for the pointer's index,
    applied to the standard cell of the cyclically displaced vertex set,
    pointed at the fundamental vertex.
    """
    instances = 0
    failures = 0
    witness = None

    def record(ok: bool, tag: object) -> None:
        nonlocal instances, failures, witness
        instances += 1
        if not ok:
            failures += 1
            if witness is None:
                witness = tag

    def mover(i: int) -> Matrix:
        return exactfield.mat_mul(
            exactfield.y_matrix(n, i, q),
            exactfield.permutation_matrix(n, coxeter.rotation_element(n, i), q),
        )

    def standard_rows(i: int) -> list[list[RatFunc]]:
        return [
            [
                (t_power(q, 1) if r == c and r < i else
                 exactfield.one(q) if r == c else zero(q))
                for c in range(n + 1)
            ]
            for r in range(n + 1)
        ]

    base = standard_vertex(n, q, 0)
    for i in range(n + 1):
        record(
            act(mover(i), base) == standard_vertex(n, q, i),
            {"fact": "vertex translation", "i": i},
        )

    scale = t_power(q, 1)
    for k in range(n + 1):
        for vertices in itertools.combinations(range(n + 1), k + 1):
            for j in range(k + 1):
                i_j = vertices[j]
                chain = [standard_rows(l) for l in vertices[j:]] + [
                    _scale_rows(standard_rows(l), scale) for l in vertices[:j]
                ]
                face = pointed_cell(n, q, chain)
                displaced = [
                    vertices[idx] - i_j for idx in range(j + 1, k + 1)
                ] + [n + 1 + vertices[idx] - i_j for idx in range(j)]
                displaced_subset = frozenset(range(1, n + 1)) - set(displaced)
                target = standard_cell(n, q, displaced_subset)
                record(
                    act(mover(i_j), target) == face,
                    {
                        "fact": "pointed face translation",
                        "vertices": list(vertices),
                        "j": j,
                    },
                )
    return make_report(
        "rotation_action", {"n": n, "q": q}, instances, failures, witness=witness
    )


def verify_parahoric_orbits(
    n: int,
    q: int,
    subset: frozenset[int] | set[int],
    j: int,
    sampler: Callable[[frozenset[int], Random], Matrix] | None = None,
    seed: int = 0,
    cap_factor: int = 50,
) -> Report:
    """Sampled transitivity of parahoric subgroups on two cell families.

    Two orbit computations share the report.  The face phase drops vertex
    i_j from the standard cell of the subset; the stabilizer of the bigger
    subset (with i_j added) must sweep the standard cell through every cell
    of that type having the dropped face.  The refinement phase replaces
    slot j of the standard chain by the preimages of the lines of its
    quotient; the stabilizer of the subset itself must sweep the standard
    cell of the swapped subset (i_j in, next gap minus one out) through
    that whole family.

    Sampled integral matrices reducing into the respective parabolics act
    on the growing orbits.  Every translate must stay inside its target (a
    failure there is a hard counterexample).  The check passes only when
    both orbits fill their targets; hitting an application cap first yields
    an inconclusive report, never a pass.  A custom ``sampler`` receives
    the stabilizer subset and the generator.
    """
    comp = indexsets.complement_tuple(n, subset)
    if not 1 <= j <= len(comp):
        raise ValueError(f"position {j} out of range 1..{len(comp)}")
    subset = frozenset(subset)
    i_j = comp[j - 1]
    next_gap = comp[j] if j < len(comp) else n + 1
    face_subset = indexsets.modified_set(subset, set(), {i_j})
    eta = standard_cell(n, q, face_subset)
    start = standard_cell(n, q, subset)
    swapped = (subset | {i_j}) - {next_gap - 1}
    phases = [
        ("face set", set(hc2_set(eta, cell_type(start), None)), start, face_subset),
        ("refinement set", set(hc3_set(start, j)), standard_cell(n, q, swapped), subset),
    ]
    rng = Random(seed)
    if sampler is None:
        def sampler(stab: frozenset[int], r: Random) -> Matrix:
            return cells_mod.random_parahoric_element(n, q, stab, r)
    checks = 0
    failures = 0
    witness = None
    status = None
    extra: dict[str, object] = {}
    for label, target, seed_cell, stab in phases:
        key = label.split()[0]
        checks += 1
        if seed_cell not in target:
            failures += 1
            witness = {"fact": f"starting cell missing from the {label}", "j": j}
            break
        orbit = {seed_cell}
        pool = [seed_cell]
        cap = cap_factor * len(target)
        used = 0
        while orbit != target and used < cap and witness is None:
            g = sampler(stab, rng)
            source = pool[rng.randrange(len(pool))]
            moved = _right_translate_cell(source, g)
            used += 1
            if moved not in target:
                failures += 1
                witness = {
                    "fact": f"translate left the {label}",
                    "subset": sorted(subset),
                    "j": j,
                    "application": used,
                }
                break
            if moved not in orbit:
                orbit.add(moved)
                pool.append(moved)
        checks += used
        extra[f"{key}_orbit"] = len(orbit)
        extra[f"{key}_target"] = len(target)
        if witness is not None:
            break
        if orbit != target:
            status = "inconclusive"
            break
    return make_report(
        "parahoric_orbits",
        {"n": n, "q": q, "subset": sorted(subset), "j": j, "seed": seed},
        checks,
        failures,
        witness=witness,
        status=status,
        extra=extra,
    )

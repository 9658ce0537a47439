"""Cell structure of the general linear group: residue-field side and field side.

Over the residue field F_q the whole group is enumerated (sizes up to a
few tens of thousands), standard parabolic subgroups are filtered out of
it, and double cosets are built as explicit element sets by closing a seed
matrix under generator multiplication.  That makes partition statements
("these cells are disjoint and cover the group") checkable by exact set
arithmetic on integer-coded matrices.

Over the rational function field the module computes the triangular-times-
permutation normal form of an invertible matrix: g = b P(w) p with b in
the standard compact open subgroup whose reduction is upper triangular,
P(w) a permutation matrix, and p upper triangular.  The permutation w is
the double-coset invariant the downstream building layer keys on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from random import Random

import numpy as np

from . import coxeter, exactfield, indexsets
from .coxeter import WeylElement
from .exactfield import Matrix, RatFunc, valuation
from .report import Report, make_report

MAX_CANDIDATES = 2_200_000

_PRIMITIVE_ROOT = {2: 1, 3: 2, 5: 2, 7: 3}

_GROUP_CACHE: dict[tuple[int, int], "GroupTable"] = {}
_CELL_CACHE: dict[tuple[int, int], dict[WeylElement, np.ndarray]] = {}


@dataclass(frozen=True)
class GroupTable:
    """All invertible matrices of one size over F_q, sorted by integer code."""

    n: int
    q: int
    codes: np.ndarray
    mats: np.ndarray

    def __len__(self) -> int:
        return int(self.codes.size)


def _powers(q: int, m: int) -> np.ndarray:
    return q ** np.arange(m * m, dtype=np.int64)


def _encode(mats: np.ndarray, q: int) -> np.ndarray:
    m = mats.shape[-1]
    flat = mats.reshape(-1, m * m).astype(np.int64)
    return flat @ _powers(q, m)


def _decode(codes: np.ndarray, q: int, m: int) -> np.ndarray:
    digits = (codes[:, None] // _powers(q, m)[None, :]) % q
    return digits.reshape(-1, m, m).astype(np.int64)


def _det_mod(mats: np.ndarray, q: int) -> np.ndarray:
    m = mats.shape[-1]
    total = np.zeros(mats.shape[0], dtype=np.int64)
    for perm in itertools.permutations(range(m)):
        sign = 1
        for x in range(m):
            for y in range(x + 1, m):
                if perm[x] > perm[y]:
                    sign = -sign
        term = np.ones(mats.shape[0], dtype=np.int64)
        for r in range(m):
            term = term * mats[:, r, perm[r]]
        total += sign * term
    return total % q


def group_order(n: int, q: int) -> int:
    m = n + 1
    order = 1
    for i in range(m):
        order *= q**m - q**i
    return order


def borel_order(n: int, q: int) -> int:
    m = n + 1
    return (q - 1) ** m * q ** (m * (m - 1) // 2)


def enumerate_group(n: int, q: int) -> GroupTable:
    """Every invertible matrix over F_q, as a code-sorted table."""
    key = (n, q)
    if key in _GROUP_CACHE:
        return _GROUP_CACHE[key]
    if q not in _PRIMITIVE_ROOT:
        raise ValueError(f"unsupported prime {q}")
    m = n + 1
    candidates = q ** (m * m)
    if candidates > MAX_CANDIDATES:
        raise ValueError(
            f"enumerating size {m} over F_{q} needs {candidates} candidates; "
            "beyond the supported desk scale"
        )
    codes = np.arange(candidates, dtype=np.int64)
    mats = _decode(codes, q, m)
    keep = _det_mod(mats, q) != 0
    table = GroupTable(n, q, codes[keep], mats[keep])
    if len(table) != group_order(n, q):
        raise AssertionError("group enumeration does not match the order formula")
    _GROUP_CACHE[key] = table
    return table


def _below_allowed(n: int, subset: frozenset[int] | set[int], r: int, c: int) -> bool:
    """May position (r, c), 0-based with r > c, be nonzero in the parabolic."""
    return all(i in subset for i in range(c + 1, r + 1))


def parabolic_kappa(
    n: int, q: int, subset: frozenset[int] | set[int]
) -> GroupTable:
    """The standard parabolic subgroup over F_q for a set of generator indices.

    Contains exactly the invertible matrices whose entry at (r, c) below the
    diagonal vanishes unless all generator indices c+1..r (1-based rows and
    columns: c..r-1) lie in the set.
    """
    if any(not 1 <= i <= n for i in subset):
        raise ValueError(f"generator set {sorted(subset)} not within 1..{n}")
    table = enumerate_group(n, q)
    m = n + 1
    keep = np.ones(len(table), dtype=bool)
    for r in range(m):
        for c in range(r):
            if not _below_allowed(n, subset, r, c):
                keep &= table.mats[:, r, c] == 0
    return GroupTable(n, q, table.codes[keep], table.mats[keep])


def _parabolic_generators(
    n: int, q: int, subset: frozenset[int] | set[int]
) -> list[np.ndarray]:
    """Matrices generating the standard parabolic: torus scalings, the
    elementary matrices above the diagonal, and one step below the diagonal
    for each generator index in the set."""
    m = n + 1
    gens: list[np.ndarray] = []
    root = _PRIMITIVE_ROOT[q]
    if root != 1:
        for d in range(m):
            g = np.eye(m, dtype=np.int64)
            g[d, d] = root
            gens.append(g)
    for r in range(m):
        for c in range(r + 1, m):
            g = np.eye(m, dtype=np.int64)
            g[r, c] = 1
            gens.append(g)
    for i in sorted(subset):
        g = np.eye(m, dtype=np.int64)
        g[i, i - 1] = 1
        gens.append(g)
    return gens


def _closure(
    q: int,
    seeds: np.ndarray,
    left_gens: list[np.ndarray],
    right_gens: list[np.ndarray],
) -> np.ndarray:
    """Codes of {l s r}: close seed matrices under the generator actions."""
    m = seeds.shape[-1]
    known = np.unique(_encode(seeds, q))
    frontier = _decode(known, q, m)
    while frontier.size:
        batches = []
        for g in left_gens:
            batches.append(np.matmul(g, frontier) % q)
        for g in right_gens:
            batches.append(np.matmul(frontier, g) % q)
        if not batches:
            break
        codes = _encode(np.concatenate(batches), q)
        fresh = np.setdiff1d(codes, known)
        known = np.union1d(known, fresh)
        frontier = _decode(fresh, q, m)
    return known


def _perm_mat_kappa(w: WeylElement) -> np.ndarray:
    m = w.n + 1
    out = np.zeros((1, m, m), dtype=np.int64)
    for c in range(1, m + 1):
        out[0, coxeter.apply(w, c) - 1, c - 1] = 1
    return out


def bruhat_cells(n: int, q: int) -> dict[WeylElement, np.ndarray]:
    """Codes of the double coset B P(w) B for every w, B upper triangular."""
    key = (n, q)
    if key in _CELL_CACHE:
        return _CELL_CACHE[key]
    gens = _parabolic_generators(n, q, frozenset())
    cells = {
        w: _closure(q, _perm_mat_kappa(w), gens, gens)
        for w in coxeter.all_elements(n)
    }
    _CELL_CACHE[key] = cells
    return cells


def _rank_mod(q: int, rows: list[list[int]]) -> int:
    work = [row[:] for row in rows]
    rank = 0
    cols = len(work[0]) if work else 0
    row_at = 0
    for c in range(cols):
        pivot = next((r for r in range(row_at, len(work)) if work[r][c] % q), None)
        if pivot is None:
            continue
        work[row_at], work[pivot] = work[pivot], work[row_at]
        inv = pow(work[row_at][c], -1, q)
        work[row_at] = [(x * inv) % q for x in work[row_at]]
        for r in range(len(work)):
            if r != row_at and work[r][c] % q:
                f = work[r][c]
                work[r] = [(x - f * y) % q for x, y in zip(work[r], work[row_at])]
        row_at += 1
        rank += 1
    return rank


def bruhat_class_kappa(n: int, q: int, mat) -> WeylElement:
    """The permutation attached to an invertible matrix over F_q.

    Defined through the ranks of the southwest corners: with r(i, j) the
    rank of rows i..m and columns 1..j, the permutation sends j to the
    unique i where the second difference of r jumps.  This is invariant
    under upper triangular row and column operations.
    """
    m = n + 1
    rows = [[int(x) % q for x in row] for row in mat]
    if len(rows) != m or any(len(row) != m for row in rows):
        raise ValueError("matrix size does not match the rank")
    r = [[0] * (m + 1) for _ in range(m + 2)]
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            r[i][j] = _rank_mod(q, [row[:j] for row in rows[i - 1 :]])
    perm = [0] * m
    for j in range(1, m + 1):
        hits = [
            i
            for i in range(1, m + 1)
            if r[i][j] - r[i + 1][j] - r[i][j - 1] + r[i + 1][j - 1] == 1
        ]
        if len(hits) != 1:
            raise AssertionError("corner ranks do not single out one row")
        perm[j - 1] = hits[0]
    out = [0] * m
    for j, i in enumerate(perm, start=1):
        out[j - 1] = i
    return WeylElement(n, tuple(out))


def _bruhat_class_by_elimination(n: int, q: int, mat) -> WeylElement:
    """Fast classifier: eliminate left to right, always pivoting on the
    lowest remaining row with a nonzero entry."""
    m = n + 1
    work = [[int(x) % q for x in row] for row in mat]
    free = set(range(m))
    perm = [0] * m
    for j in range(m):
        pivot = max(r for r in free if work[r][j])
        perm[j] = pivot + 1
        inv = pow(work[pivot][j], -1, q)
        for r in free:
            if r != pivot and work[r][j]:
                f = (work[r][j] * inv) % q
                work[r] = [(x - f * y) % q for x, y in zip(work[r], work[pivot])]
        free.remove(pivot)
    return WeylElement(n, tuple(perm))


def verify_bruhat_bijection(
    n: int, q: int, left_set: frozenset[int] | set[int],
    right_set: frozenset[int] | set[int],
) -> Report:
    """Check the cell decomposition over F_q for one pair of parabolics.

    Verified facts:

    - the subgroup-pair double cosets, one per permutation double coset and
      built by closing the permutation matrix of its shortest element,
      partition the group;
    - each equals the union of the plain triangular-pair cells of the
      permutations in its double coset, and has size
      sum over those permutations of q^length times the triangular order;
    - the corner-rank classifier and the elimination classifier agree with
      the closure cells (elimination on every element, corner ranks on all
      elements of small groups, otherwise on a fixed sample of 200).
    """
    table = enumerate_group(n, q)
    cells = bruhat_cells(n, q)
    b_order = borel_order(n, q)
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

    all_cell_codes = np.concatenate(list(cells.values()))
    record(
        all_cell_codes.size == len(table)
        and np.array_equal(np.unique(all_cell_codes), table.codes),
        {"fact": "triangular cells partition the group"},
    )
    for w, codes in cells.items():
        record(
            codes.size == q ** coxeter.length(w) * b_order,
            {"fact": "cell size", "perm": w.perm, "size": int(codes.size)},
        )

    code_to_perm: dict[int, WeylElement] = {}
    for w, codes in cells.items():
        for code in codes.tolist():
            code_to_perm[code] = w
    for idx in range(len(table)):
        mat = table.mats[idx]
        expected = code_to_perm[int(table.codes[idx])]
        record(
            _bruhat_class_by_elimination(n, q, mat) == expected,
            {"fact": "elimination classifier", "code": int(table.codes[idx])},
        )
    if len(table) <= 2000:
        sample_idx = range(len(table))
    else:
        rng = Random(0)
        sample_idx = sorted(rng.sample(range(len(table)), 200))
    for idx in sample_idx:
        mat = table.mats[idx]
        expected = code_to_perm[int(table.codes[idx])]
        record(
            bruhat_class_kappa(n, q, mat) == expected,
            {"fact": "corner-rank classifier", "code": int(table.codes[idx])},
        )

    left_gens = _parabolic_generators(n, q, left_set)
    right_gens = _parabolic_generators(n, q, right_set)
    union_codes: list[np.ndarray] = []
    for coset in coxeter.double_cosets(n, left_set, right_set):
        rep = coxeter.minimal_representative(coset)
        prod = _closure(q, _perm_mat_kappa(rep), left_gens, right_gens)
        expected_codes = np.unique(
            np.concatenate([cells[w] for w in coset])
        )
        record(
            np.array_equal(prod, expected_codes),
            {"fact": "double coset equals cell union", "rep": rep.perm},
        )
        expected_size = sum(q ** coxeter.length(w) for w in coset) * b_order
        record(
            prod.size == expected_size,
            {"fact": "double coset size", "rep": rep.perm,
             "size": int(prod.size), "expected": expected_size},
        )
        union_codes.append(prod)
    merged = np.concatenate(union_codes)
    record(
        merged.size == len(table)
        and np.array_equal(np.unique(merged), table.codes),
        {"fact": "double cosets partition the group"},
    )

    return make_report(
        "bruhat_bijection",
        {"n": n, "q": q, "left": sorted(left_set), "right": sorted(right_set)},
        instances,
        failures,
        witness=witness,
    )


def verify_commuting_parahoric_products(
    n: int, q: int, set1: frozenset[int] | set[int], set2: frozenset[int] | set[int]
) -> Report:
    """For generator sets pairwise at distance two or more: the parabolic of
    the union is the product of the two parabolics, in either order.  Also
    records that multiplying by the triangular subgroup on either side of a
    parabolic changes nothing."""
    if any(abs(i - j) < 2 for i in set1 for j in set2):
        raise ValueError("generator sets must be pairwise at distance >= 2")
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

    p1 = parabolic_kappa(n, q, set1)
    p2 = parabolic_kappa(n, q, set2)
    union_table = parabolic_kappa(n, q, frozenset(set1) | frozenset(set2))
    prod12 = _closure(q, p2.mats, _parabolic_generators(n, q, set1), [])
    prod21 = _closure(q, p1.mats, _parabolic_generators(n, q, set2), [])
    record(
        np.array_equal(prod12, union_table.codes),
        {"fact": "product equals union parabolic", "order": "12"},
    )
    record(
        np.array_equal(prod21, union_table.codes),
        {"fact": "product equals union parabolic", "order": "21"},
    )
    sizes = {}
    for name, subset in (("first", set1), ("second", set2)):
        ptab = parabolic_kappa(n, q, subset)
        left = _closure(q, ptab.mats, _parabolic_generators(n, q, frozenset()), [])
        right = _closure(q, ptab.mats, [], _parabolic_generators(n, q, frozenset()))
        record(
            np.array_equal(left, ptab.codes) and np.array_equal(right, ptab.codes),
            {"fact": "triangular absorption", "side": name},
        )
        sizes[name] = len(ptab)
    return make_report(
        "commuting_parahoric_products",
        {"n": n, "q": q, "set1": sorted(set1), "set2": sorted(set2)},
        instances,
        failures,
        witness=witness,
        extra={"sizes": {**sizes, "union": len(union_table)}},
    )


def parahoric_product_kappa(
    n: int, q: int, k: int, subset: frozenset[int] | set[int]
) -> np.ndarray:
    """Codes of the residue-field product set attached to a subset.

    With complement i_1 < ... < i_k, this is the product of the parabolic
    subgroups for the generator intervals i_t + 1 .. n - k + t, taken with
    t = k leftmost, times the parabolic of {1, ..., n-k}."""
    comp = indexsets.complement_tuple(n, subset)
    if len(comp) != k or k < 1:
        raise ValueError(f"complement of {sorted(subset)} must have k={k} >= 1 entries")
    current = parabolic_kappa(n, q, indexsets.jk_set(n, k)).mats
    codes = np.unique(_encode(current, q))
    for t in range(1, k + 1):
        interval = frozenset(range(comp[t - 1] + 1, n - k + t + 1))
        gens = _parabolic_generators(n, q, interval)
        codes = _closure(q, _decode(codes, q, n + 1), gens, [])
    return codes


def verify_product_cell_decomposition(
    n: int, q: int, k: int, subset: frozenset[int] | set[int]
) -> Report:
    """Check that the residue-field product set splits into the predicted cells.

    The product set must be exactly the disjoint union, over the members r
    of the distinguished box, of the sets  B P(w(r)) P_J  with w(r) the
    staggered word of r and J = {1, ..., n-k}; each piece's size must be
    the sum of q^length over the coset w(r) W_J times the triangular order.
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

    product_codes = parahoric_product_kappa(n, q, k, subset)
    box = indexsets.cell_box(n, k, subset)
    jset = indexsets.jk_set(n, k)
    jsub = coxeter.parabolic_subgroup(n, jset)
    borel_gens = _parabolic_generators(n, q, frozenset())
    j_gens = _parabolic_generators(n, q, jset)
    b_order = borel_order(n, q)
    pieces: list[np.ndarray] = []
    seen_cosets: set[WeylElement] = set()
    for r in indexsets.box_elements(box):
        w = indexsets.tuple_to_weyl(n, k, r)
        rep = indexsets.coset_representative(w, jsub)
        record(
            rep not in seen_cosets,
            {"fact": "box tuples give distinct cosets", "r": list(r)},
        )
        seen_cosets.add(rep)
        piece = _closure(q, _perm_mat_kappa(w), borel_gens, j_gens)
        coset_elements = {coxeter.multiply(w, u) for u in jsub}
        expected_size = sum(q ** coxeter.length(x) for x in coset_elements) * b_order
        record(
            piece.size == expected_size,
            {"fact": "piece size", "r": list(r), "size": int(piece.size),
             "expected": expected_size},
        )
        pieces.append(piece)
    merged = np.concatenate(pieces) if pieces else np.array([], dtype=np.int64)
    record(
        merged.size == np.unique(merged).size,
        {"fact": "pieces are pairwise disjoint"},
    )
    record(
        np.array_equal(np.unique(merged), product_codes),
        {"fact": "pieces cover the product set",
         "product_size": int(product_codes.size), "piece_total": int(merged.size)},
    )
    return make_report(
        "product_cell_decomposition",
        {"n": n, "q": q, "k": k, "subset": sorted(subset)},
        instances,
        failures,
        witness=witness,
        extra={"product_size": int(product_codes.size)},
    )


@dataclass
class IwasawaFactorization:
    """g = left * P(w) * right with integral left (triangular mod t) and
    upper triangular right."""

    n: int
    q: int
    w: WeylElement
    left: Matrix
    right: Matrix


def is_iwahori(mat: Matrix) -> bool:
    """Integral, diagonal units, below-diagonal entries divisible by t."""
    size = len(mat)
    for r in range(size):
        for c in range(size):
            v = valuation(mat[r][c])
            if v < 0:
                return False
            if r == c and v != 0:
                return False
            if r > c and v < 1:
                return False
    return True


def is_upper_triangular_invertible(mat: Matrix) -> bool:
    size = len(mat)
    return all(
        not mat[r][c] for r in range(size) for c in range(r)
    ) and all(bool(mat[d][d]) for d in range(size))


def iwasawa_class(g: Matrix, check: bool = True) -> IwasawaFactorization:
    """Factor an invertible matrix over the rational function field.

    Column by column, the entry of minimal t-adic valuation among the rows
    not yet used (lowest such row on ties) becomes a pivot: other rows are
    cleared by row operations whose multipliers are integral, and integral
    below the diagonal, precisely because of that pivot rule; the pivot row
    is then scaled and swept to the right by column operations.  Row
    operations accumulate into the left factor, column operations into the
    right factor, keeping  g = left * current * right  at every step.
    """
    size = len(g)
    n = size - 1
    q = g[0][0].q
    cur = exactfield.mat_copy(g)
    left = exactfield.mat_identity(size, q)
    right = exactfield.mat_identity(size, q)
    free = set(range(size))
    perm = [0] * size
    for j in range(size):
        candidates = [(valuation(cur[r][j]), -r) for r in free if cur[r][j]]
        if not candidates:
            raise ValueError("matrix is singular")
        _, neg_r = min(candidates)
        i = -neg_r
        perm[j] = i + 1
        pivot = cur[i][j]
        for r in free:
            if r != i and cur[r][j]:
                factor = cur[r][j] / pivot
                # row r of cur gains -factor * row i; left gains the inverse
                for c in range(size):
                    cur[r][c] = cur[r][c] - factor * cur[i][c]
                for rr in range(size):
                    left[rr][i] = left[rr][i] + factor * left[rr][r]
        inv_pivot = exactfield.one(q) / pivot
        for r in range(size):
            cur[r][j] = cur[r][j] * inv_pivot
        for c in range(size):
            right[j][c] = pivot * right[j][c]
        # the pivot row is already clear left of j, so only columns past j
        # need sweeping and every column operation stays upper triangular
        for c in range(j + 1, size):
            if cur[i][c]:
                factor = cur[i][c]
                for r in range(size):
                    cur[r][c] = cur[r][c] - factor * cur[r][j]
                for cc in range(size):
                    right[j][cc] = right[j][cc] + factor * right[c][cc]
        free.remove(i)
    w = WeylElement(n, tuple(perm))
    out = IwasawaFactorization(n, q, w, left, right)
    if check:
        if not is_iwahori(left):
            raise AssertionError("left factor is not triangular modulo t")
        if not is_upper_triangular_invertible(right):
            raise AssertionError("right factor is not upper triangular")
        recon = exactfield.mat_mul(
            left, exactfield.mat_mul(exactfield.permutation_matrix(n, w, q), right)
        )
        if not exactfield.mat_equal(recon, g):
            raise AssertionError("factorization does not reconstruct the input")
    return out


# -- fast permutation extraction ---------------------------------------------
#
# The permutation produced by iwasawa_class depends only on how the rows not
# yet used as pivots evolve: the column scalings and the rightward sweep of a
# finished pivot row never touch an unused row (its entry in the pivot column
# is already zero).  Those row dynamics survive rescaling each row by any
# nonzero scalar provided the rescaling's valuation is remembered, because
# pivot selection compares valuations only.  So the extraction can run
# fraction-free on polynomial rows: clear each row's denominators once,
# record the cleared factor's valuation as that row's debt, and replace the
# dividing row operation  row_r -= (a/p) row_i  by  row_r := p row_r - a row_i,
# which adds the stored pivot's valuation to the debt of row r.  Polynomials
# live in numpy coefficient arrays, ascending powers, entries reduced mod q.


def _poly_lcm(q: int, polys: list) -> tuple[int, ...]:
    acc: tuple[int, ...] = (1,)
    for p in polys:
        g = exactfield.poly_gcd(q, acc, p)
        acc = exactfield.poly_mul(q, acc, exactfield.poly_divmod(q, p, g)[0])
    return acc


_NP_ZERO = np.zeros(1, dtype=np.int64)


def _np_order(a: np.ndarray) -> int | None:
    nz = np.flatnonzero(a)
    return int(nz[0]) if nz.size else None


def _perm_from_cleared(
    q: int, rows: list[list[np.ndarray]], debts: list[int]
) -> WeylElement:
    """Run the pivot dynamics on debt-tracked polynomial rows."""
    m = len(rows)
    free = list(range(m))
    perm = [0] * m
    for j in range(m):
        best_key = None
        best_r = -1
        for r in free:
            o = _np_order(rows[r][j])
            if o is None:
                continue
            key = (o - debts[r], -r)
            if best_key is None or key < best_key:
                best_key = key
                best_r = r
        if best_r < 0:
            raise ValueError("matrix is singular")
        i = best_r
        perm[j] = i + 1
        free.remove(i)
        pivot = rows[i][j]
        pivot_val = _np_order(pivot)
        for r in free:
            if _np_order(rows[r][j]) is None:
                continue
            coef = rows[r][j]
            for c in range(j + 1, m):
                a = np.convolve(pivot, rows[r][c])
                b = np.convolve(coef, rows[i][c])
                if a.size < b.size:
                    a = np.concatenate([a, np.zeros(b.size - a.size, np.int64)])
                elif b.size < a.size:
                    b = np.concatenate([b, np.zeros(a.size - b.size, np.int64)])
                rows[r][c] = (a - b) % q
            rows[r][j] = _NP_ZERO
            debts[r] += pivot_val
    return WeylElement(m - 1, tuple(perm))


def iwasawa_permutation(g: Matrix) -> WeylElement:
    """The permutation part of the normal form, without the factor matrices.

    Agrees with ``iwasawa_class(g).w`` entry for entry (same pivot rule,
    same tie break) but stays in polynomial arithmetic throughout, which
    makes large sampled sweeps affordable.
    """
    q = g[0][0].q
    m = len(g)
    rows: list[list[np.ndarray]] = []
    debts: list[int] = []
    for r in range(m):
        dens = [g[r][c].den for c in range(m)]
        common = _poly_lcm(q, dens)
        row = []
        for c in range(m):
            cof = exactfield.poly_divmod(q, common, dens[c])[0]
            s = exactfield.poly_mul(q, g[r][c].num, cof)
            row.append(np.array(s, dtype=np.int64) if s else _NP_ZERO)
        rows.append(row)
        debts.append(exactfield.poly_order(common))
    return _perm_from_cleared(q, rows, debts)


def _cleared_matrix(g: Matrix) -> tuple[np.ndarray, int]:
    """All denominators cleared at once: S with g = t^{-debt} unit^{-1} S.

    Returns a (size, size, length) coefficient array and the valuation of
    the single clearing polynomial.  A uniform debt keeps the cleared form
    usable after mixing rows, which per-row clearing would not allow.
    """
    q = g[0][0].q
    m = len(g)
    common = _poly_lcm(q, [g[r][c].den for r in range(m) for c in range(m)])
    entries = []
    longest = 1
    for r in range(m):
        row = []
        for c in range(m):
            cof = exactfield.poly_divmod(q, common, g[r][c].den)[0]
            s = exactfield.poly_mul(q, g[r][c].num, cof)
            row.append(s)
            longest = max(longest, len(s))
        entries.append(row)
    S = np.zeros((m, m, longest), dtype=np.int64)
    for r in range(m):
        for c in range(m):
            if entries[r][c]:
                S[r, c, : len(entries[r][c])] = entries[r][c]
    return S, exactfield.poly_order(common)


def _perm_from_packed(q: int, S: np.ndarray, debt: int) -> WeylElement:
    m = S.shape[0]
    rows = [[S[r, c] for c in range(m)] for r in range(m)]
    return _perm_from_cleared(q, rows, [debt] * m)


def _left_layer_product(q: int, layers: list[np.ndarray], S: np.ndarray) -> np.ndarray:
    """(sum_i t^i layers[i]) times S, for constant coefficient matrices."""
    m, _, depth = S.shape
    out = np.zeros((m, m, depth + len(layers) - 1), dtype=np.int64)
    for i, lay in enumerate(layers):
        if lay.any():
            out[:, :, i : i + depth] += np.einsum("rm,mcd->rcd", lay, S)
    return out % q


def _right_layer_product(q: int, S: np.ndarray, layers: list[np.ndarray]) -> np.ndarray:
    m, _, depth = S.shape
    out = np.zeros((m, m, depth + len(layers) - 1), dtype=np.int64)
    for i, lay in enumerate(layers):
        if lay.any():
            out[:, :, i : i + depth] += np.einsum("rmd,mc->rcd", S, lay)
    return out % q


def _shift_columns(S: np.ndarray, shifts: list[int]) -> np.ndarray:
    m, _, depth = S.shape
    extra = max(shifts)
    if extra == 0:
        return S
    out = np.zeros((m, m, depth + extra), dtype=np.int64)
    for c, e in enumerate(shifts):
        out[:, c, e : e + depth] = S[:, c, :]
    return out


def _random_matrix_layers(n: int, q: int, rng: Random, count: int) -> list[np.ndarray]:
    m = n + 1
    return [
        np.array([[rng.randrange(q) for _ in range(m)] for _ in range(m)], np.int64)
        for _ in range(count)
    ]


def _random_iwahori_layers(n: int, q: int, rng: Random) -> list[np.ndarray]:
    """Constant upper triangular with unit diagonal, plus t times a degree
    two integral matrix: an element of the triangular-mod-t subgroup."""
    m = n + 1
    base = np.zeros((m, m), dtype=np.int64)
    for r in range(m):
        base[r, r] = rng.randrange(1, q)
        for c in range(r + 1, m):
            base[r, c] = rng.randrange(q)
    return [base] + _random_matrix_layers(n, q, rng, 3)


def _random_upper_layers(
    n: int, q: int, rng: Random
) -> tuple[list[np.ndarray], list[int], int]:
    """An invertible upper triangular matrix over the field, presented as
    t^{-1} (U0 + t U1) diag(t^{e_c}) with e_c in 0..2, so diagonal
    valuations range over -1..1."""
    m = n + 1
    u0 = np.zeros((m, m), dtype=np.int64)
    u1 = np.zeros((m, m), dtype=np.int64)
    for r in range(m):
        u0[r, r] = rng.randrange(1, q)
        u1[r, r] = rng.randrange(q)
        for c in range(r + 1, m):
            u0[r, c] = rng.randrange(q)
            u1[r, c] = rng.randrange(q)
    shifts = [rng.randrange(3) for _ in range(m)]
    return [u0, u1], shifts, 1


def _random_parahoric_layers(
    n: int, q: int, subset: frozenset[int] | set[int], rng: Random
) -> list[np.ndarray]:
    """Layer form of random_parahoric_element: a residue-field parabolic
    pick as the constant layer, then t times degree two noise."""
    table = parabolic_kappa(n, q, subset)
    pick = np.array(table.mats[rng.randrange(len(table))], dtype=np.int64)
    return [pick] + _random_matrix_layers(n, q, rng, 3)


def verify_iwasawa_normal_form_sampled(
    n: int,
    q: int,
    samples: int = 100,
    perturbations: int = 10,
    seed: int = 0,
) -> list[Report]:
    """Sampled checks of the triangular-permutation-triangular normal form.

    Two reports.  First: every sampled invertible matrix factors with the
    left factor triangular mod t, the right factor upper triangular, the
    product reconstructing the input exactly, and the fast permutation
    extraction agreeing with the full factorization.  Second: the
    permutation is unchanged under multiplying on the left by sampled
    elements of the triangular-mod-t subgroup and on the right by sampled
    invertible upper triangular matrices.
    """
    rng = Random(seed)
    recon_fail = 0
    recon_witness = None
    stable_instances = 0
    stable_fail = 0
    stable_witness = None
    for s in range(samples):
        g = exactfield.random_invertible_matrix(n, q, rng)
        try:
            fac = iwasawa_class(g, check=True)
        except AssertionError as exc:
            recon_fail += 1
            if recon_witness is None:
                recon_witness = {"sample": s, "reason": str(exc)}
            continue
        if iwasawa_permutation(g) != fac.w:
            recon_fail += 1
            if recon_witness is None:
                recon_witness = {
                    "sample": s,
                    "reason": "fast extraction disagrees with factorization",
                }
            continue
        S, debt = _cleared_matrix(g)
        for p in range(perturbations):
            left = _random_iwahori_layers(n, q, rng)
            right, shifts, denom_power = _random_upper_layers(n, q, rng)
            moved = _shift_columns(
                _right_layer_product(q, _left_layer_product(q, left, S), right),
                shifts,
            )
            stable_instances += 1
            got = _perm_from_packed(q, moved, debt + denom_power)
            if got != fac.w:
                stable_fail += 1
                if stable_witness is None:
                    stable_witness = {
                        "sample": s,
                        "perturbation": p,
                        "expected": list(fac.w.perm),
                        "got": list(got.perm),
                    }
    recon = make_report(
        "iwasawa_reconstruction",
        {"n": n, "q": q, "samples": samples, "seed": seed},
        samples,
        recon_fail,
        witness=recon_witness,
    )
    stable = make_report(
        "iwasawa_perturbation_stability",
        {
            "n": n,
            "q": q,
            "samples": samples,
            "perturbations": perturbations,
            "seed": seed,
        },
        stable_instances,
        stable_fail,
        witness=stable_witness,
    )
    return [recon, stable]


def random_parahoric_element(
    n: int, q: int, subset: frozenset[int] | set[int], rng: Random
) -> Matrix:
    """A sampled integral matrix whose reduction lies in the parabolic:
    a lifted residue-field parabolic element plus t times an integral one."""
    table = parabolic_kappa(n, q, subset)
    pick = table.mats[rng.randrange(len(table))]
    base = exactfield.mat_from_rows(q, pick.tolist())
    noise = exactfield.random_integral_matrix(n, q, rng)
    t = exactfield.t_power(q, 1)
    return [
        [base[r][c] + t * noise[r][c] for c in range(n + 1)] for r in range(n + 1)
    ]


def _random_field_parabolic_layers(
    n: int, q: int, subset: frozenset[int] | set[int], rng: Random
) -> tuple[list[np.ndarray], list[int], int]:
    """An element of the block upper triangular subgroup over the field.

    The generator subset fixes the block pattern (positions j and j+1 share
    a block exactly when j is in the subset).  Sampled in the presentation
    t^{-1} (B0 + t B1) diag(t^{e_c}): B0 block upper with invertible
    diagonal blocks over F_q, B1 supported on the same pattern, e_c in 0..2.
    """
    m = n + 1
    block = [0] * m
    for j in range(1, m):
        block[j] = block[j - 1] + (0 if j in subset else 1)
    b0 = np.zeros((m, m), dtype=np.int64)
    b1 = np.zeros((m, m), dtype=np.int64)
    for r in range(m):
        for c in range(m):
            if block[r] < block[c] or (block[r] == block[c] and r != c):
                b0[r, c] = rng.randrange(q)
            if block[r] <= block[c]:
                b1[r, c] = rng.randrange(q)
    for b in range(block[m - 1] + 1):
        idx = [j for j in range(m) if block[j] == b]
        while True:
            pick = np.array(
                [[rng.randrange(q) for _ in idx] for _ in idx], dtype=np.int64
            )
            if _det_mod(pick[np.newaxis], q)[0] != 0:
                break
        b0[np.ix_(idx, idx)] = pick
    shifts = [rng.randrange(3) for _ in range(m)]
    return [b0, b1], shifts, 1


def verify_iwasawa_double_coset_sampled(
    n: int,
    q: int,
    left_set: frozenset[int] | set[int],
    right_set: frozenset[int] | set[int],
    samples: int = 100,
    seed: int = 0,
    perturbations: int = 100,
) -> Report:
    """Sampled check that constructed products classify into one double coset.

    Each sample draws an integral matrix reducing into the left residue
    parabolic, a permutation w, and an invertible block upper triangular
    matrix over the field for the right generator set.  The permutation
    extracted from the product must lie in the double coset of w under the
    two generator subgroups, and it must stay fixed under multiplying on
    the left by triangular-mod-t elements and on the right by upper
    triangular invertible ones.
    """
    rng = Random(seed)
    instances = 0
    failures = 0
    witness = None
    coset_cache: dict[WeylElement, frozenset[WeylElement]] = {}

    def double_coset_of(w: WeylElement) -> frozenset[WeylElement]:
        if w not in coset_cache:
            orbit = {w}
            frontier = [w]
            lg = [coxeter.simple_reflection(n, i) for i in sorted(left_set)]
            rg = [coxeter.simple_reflection(n, i) for i in sorted(right_set)]
            while frontier:
                cur = frontier.pop()
                for gmat in lg:
                    nxt = coxeter.multiply(gmat, cur)
                    if nxt not in orbit:
                        orbit.add(nxt)
                        frontier.append(nxt)
                for gmat in rg:
                    nxt = coxeter.multiply(cur, gmat)
                    if nxt not in orbit:
                        orbit.add(nxt)
                        frontier.append(nxt)
            coset_cache[w] = frozenset(orbit)
        return coset_cache[w]

    m = n + 1
    for s in range(samples):
        images = list(range(1, m + 1))
        rng.shuffle(images)
        w = WeylElement(n, tuple(images))
        perm_packed = np.zeros((m, m, 1), dtype=np.int64)
        for col in range(1, m + 1):
            perm_packed[coxeter.apply(w, col) - 1, col - 1, 0] = 1
        p_left = _random_parahoric_layers(n, q, left_set, rng)
        right, shifts, denom_power = _random_field_parabolic_layers(
            n, q, right_set, rng
        )
        moved = _shift_columns(
            _right_layer_product(
                q, _left_layer_product(q, p_left, perm_packed), right
            ),
            shifts,
        )
        w2 = _perm_from_packed(q, moved, denom_power)
        instances += 1
        if w2 not in double_coset_of(w):
            failures += 1
            if witness is None:
                witness = {
                    "reason": "product left the double coset",
                    "sample": s,
                    "perm": list(w.perm),
                    "moved_perm": list(w2.perm),
                }
            continue
        for p in range(perturbations):
            iw = _random_iwahori_layers(n, q, rng)
            up, up_shifts, up_denom = _random_upper_layers(n, q, rng)
            shaken = _shift_columns(
                _right_layer_product(q, _left_layer_product(q, iw, moved), up),
                up_shifts,
            )
            instances += 1
            w3 = _perm_from_packed(q, shaken, denom_power + up_denom)
            if w3 != w2:
                failures += 1
                if witness is None:
                    witness = {
                        "reason": "class moved under a legal perturbation",
                        "sample": s,
                        "perturbation": p,
                        "expected": list(w2.perm),
                        "got": list(w3.perm),
                    }
                break
    return make_report(
        "iwasawa_double_coset_sampled",
        {"n": n, "q": q, "left": sorted(left_set), "right": sorted(right_set),
         "samples": samples, "perturbations": perturbations, "seed": seed},
        instances,
        failures,
        witness=witness,
    )

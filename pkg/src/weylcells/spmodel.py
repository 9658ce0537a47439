"""Integer model of the quotient representation carried by coset functions.

The free integer module on the cosets of the initial-run subgroup (generated
by s_1 .. s_{n-k}) models the span of cell indicator functions.  The
degenerate submodule is spanned by fiber sums: for each coset and each
generator index j in n-k+1 .. n, the sum of the basis vectors in the fiber
of the projection onto the coarser coset space.  All the identities checked
here are memberships of explicit vectors in that integer span, decided by an
exact Hermite-style triangularization with a tracked transform, so every
positive answer carries a certificate that re-multiplies to the vector.

The same coset space indexes both triangular-cell and parahoric-cell
decompositions, so each membership verifies the matching pair of identities
at once.

Large sweeps run through a batched int64 reduction; magnitude checkpoints
and python-integer spot audits keep the fast path exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import coxeter, indexsets
from .coxeter import WeylElement
from .report import Report, make_report

INT64_GUARD = 1 << 40
GUARD_STRIDE = 16
AUDIT_STRIDE = 97


@dataclass(frozen=True)
class CellFunction:
    """Integer vector over the canonical coset representatives."""

    n: int
    k: int
    coeffs: tuple[int, ...]

    def __add__(self, other: "CellFunction") -> "CellFunction":
        self._match(other)
        return CellFunction(
            self.n, self.k, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __sub__(self, other: "CellFunction") -> "CellFunction":
        self._match(other)
        return CellFunction(
            self.n, self.k, tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __neg__(self) -> "CellFunction":
        return CellFunction(self.n, self.k, tuple(-a for a in self.coeffs))

    def scale(self, c: int) -> "CellFunction":
        return CellFunction(self.n, self.k, tuple(c * a for a in self.coeffs))

    def _match(self, other: "CellFunction") -> None:
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError(
                f"mismatched parameters {(self.n, self.k)} vs {(other.n, other.k)}"
            )


@lru_cache(maxsize=None)
def coset_basis(n: int, k: int):
    """Canonical coset representatives and the member-to-index lookup.

    Returns (reps, index_of) where reps is the tuple of shortest
    representatives ordered by length then one-line form, and index_of maps
    the one-line form of every group element to its coset index.
    """
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range 0..{n}")
    subgroup = coxeter.parabolic_subgroup(n, indexsets.jk_set(n, k))
    reps: list[WeylElement] = []
    index_of: dict[tuple[int, ...], int] = {}
    for w in coxeter.all_elements(n):
        if w.perm in index_of:
            continue
        idx = len(reps)
        reps.append(w)
        for u in subgroup:
            index_of[coxeter.multiply(w, u).perm] = idx
    expected = _falling_quotient(n, k)
    if len(reps) != expected:
        raise AssertionError(f"coset count {len(reps)} != {expected}")
    return tuple(reps), index_of


def _falling_quotient(n: int, k: int) -> int:
    out = 1
    for i in range(n - k + 2, n + 2):
        out *= i
    return out


def zero_function(n: int, k: int) -> CellFunction:
    reps, _ = coset_basis(n, k)
    return CellFunction(n, k, (0,) * len(reps))


def cell_function(w: WeylElement, k: int) -> CellFunction:
    """Basis vector of the coset of w."""
    reps, index_of = coset_basis(w.n, k)
    coeffs = [0] * len(reps)
    coeffs[index_of[w.perm]] = 1
    return CellFunction(w.n, k, tuple(coeffs))


def fiber_sum(w: WeylElement, k: int, j: int) -> CellFunction:
    """Sum of the basis vectors in the fiber of the coarsening at index j.

    For j >= n-k+2 the subgroup grows by a commuting factor and the fiber is
    the pair {w, w s_j}; for j = n-k+1 it consists of w times the ascending
    runs ending at n-k+1, one per starting point (the empty run included).
    """
    n = w.n
    if not n - k + 1 <= j <= n:
        raise ValueError(f"index {j} out of range {n - k + 1}..{n}")
    reps, index_of = coset_basis(n, k)
    coeffs = [0] * len(reps)
    if j >= n - k + 2:
        members = [w, coxeter.multiply(w, coxeter.simple_reflection(n, j))]
    else:
        members = [
            coxeter.multiply(w, coxeter.segment_element(n, r, n - k + 1))
            for r in range(1, n - k + 3)
        ]
    for x in members:
        coeffs[index_of[x.perm]] += 1
    return CellFunction(n, k, tuple(coeffs))


def indicator_sum(n: int, k: int, box: indexsets.Box) -> CellFunction:
    """Sum of basis vectors over the staggered words of a box."""
    reps, index_of = coset_basis(n, k)
    coeffs = [0] * len(reps)
    for r in indexsets.box_elements(box):
        coeffs[index_of[indexsets.tuple_to_weyl(n, k, r).perm]] += 1
    return CellFunction(n, k, tuple(coeffs))


def product_indicator(n: int, k: int, subset: frozenset[int] | set[int]) -> CellFunction:
    """The indicator vector of the distinguished box of a subset."""
    return indicator_sum(n, k, indexsets.cell_box(n, k, subset))


@lru_cache(maxsize=None)
def _rotation_permutation(n: int, k: int, i: int) -> tuple[int, ...]:
    reps, index_of = coset_basis(n, k)
    w_i = coxeter.rotation_element(n, i)
    return tuple(index_of[coxeter.multiply(w_i, rep).perm] for rep in reps)


def act_rotation(i: int, f: CellFunction) -> CellFunction:
    """Push the basis labels through left multiplication by the rotation."""
    if not 0 <= i <= f.n:
        raise ValueError(f"rotation index {i} out of range 0..{f.n}")
    perm = _rotation_permutation(f.n, f.k, i)
    coeffs = [0] * len(f.coeffs)
    for src, dst in enumerate(perm):
        coeffs[dst] += f.coeffs[src]
    return CellFunction(f.n, f.k, tuple(coeffs))


class SpanNormalForm:
    """Triangularized integer basis of the degenerate submodule.

    ``echelon`` rows are an upper-triangular generating set with recorded
    pivot columns; ``transform`` expresses every worked row as an integer
    combination of the original generators, and that factorization is
    re-multiplied once at construction time.  ``mod`` optionally augments
    the generators by m times the identity, so membership means membership
    modulo m.
    """

    def __init__(self, n: int, k: int, mod: int | None = None):
        if mod is not None and mod < 2:
            raise ValueError(f"modulus {mod} must be at least 2")
        self.n = n
        self.k = k
        self.mod = mod
        reps, _ = coset_basis(n, k)
        self.size = len(reps)
        gens: list[tuple[int, ...]] = []
        descriptors: list[tuple] = []
        seen: set[tuple[int, ...]] = set()
        for rep in reps:
            for j in range(n - k + 1, n + 1):
                vec = fiber_sum(rep, k, j).coeffs
                if vec in seen:
                    continue
                seen.add(vec)
                gens.append(vec)
                descriptors.append(("fiber", rep.perm, j))
        if mod is not None:
            for i in range(self.size):
                vec = tuple(mod if c == i else 0 for c in range(self.size))
                gens.append(vec)
                descriptors.append(("torsion", i))
        self.generators = tuple(gens)
        self.descriptors = tuple(descriptors)
        self._triangularize()

    def _triangularize(self) -> None:
        rows = [list(g) for g in self.generators]
        count = len(rows)
        transform = [
            [1 if a == b else 0 for b in range(count)] for a in range(count)
        ]

        def combine(dst: int, src: int, q: int) -> None:
            if q == 0:
                return
            rd, rs = rows[dst], rows[src]
            for c in range(self.size):
                rd[c] -= q * rs[c]
            td, ts = transform[dst], transform[src]
            for c in range(count):
                td[c] -= q * ts[c]

        rank = 0
        pivot_cols: list[int] = []
        for col in range(self.size):
            live = [i for i in range(rank, count) if rows[i][col] != 0]
            if not live:
                continue
            while len(live) > 1:
                live.sort(key=lambda i: abs(rows[i][col]))
                base = live[0]
                for i in live[1:]:
                    combine(i, base, rows[i][col] // rows[base][col])
                live = [i for i in live if rows[i][col] != 0]
            lead = live[0]
            rows[rank], rows[lead] = rows[lead], rows[rank]
            transform[rank], transform[lead] = transform[lead], transform[rank]
            if rows[rank][col] < 0:
                rows[rank] = [-x for x in rows[rank]]
                transform[rank] = [-x for x in transform[rank]]
            for i in range(rank):
                combine(i, rank, rows[i][col] // rows[rank][col])
            pivot_cols.append(col)
            rank += 1
        for i in range(rank, count):
            if any(rows[i]):
                raise AssertionError("a non-pivot row failed to clear")
        self.rank = rank
        self.pivot_cols = tuple(pivot_cols)
        self.echelon = tuple(tuple(r) for r in rows[:rank])
        self.transform = tuple(tuple(r) for r in transform[:rank])
        for i in range(rank):
            recomputed = [0] * self.size
            for coeff, gen in zip(self.transform[i], self.generators):
                if coeff:
                    for c in range(self.size):
                        recomputed[c] += coeff * gen[c]
            if tuple(recomputed) != self.echelon[i]:
                raise AssertionError("transform fails to reproduce an echelon row")
        bound = max(
            (abs(x) for row in self.echelon for x in row), default=0
        )
        if bound >= INT64_GUARD:
            raise OverflowError("echelon entries exceeded the fast-path bound")

    def quotient_rank(self) -> int:
        return self.size - self.rank

    def reduce(self, vector: tuple[int, ...]):
        """Greedy residue of a vector against the echelon.

        Returns (residue, coefficients); the vector lies in the span exactly
        when the residue is zero, and then vector = sum of coefficients
        times echelon rows, exactly.
        """
        if len(vector) != self.size:
            raise ValueError("vector length does not match the basis")
        vec = list(vector)
        coeffs = [0] * self.rank
        for i, col in enumerate(self.pivot_cols):
            q = vec[col] // self.echelon[i][col]
            if q:
                coeffs[i] = q
                row = self.echelon[i]
                for c in range(self.size):
                    vec[c] -= q * row[c]
        return tuple(vec), tuple(coeffs)

    def membership_batch(self, vectors: list[tuple[int, ...]]) -> list:
        """Batched membership with certificates.

        Returns one entry per vector: None for non-members, otherwise the
        tuple of echelon coefficients.  Every member's certificate is
        re-multiplied against the echelon inside this call (vectorized, with
        magnitude checkpoints), and a deterministic sample is re-multiplied
        again with python integers.
        """
        if not vectors:
            return []
        for v in vectors:
            if len(v) != self.size:
                raise ValueError("vector length does not match the basis")
        work = np.array(vectors, dtype=np.int64)
        original = work.copy()
        if self.rank == 0:
            return [
                () if not any(v) else None for v in vectors
            ]
        echelon = np.array(self.echelon, dtype=np.int64)
        certs = np.zeros((len(vectors), self.rank), dtype=np.int64)
        for i, col in enumerate(self.pivot_cols):
            q = work[:, col] // self.echelon[i][col]
            certs[:, i] = q
            work -= q[:, None] * echelon[i][None, :]
            if i % GUARD_STRIDE == 0 and (
                int(np.abs(work).max()) >= INT64_GUARD
                or int(np.abs(certs).max()) >= INT64_GUARD
            ):
                raise OverflowError("batched reduction left the safe int64 range")
        if int(np.abs(work).max()) >= INT64_GUARD or (
            int(np.abs(certs).max()) >= INT64_GUARD
        ):
            raise OverflowError("batched reduction left the safe int64 range")
        member = ~work.any(axis=1)
        if member.any():
            rebuilt = certs[member] @ echelon
            if not np.array_equal(rebuilt, original[member]):
                raise AssertionError("a certificate failed to re-multiply")
        out = []
        member_seen = 0
        for idx in range(len(vectors)):
            if not member[idx]:
                out.append(None)
                continue
            cert = tuple(int(x) for x in certs[idx])
            if member_seen % AUDIT_STRIDE == 0:
                audit = [0] * self.size
                for coeff, row in zip(cert, self.echelon):
                    if coeff:
                        for c in range(self.size):
                            audit[c] += coeff * row[c]
                if tuple(audit) != tuple(vectors[idx]):
                    raise AssertionError("python audit of a certificate failed")
            member_seen += 1
            out.append(cert)
        return out

    def generator_certificate(self, coeffs: tuple[int, ...]) -> tuple[int, ...]:
        """Rewrite echelon coefficients as original-generator coefficients."""
        out = [0] * len(self.generators)
        for coeff, trow in zip(coeffs, self.transform):
            if coeff:
                for g in range(len(out)):
                    out[g] += coeff * trow[g]
        return tuple(out)


@lru_cache(maxsize=None)
def span_normal_form(n: int, k: int, mod: int | None = None) -> SpanNormalForm:
    return SpanNormalForm(n, k, mod)


def in_degenerate_span(
    f: CellFunction, mod: int | None = None, full_certificate: bool = False
):
    """Exact membership in the fiber-sum span, with certificate.

    Returns (member, certificate): for members the certificate lists the
    echelon coefficients, or the original-generator coefficients when
    ``full_certificate`` is set (re-multiplied here against the raw
    generators); for non-members it is None.
    """
    nf = span_normal_form(f.n, f.k, mod)
    result = nf.membership_batch([f.coeffs])[0]
    if result is None:
        return False, None
    if not full_certificate:
        return True, result
    cert = nf.generator_certificate(result)
    rebuilt = [0] * nf.size
    for coeff, gen in zip(cert, nf.generators):
        if coeff:
            for c in range(nf.size):
                rebuilt[c] += coeff * gen[c]
    if tuple(rebuilt) != f.coeffs:
        raise AssertionError("generator certificate failed to re-multiply")
    return True, cert


def quotient_rank(n: int, k: int, mod: int | None = None) -> int:
    """Rank of the quotient by the degenerate submodule."""
    return span_normal_form(n, k, mod).quotient_rank()


def _membership_sweep(
    check: str,
    params: dict,
    nf: SpanNormalForm,
    items: list[tuple[object, tuple[int, ...]]],
    extra: dict | None = None,
) -> Report:
    results = nf.membership_batch([vec for _, vec in items])
    failures = 0
    witness = None
    for (tag, _), cert in zip(items, results):
        if cert is None:
            failures += 1
            if witness is None:
                witness = tag
    merged = {"certificates": "re-multiplied in batch"}
    if extra:
        merged.update(extra)
    return make_report(
        check, params, len(items), failures, witness=witness, extra=merged
    )


def verify_tail_sign_relation(n: int, k: int, mod: int | None = None) -> Report:
    """Signed pair collapse for trailing-run factors.

    For every group element w and every w' in the subgroup generated by the
    trailing indices n-k+2 .. n (the whole group when k = n), the vector
    [w] - (-1)^{l(w')} [w w'] lies in the degenerate span.
    """
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    nf = span_normal_form(n, k, mod)
    if k == n:
        tail_group = coxeter.all_elements(n)
    else:
        tail_group = coxeter.parabolic_subgroup(
            n, frozenset(range(n - k + 2, n + 1))
        )
    items = []
    for w in coxeter.all_elements(n):
        base = cell_function(w, k)
        for wp in tail_group:
            sign = -1 if coxeter.length(wp) % 2 else 1
            vec = base - cell_function(coxeter.multiply(w, wp), k).scale(sign)
            items.append(({"w": w.perm, "w_tail": wp.perm}, vec.coeffs))
    return _membership_sweep(
        "tail_sign_relation",
        {"n": n, "k": k, "mod": mod},
        nf,
        items,
        extra={"tail_group_order": len(tail_group)},
    )


def verify_lshape_relation(
    n: int,
    k: int,
    w: WeylElement,
    w_prime: WeylElement,
    a: int,
    b: int,
    b_prime: int,
    mod: int | None = None,
) -> Report:
    """Rectangle sums built from two nested runs collapse into the span.

    The rectangle (r_1, r_2) in (a..b) x (a..b+1) splits into nested
    L-shaped levels; at each level the row block and the column block pair
    off term by term, and the braid move turns every pair into one
    coarsening fiber at index b'.  That exact vector identity is checked
    per level, then span membership of every level sum and of the whole
    rectangle.  Requires the intertwining hypothesis s_b w' = w' s_{b'}
    with b' in the trailing index range.
    """
    if not 1 <= a <= b <= n:
        raise ValueError(f"need 1 <= a <= b <= n, got a={a}, b={b}")
    if not n - k + 2 <= b_prime <= n:
        raise ValueError(f"b'={b_prime} out of range {n - k + 2}..{n}")
    lhs = coxeter.multiply(coxeter.simple_reflection(n, b), w_prime)
    rhs = coxeter.multiply(w_prime, coxeter.simple_reflection(n, b_prime))
    if lhs != rhs:
        raise ValueError(
            f"hypothesis fails: s_{b} w' != w' s_{b_prime} for w'={w_prime.perm}"
        )
    nf = span_normal_form(n, k, mod)

    def element(r1: int, r2: int) -> WeylElement:
        out = coxeter.multiply(w, coxeter.segment_element(n, r2, b))
        out = coxeter.multiply(out, coxeter.segment_element(n, r1, b - 1))
        return coxeter.multiply(out, w_prime)

    def box_vector(box: indexsets.Box) -> CellFunction:
        total = zero_function(n, k)
        for r1, r2 in indexsets.box_elements(box):
            total = total + cell_function(element(r1, r2), k)
        return total

    rectangle = box_vector(((a, b), (a, b + 1)))
    blocks = indexsets.lshape_partition(a, b)
    levels = [
        box_vector(blocks[2 * l]) + box_vector(blocks[2 * l + 1])
        for l in range(b - a + 1)
    ]
    stitched = zero_function(n, k)
    for vec in levels:
        stitched = stitched + vec
    if stitched != rectangle:
        raise AssertionError("L-shaped levels failed to stitch into the rectangle")
    failures = 0
    witness = None
    for l, vec in enumerate(levels):
        edge = b - l
        fibers = zero_function(n, k)
        for r in range(a, edge + 1):
            fibers = fibers + fiber_sum(element(edge, r), k, b_prime)
        if vec != fibers:
            failures += 1
            if witness is None:
                witness = {"identity": "fiber collapse", "level": l}
    items = [({"piece": f"level {l}"}, vec.coeffs) for l, vec in enumerate(levels)]
    items.append(({"piece": "rectangle"}, rectangle.coeffs))
    results = nf.membership_batch([vec for _, vec in items])
    for (tag, _), cert in zip(items, results):
        if cert is None:
            failures += 1
            if witness is None:
                witness = tag
    return make_report(
        "lshape_relation",
        {
            "n": n,
            "k": k,
            "w": w.perm,
            "w_prime": w_prime.perm,
            "a": a,
            "b": b,
            "b_prime": b_prime,
            "mod": mod,
        },
        len(levels) + len(items),
        failures,
        witness=witness,
        extra={"certificates": "re-multiplied in batch"},
    )


def verify_product_reduction(
    n: int,
    k: int,
    subset: frozenset[int] | set[int],
    i_top: int,
    mod: int | None = None,
) -> Report:
    """The two box-cutting reductions of the distinguished indicator.

    First: modulo the degenerate span the distinguished box equals its
    tails-only piece, plus the alternating extreme glued boxes, plus the
    top piece.  Second: rotating the translated subset's indicator by i_1
    lands on (-1)^k times the tails-only piece, modulo the span.  When
    the upper index is n + 1 the two combine: the distinguished indicator
    equals (-1)^k times its rotated translate, modulo the span.
    """
    comp = indexsets.complement_tuple(n, subset)
    if len(comp) != k:
        raise ValueError(f"complement size {len(comp)} != k={k}")
    nf = span_normal_form(n, k, mod)

    def variant(which: str, t: int | None = None, t2: int | None = None):
        return indicator_sum(
            n, k, indexsets.cell_box_variant(n, k, subset, i_top, which, t, t2)
        )

    base = product_indicator(n, k, subset)
    cut = variant("C0")
    for t in range(1, k):
        sign = -1 if (k - t - 1) % 2 else 1
        cut = cut + variant("Ctt", t, k - t - 1).scale(sign)
    cut = cut + variant("Ck")

    tset = indexsets.translated_set(n, subset, i_top)
    rotated = act_rotation(comp[0], product_indicator(n, k, tset))
    tails = variant("C0")
    sign_k = -1 if k % 2 else 1

    items = [
        ({"identity": "alternating cut"}, (base - cut).coeffs),
        (
            {"identity": "rotated translate"},
            (rotated - tails.scale(sign_k)).coeffs,
        ),
    ]
    if i_top == n + 1:
        items.append(
            (
                {"identity": "full reduction"},
                (base - rotated.scale(sign_k)).coeffs,
            )
        )
    return _membership_sweep(
        "product_reduction",
        {"n": n, "k": k, "subset": sorted(subset), "i_top": i_top, "mod": mod},
        nf,
        items,
    )


def verify_hc2_model(
    n: int, k: int, subset: frozenset[int] | set[int], mod: int | None = None
) -> Report:
    """The long-interval box sum vanishes modulo the degenerate span.

    Requires the largest complement entry to be n; the box keeps the first
    k - 1 intervals and widens the last to reach n + 1.
    """
    comp = indexsets.complement_tuple(n, subset)
    if len(comp) != k:
        raise ValueError(f"complement size {len(comp)} != k={k}")
    if comp[-1] != n:
        raise ValueError(f"largest complement entry {comp[-1]} must be n={n}")
    nf = span_normal_form(n, k, mod)
    vec = indicator_sum(
        n, k, indexsets.cell_box_variant(n, k, subset, None, "CIn")
    )
    return _membership_sweep(
        "hc2_model",
        {"n": n, "k": k, "subset": sorted(subset), "mod": mod},
        nf,
        [({"identity": "long box sum"}, vec.coeffs)],
    )


def verify_hc4_model(
    n: int,
    k: int,
    subset: frozenset[int] | set[int],
    i_top: int,
    mod: int | None = None,
) -> Report:
    """Alternating trade sum against the rotated translate.

    For an upper index i_{k+1} <= n, the rotated translated indicator plus
    the alternating sum over j of the traded-box indicators lies in the
    degenerate span.
    """
    comp = indexsets.complement_tuple(n, subset)
    if len(comp) != k:
        raise ValueError(f"complement size {len(comp)} != k={k}")
    if not comp[-1] < i_top <= n:
        raise ValueError(f"upper index {i_top} must lie in {comp[-1] + 1}..{n}")
    nf = span_normal_form(n, k, mod)
    tset = indexsets.translated_set(n, subset, i_top)
    total = act_rotation(comp[0], product_indicator(n, k, tset))
    for j in range(1, k + 2):
        sign = -1 if j % 2 else 1
        traded = indicator_sum(
            n, k, indexsets.replaced_cell_box(n, k, subset, j, i_top)
        )
        total = total + traded.scale(sign)
    return _membership_sweep(
        "hc4_model",
        {"n": n, "k": k, "subset": sorted(subset), "i_top": i_top, "mod": mod},
        nf,
        [({"identity": "alternating trade sum"}, total.coeffs)],
    )


def verify_rotation_stability(n: int, k: int, mod: int | None = None) -> Report:
    """The degenerate span is carried into itself by every rotation."""
    nf = span_normal_form(n, k, mod)
    items = []
    for desc, gen in zip(nf.descriptors, nf.generators):
        f = CellFunction(n, k, gen)
        for i in range(n + 1):
            items.append(
                (
                    {"generator": desc, "i": i},
                    act_rotation(i, f).coeffs,
                )
            )
    return _membership_sweep(
        "rotation_stability", {"n": n, "k": k, "mod": mod}, nf, items
    )


def admissible_subsets(n: int, k: int):
    """All subsets whose complement has exactly k elements."""
    out = []
    for comp in itertools.combinations(range(1, n + 1), k):
        out.append(frozenset(range(1, n + 1)) - frozenset(comp))
    return out

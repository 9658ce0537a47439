"""The finite Weyl group of type A_n as permutations of {1, ..., n+1}.

Elements are stored in one-line notation: ``perm[j-1]`` is the image of
``j``.  The generator ``s_i`` swaps ``i`` and ``i+1``.  Products are read
right to left, so ``multiply(u, v)`` applies ``v`` first; this matches the
matrix convention in :mod:`weylcells.exactfield`, where the permutation
matrix ``P`` satisfies ``P(u) @ P(v) == P(multiply(u, v))``.

Beyond the group structure the module knows two families of words:

- ``segment_word(n, a, b)``: the ascending run ``s_a s_{a+1} ... s_b``.
- ``rotation_element(n, i)``: the product of ``i`` staggered runs whose
  one-line form is the cyclic shift ``j -> j + i  (mod n+1)``.

and verifies, exhaustively for a given rank, the rewriting identities that
move generators and whole runs past each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .report import Report, make_report

GeneratorWord = tuple[int, ...]

MAX_ENUM_RANK = 7


@dataclass(frozen=True)
class WeylElement:
    """A permutation of {1, ..., n+1} in one-line notation."""

    n: int
    perm: tuple[int, ...]


def identity(n: int) -> WeylElement:
    return WeylElement(n, tuple(range(1, n + 2)))


def simple_reflection(n: int, i: int) -> WeylElement:
    """The generator s_i, the transposition of i and i+1.

    >>> simple_reflection(2, 1).perm
    (2, 1, 3)
    """
    if not 1 <= i <= n:
        raise ValueError(f"generator index {i} out of range for rank {n}")
    perm = list(range(1, n + 2))
    perm[i - 1], perm[i] = perm[i], perm[i - 1]
    return WeylElement(n, tuple(perm))


def apply(w: WeylElement, j: int) -> int:
    """Image of the point j under w."""
    return w.perm[j - 1]


def multiply(u: WeylElement, v: WeylElement) -> WeylElement:
    """The product u v, acting on points by applying v first."""
    if u.n != v.n:
        raise ValueError("rank mismatch")
    return WeylElement(u.n, tuple(u.perm[x - 1] for x in v.perm))


def inverse(w: WeylElement) -> WeylElement:
    out = [0] * (w.n + 1)
    for j, x in enumerate(w.perm, start=1):
        out[x - 1] = j
    return WeylElement(w.n, tuple(out))


def from_word(n: int, word: GeneratorWord) -> WeylElement:
    """Evaluate a word in the generators, leftmost letter applied last."""
    result = identity(n)
    for letter in word:
        result = multiply(result, simple_reflection(n, letter))
    return result


def length(w: WeylElement) -> int:
    """Coxeter length, the number of inversions of the one-line form."""
    count = 0
    p = w.perm
    for a in range(len(p)):
        for b in range(a + 1, len(p)):
            if p[a] > p[b]:
                count += 1
    return count


def reduced_word(w: WeylElement) -> GeneratorWord:
    """A reduced word for w, peeling the smallest descent on the right.

    >>> reduced_word(from_word(2, (1, 2, 1)))
    (1, 2, 1)
    """
    word: list[int] = []
    cur = w
    while True:
        descent = next(
            (i for i in range(1, cur.n + 1) if cur.perm[i - 1] > cur.perm[i]), None
        )
        if descent is None:
            break
        word.append(descent)
        cur = multiply(cur, simple_reflection(cur.n, descent))
    word.reverse()
    return tuple(word)


def sort_key(w: WeylElement) -> tuple[int, tuple[int, ...]]:
    return (length(w), w.perm)


def all_elements(n: int) -> list[WeylElement]:
    """Every element of the rank-n group, sorted by length then one-line form."""
    _check_enum_rank(n)
    elems = [WeylElement(n, p) for p in itertools.permutations(range(1, n + 2))]
    elems.sort(key=sort_key)
    return elems


def _check_enum_rank(n: int) -> None:
    if not 1 <= n <= MAX_ENUM_RANK:
        raise ValueError(
            f"rank {n} outside the supported enumeration range 1..{MAX_ENUM_RANK}"
        )


def segment_word(n: int, a: int, b: int) -> GeneratorWord:
    """The ascending run (a, a+1, ..., b); empty when a == b + 1.

    Runs are the building blocks of every staggered word in this package,
    and the off-by-one empty case is relied on throughout, so anything
    further out of range raises.
    """
    if a == b + 1:
        return ()
    if a > b:
        raise ValueError(f"run {a}..{b} descends by more than the empty convention")
    if a < 1 or b > n:
        raise ValueError(f"run {a}..{b} leaves the generator range 1..{n}")
    return tuple(range(a, b + 1))


def segment_element(n: int, a: int, b: int) -> WeylElement:
    return from_word(n, segment_word(n, a, b))


def rotation_word(n: int, i: int) -> GeneratorWord:
    """Word of the i-step rotation: runs (i..n), (i-1..n-1), ..., (1..n-i+1)."""
    if not 0 <= i <= n + 1:
        raise ValueError(f"rotation step {i} out of range 0..{n + 1}")
    word: list[int] = []
    for shift in range(i):
        word.extend(segment_word(n, i - shift, n - shift))
    return tuple(word)


def rotation_element(n: int, i: int) -> WeylElement:
    """The element sending j to j + i modulo n + 1 (as a product of runs).

    >>> rotation_element(2, 1).perm
    (2, 3, 1)
    """
    return from_word(n, rotation_word(n, i))


def parabolic_subgroup(n: int, generators: frozenset[int] | set[int]) -> list[WeylElement]:
    """All elements of the subgroup generated by {s_i : i in generators}.

    The generators split into maximal consecutive runs; the subgroup is the
    direct product of full symmetric groups on the corresponding blocks of
    points, so it is enumerated blockwise rather than by closure.
    """
    _check_enum_rank(n)
    gens = sorted(generators)
    if any(not 1 <= i <= n for i in gens):
        raise ValueError(f"generator set {gens} not within 1..{n}")
    blocks: list[list[int]] = []
    for i in gens:
        if blocks and blocks[-1][-1] == i:
            blocks[-1].append(i + 1)
        else:
            blocks.append([i, i + 1])
    elems: list[WeylElement] = []
    base = list(range(1, n + 2))
    block_perms = [list(itertools.permutations(block)) for block in blocks]
    for choice in itertools.product(*block_perms):
        perm = base[:]
        for block, images in zip(blocks, choice):
            for point, image in zip(block, images):
                perm[point - 1] = image
        elems.append(WeylElement(n, tuple(perm)))
    elems.sort(key=sort_key)
    return elems


def minimal_representative(coset: frozenset[WeylElement]) -> WeylElement:
    """The unique shortest element of a (double) coset."""
    return min(coset, key=sort_key)


def double_cosets(
    n: int, left: frozenset[int] | set[int], right: frozenset[int] | set[int]
) -> list[frozenset[WeylElement]]:
    """Partition of the whole group into left-subgroup/right-subgroup double cosets.

    Returned in increasing order of the minimal representative.  Each coset
    is found by closing a seed under left multiplication by the left
    generators and right multiplication by the right generators.
    """
    _check_enum_rank(n)
    left_gens = [simple_reflection(n, i) for i in sorted(left)]
    right_gens = [simple_reflection(n, i) for i in sorted(right)]
    seen: set[WeylElement] = set()
    cosets: list[frozenset[WeylElement]] = []
    for w in all_elements(n):
        if w in seen:
            continue
        orbit = {w}
        frontier = [w]
        while frontier:
            cur = frontier.pop()
            for g in left_gens:
                nxt = multiply(g, cur)
                if nxt not in orbit:
                    orbit.add(nxt)
                    frontier.append(nxt)
            for g in right_gens:
                nxt = multiply(cur, g)
                if nxt not in orbit:
                    orbit.add(nxt)
                    frontier.append(nxt)
        seen |= orbit
        cosets.append(frozenset(orbit))
    cosets.sort(key=lambda c: sort_key(minimal_representative(c)))
    return cosets


def tuple_word(n: int, k: int, r: tuple[int, ...]) -> GeneratorWord:
    """Word of the staggered product indexed by a k-tuple r.

    The j-th entry (j = 1..k) contributes the run starting at r_j and ending
    at n - k + j; factors are taken with j = k leftmost.  Entry j may be
    n - k + j + 1, in which case its run is empty.
    """
    if len(r) != k:
        raise ValueError(f"expected a {k}-tuple, got {r}")
    word: list[int] = []
    for j in range(k, 0, -1):
        word.extend(segment_word(n, r[j - 1], n - k + j))
    return tuple(word)


def verify_shift_identity(n: int) -> Report:
    """Check the defining relations and the run-shift rule, exhaustively.

    Instances: s_i s_i = e; commutation for far-apart generators; the braid
    relation for adjacent ones; and for every run a..b and every l with
    a + 1 <= l <= b, the rule  s_l (s_a ... s_b) = (s_a ... s_b) s_{l-1}.
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

    e = identity(n)
    for i in range(1, n + 1):
        si = simple_reflection(n, i)
        record(multiply(si, si) == e, {"relation": "involution", "i": i})
        for j in range(i + 2, n + 1):
            sj = simple_reflection(n, j)
            record(
                multiply(si, sj) == multiply(sj, si),
                {"relation": "commutation", "i": i, "j": j},
            )
        if i < n:
            sj = simple_reflection(n, i + 1)
            record(
                multiply(si, multiply(sj, si)) == multiply(sj, multiply(si, sj)),
                {"relation": "braid", "i": i},
            )
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            run = segment_element(n, a, b)
            for l in range(a + 1, b + 1):
                lhs = multiply(simple_reflection(n, l), run)
                rhs = multiply(run, simple_reflection(n, l - 1))
                record(lhs == rhs, {"relation": "run-shift", "a": a, "b": b, "l": l})
    return make_report("shift_identity", {"n": n}, instances, failures, witness=witness)


def verify_translation_identity(n: int) -> Report:
    """Check the index-translation rules for runs and staggered products.

    Two families, both exhaustive in the stated ranges:

    - runs: for 1 <= a <= a' <= b <= b' <= n,
          (s_a..s_b)(s_{a'}..s_{b'}) = (s_{a'+1}..s_{b'})(s_a..s_{b-1});
    - staggered products: for 1 <= k <= n, 0 <= i <= n - k + 1 and every
      tuple r with r_j in 1 .. n - k + j + 1 - i, left multiplication by the
      i-step rotation shifts every tuple entry by i at the cost of a trailing
      factor supported on the generators 1 .. n - k, namely the i-step
      rotation of the rank n - k subgroup.
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

    for a in range(1, n + 1):
        for a2 in range(a, n + 1):
            for b in range(a2, n + 1):
                for b2 in range(b, n + 1):
                    lhs = multiply(segment_element(n, a, b), segment_element(n, a2, b2))
                    rhs = multiply(
                        segment_element(n, a2 + 1, b2), segment_element(n, a, b - 1)
                    )
                    record(lhs == rhs, {"family": "runs", "a": a, "a'": a2, "b": b, "b'": b2})

    for k in range(1, n + 1):
        for i in range(0, n - k + 2):
            rot = rotation_element(n, i)
            trailing_word: list[int] = []
            for shift in range(i):
                trailing_word.extend(segment_word(n, i - shift, n - k - shift))
            trailing = from_word(n, tuple(trailing_word))
            ranges = [range(1, n - k + j + 2 - i) for j in range(1, k + 1)]
            for r in itertools.product(*ranges):
                lhs = multiply(rot, from_word(n, tuple_word(n, k, r)))
                shifted = tuple(rj + i for rj in r)
                rhs = multiply(from_word(n, tuple_word(n, k, shifted)), trailing)
                record(
                    lhs == rhs,
                    {"family": "staggered", "k": k, "i": i, "r": list(r)},
                )
    return make_report(
        "translation_identity", {"n": n}, instances, failures, witness=witness
    )


def verify_rotation_inverse_factorization(n: int, k: int, i: int) -> Report:
    """Check the two-part factorization of the inverse of the i-step rotation.

    For i within 0 .. n - k + 1 the inverse splits as F S where S lives in
    the subgroup generated by s_1 .. s_{n-k} and the letter count of the two
    words adds up to the length of the rotation, so both are reduced and the
    factorization is length-additive.  For larger i (which requires k >= 2)
    the inverse splits as a product of two staggered words whose second
    factor uses only the generators n - k + 2 .. n; here the length of the
    second factor is pinned down modulo 2, which is the sign it contributes
    when that factor is absorbed one tail letter at a time.
    """
    if not 1 <= k <= n:
        raise ValueError(f"parameter k={k} out of range 1..{n}")
    if not 0 <= i <= n:
        raise ValueError(f"rotation step {i} out of range 0..{n}")
    target = inverse(rotation_element(n, i))
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

    if i <= n - k + 1:
        case = "A"
        first: list[int] = []
        for step in range(1, k + 1):
            first.extend(segment_word(n, n - i + 2 - step, n + 1 - step))
        second: list[int] = []
        for step in range(1, n - k - i + 2):
            second.extend(segment_word(n, n - k - i + 2 - step, n - k + 1 - step))
        record(
            from_word(n, tuple(first + second)) == target,
            {"check": "product", "first": first, "second": second},
        )
        record(
            all(letter <= n - k for letter in second),
            {"check": "second factor support", "second": second},
        )
        record(
            len(first) + len(second) == length(target),
            {
                "check": "length additivity",
                "letters": len(first) + len(second),
                "length": length(target),
            },
        )
    else:
        case = "B"
        if k < 2:
            raise ValueError("the large-step case needs k >= 2")
        first = []
        for step in range(1, n - i + 2):
            first.extend(segment_word(n, n - i + 2 - step, 2 * n - k - i + 2 - step))
        second = []
        for step in range(1, n - i + 2):
            second.extend(segment_word(n, 2 * n - k - i + 3 - step, n + 1 - step))
        record(
            from_word(n, tuple(first + second)) == target,
            {"check": "product", "first": first, "second": second},
        )
        record(
            all(n - k + 2 <= letter <= n for letter in second),
            {"check": "second factor support", "second": second},
        )
        second_len = length(from_word(n, tuple(second)))
        record(
            second_len % 2 == ((n - i + 1) * (k - 1)) % 2,
            {"check": "second factor length parity", "length": second_len},
        )
    return make_report(
        "rotation_inverse_factorization",
        {"n": n, "k": k, "i": i},
        instances,
        failures,
        witness=witness,
        extra={"case": case},
    )

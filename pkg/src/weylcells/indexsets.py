"""Integer interval boxes indexing cells, and their partition identities.

A *box* is a product of integer intervals, stored as a tuple of inclusive
``(lo, hi)`` pairs; an interval with ``lo > hi`` is empty and so is any box
containing one.  Boxes of length k index the staggered words of
:func:`weylcells.coxeter.tuple_word`: entry j of a member tuple picks the
starting point of the run ending at ``n - k + j``.

Each subset of the generator indices {1, ..., n} whose complement has k
elements ``i_1 < ... < i_k`` owns a distinguished box (:func:`cell_box`)
together with a family of sub-boxes (:func:`cell_box_variant`) that cut it
up in several ways.  :func:`verify_box_partitions` checks every cutting
identity exhaustively for one such subset; the signed identities are
verified as exact equalities of integer-valued indicator vectors.
"""

from __future__ import annotations

import itertools
from collections import Counter

from . import coxeter
from .coxeter import WeylElement
from .report import Report, make_report

Box = tuple[tuple[int, int], ...]

VARIANTS = ("C0", "Ck", "Ct", "Ctt", "D", "CIn")


def jk_set(n: int, k: int) -> frozenset[int]:
    """The generator set {1, ..., n-k}; empty when k = n, full when k = 0."""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range 0..{n}")
    return frozenset(range(1, n - k + 1))


def complement_tuple(n: int, subset: frozenset[int] | set[int]) -> tuple[int, ...]:
    """The complement of ``subset`` in {1, ..., n}, sorted increasingly."""
    if any(not 1 <= i <= n for i in subset):
        raise ValueError(f"subset {sorted(subset)} not within 1..{n}")
    return tuple(i for i in range(1, n + 1) if i not in subset)


def modified_set(
    subset: frozenset[int] | set[int],
    removals: frozenset[int] | set[int],
    additions: frozenset[int] | set[int],
) -> frozenset[int]:
    """Remove ``removals`` from and then add ``additions`` to ``subset``."""
    subset = frozenset(subset)
    removals = frozenset(removals)
    additions = frozenset(additions)
    if not removals <= subset:
        raise ValueError(f"removals {sorted(removals)} not contained in the set")
    out = subset - removals
    if out & additions:
        raise ValueError(f"additions {sorted(additions)} already present")
    return out | additions


def box_elements(box: Box) -> list[tuple[int, ...]]:
    return list(itertools.product(*(range(lo, hi + 1) for lo, hi in box)))


def box_size(box: Box) -> int:
    size = 1
    for lo, hi in box:
        size *= max(0, hi - lo + 1)
    return size


def _complement(n: int, k: int, subset: frozenset[int] | set[int]) -> tuple[int, ...]:
    comp = complement_tuple(n, subset)
    if k < 1:
        raise ValueError("the distinguished box needs a nonempty complement")
    if len(comp) != k:
        raise ValueError(
            f"complement of {sorted(subset)} has {len(comp)} elements, expected k={k}"
        )
    return comp


def cell_box(n: int, k: int, subset: frozenset[int] | set[int]) -> Box:
    """The distinguished box of a subset with k-element complement i_1 < ... < i_k:
    the product of the intervals  i_t + 1 .. n - k + t + 1.
    """
    comp = _complement(n, k, subset)
    return tuple((comp[t] + 1, n - k + t + 2) for t in range(k))


def _interval_maps(n: int, k: int, comp: tuple[int, ...], i_top: int):
    """Interval constructors shared by the variant boxes.

    ``ext`` extends the complement by the chosen upper index, so
    ``ext[t]`` is i_{t+1} for t = 0..k.  All three constructors take the
    1-based position within the box.
    """
    if not comp[-1] < i_top <= n + 1:
        raise ValueError(f"upper index {i_top} must lie in {comp[-1] + 1}..{n + 1}")
    ext = comp + (i_top,)

    def full(pos: int) -> tuple[int, int]:
        return (ext[pos - 1] + 1, n - k + pos + 1)

    def shift(pos: int) -> tuple[int, int]:
        return (ext[pos] + 1, n - k + pos + 1)

    def tail(pos: int) -> tuple[int, int]:
        return (ext[pos - 1] + 1, ext[pos])

    return ext, full, shift, tail


def cell_box_variant(
    n: int,
    k: int,
    subset: frozenset[int] | set[int],
    i_top: int | None,
    which: str,
    t: int | None = None,
    t2: int | None = None,
) -> Box:
    """One of the standard sub-boxes attached to a subset.

    With complement i_1 < ... < i_k and a chosen index i_{k+1} = ``i_top``
    in i_k + 1 .. n + 1, the variants are products of k intervals built from
    three shapes: *full* position t runs i_t + 1 .. n - k + t + 1, *shifted*
    position t runs i_{t+1} + 1 .. n - k + t + 1, and *tail* position t runs
    i_t + 1 .. i_{t+1}.

    - ``"C0"``: all tails.
    - ``"Ck"``: full at 1..k-1, shifted at k (empty when i_top = n + 1).
    - ``"Ct"`` (1 <= t <= k-1): full below t, shifted at t, tails above t.
    - ``"Ctt"`` (1 <= t <= k-1, 0 <= t2 <= k-t-1): full below t, shifted at
      t..t+t2, then one glued interval i_{t+t2+1} + 1 .. n - k + t + t2 + 2,
      then tails; for the extreme t2 = k-t-1 the last interval is the plain
      tail i_k + 1 .. i_{k+1} instead.
    - ``"D"`` (1 <= t <= k-1, 0 <= t2 <= k-t): full below t, shifted at
      t..t+t2, tails above t+t2; the extreme t2 = k-t is empty by
      convention, closing the chain of two-term splits.
    - ``"CIn"``: full at 1..k-1 and a long last interval i_{k-1} + 1 .. n+1
      (read i_0 = 0 when k = 1).  Ignores ``i_top``.
    """
    comp = _complement(n, k, subset)
    if which not in VARIANTS:
        raise ValueError(f"unknown variant {which!r}, expected one of {VARIANTS}")
    if which == "CIn":
        prev = comp[k - 2] if k >= 2 else 0
        return tuple(
            (comp[pos - 1] + 1, n - k + pos + 1) for pos in range(1, k)
        ) + ((prev + 1, n + 1),)
    if i_top is None:
        raise ValueError(f"variant {which!r} needs the upper index")
    ext, full, shift, tail = _interval_maps(n, k, comp, i_top)
    if which == "C0":
        return tuple(tail(pos) for pos in range(1, k + 1))
    if which == "Ck":
        return tuple(full(pos) for pos in range(1, k)) + (shift(k),)
    if which == "Ct":
        if t is None or not 1 <= t <= k - 1:
            raise ValueError(f"variant 'Ct' needs 1 <= t <= {k - 1}, got {t}")
        return (
            tuple(full(pos) for pos in range(1, t))
            + (shift(t),)
            + tuple(tail(pos) for pos in range(t + 1, k + 1))
        )
    if t is None or t2 is None or not 1 <= t <= k - 1:
        raise ValueError(f"variant {which!r} needs 1 <= t <= {k - 1}")
    top2 = k - t if which == "D" else k - t - 1
    if not 0 <= t2 <= top2:
        raise ValueError(f"variant {which!r} needs 0 <= t2 <= {top2}, got {t2}")
    if which == "D":
        if t2 == k - t:
            return ((2, 1),) * k
        return (
            tuple(full(pos) for pos in range(1, t))
            + tuple(shift(pos) for pos in range(t, t + t2 + 1))
            + tuple(tail(pos) for pos in range(t + t2 + 1, k + 1))
        )
    # "Ctt"
    if t2 == k - t - 1:
        return (
            tuple(full(pos) for pos in range(1, t))
            + tuple(shift(pos) for pos in range(t, k))
            + (tail(k),)
        )
    glued = (ext[t + t2] + 1, n - k + t + t2 + 2)
    return (
        tuple(full(pos) for pos in range(1, t))
        + tuple(shift(pos) for pos in range(t, t + t2 + 1))
        + (glued,)
        + tuple(tail(pos) for pos in range(t + t2 + 2, k + 1))
    )


def replaced_cell_box(
    n: int, k: int, subset: frozenset[int] | set[int], j: int, i_top: int
) -> Box:
    """Distinguished box after trading complement entry i_j for i_{k+1} = i_top.

    Full intervals below position j, shifted intervals from j on.  When
    i_top <= n this is the distinguished box of the subset with i_j added
    and i_top removed; the direct construction also covers i_top = n + 1.
    """
    comp = _complement(n, k, subset)
    if not 1 <= j <= k + 1:
        raise ValueError(f"position j={j} out of range 1..{k + 1}")
    _, full, shift, _ = _interval_maps(n, k, comp, i_top)
    return tuple(full(pos) for pos in range(1, j)) + tuple(
        shift(pos) for pos in range(j, k + 1)
    )


def _translation_offsets(
    n: int, k: int, comp: tuple[int, ...], i_top: int
) -> list[int]:
    """``f[t] = i_t - i_1`` for t = 1..k+1 (index 0 unused), i_{k+1} = i_top."""
    if not comp[-1] < i_top <= n + 1:
        raise ValueError(f"upper index {i_top} must lie in {comp[-1] + 1}..{n + 1}")
    ext = comp + (i_top,)
    return [0] + [ext[t - 1] - comp[0] for t in range(1, k + 2)]


def translated_set(
    n: int, subset: frozenset[int] | set[int], i_top: int
) -> frozenset[int]:
    """The subset whose complement is i_2 - i_1 < ... < i_{k+1} - i_1."""
    k = n - len(subset)
    comp = _complement(n, k, subset)
    f = _translation_offsets(n, k, comp, i_top)
    return frozenset(range(1, n + 1)) - frozenset(f[2 : k + 2])


def translated_box(
    n: int, k: int, subset: frozenset[int] | set[int], i_top: int, t: int
) -> Box:
    """Box t = 0..k of the telescoping family for the translated subset.

    Writing f_t = i_t - i_1, box 0 is the product of the tails
    f_t + 1 .. f_{t+1}; box t >= 1 keeps shifted intervals below t, the
    widened interval f_t + 1 .. n - k + t + 1 at t, and tails above t.
    """
    comp = _complement(n, k, subset)
    f = _translation_offsets(n, k, comp, i_top)
    if not 0 <= t <= k:
        raise ValueError(f"box index {t} out of range 0..{k}")
    if t == 0:
        return tuple((f[pos] + 1, f[pos + 1]) for pos in range(1, k + 1))
    return (
        tuple((f[pos + 1] + 1, n - k + pos + 1) for pos in range(1, t))
        + ((f[t] + 1, n - k + t + 1),)
        + tuple((f[pos] + 1, f[pos + 1]) for pos in range(t + 1, k + 1))
    )


def translated_partial_box(
    n: int, k: int, subset: frozenset[int] | set[int], i_top: int, t: int
) -> Box:
    """Half-open member t = 1..k+1 of the translated telescoping family:
    shifted intervals below t, tails from t on."""
    comp = _complement(n, k, subset)
    f = _translation_offsets(n, k, comp, i_top)
    if not 1 <= t <= k + 1:
        raise ValueError(f"box index {t} out of range 1..{k + 1}")
    return tuple((f[pos + 1] + 1, n - k + pos + 1) for pos in range(1, t)) + tuple(
        (f[pos] + 1, f[pos + 1]) for pos in range(t, k + 1)
    )


def lshape_partition(a: int, b: int) -> list[Box]:
    """Cut the rectangle (a..b) x (a..b+1) into nested L-shaped pairs.

    For l = 0..b-a the two pieces at level l are the row block
    (a..b-l) x {b-l+1} and the column block {b-l} x (a..b-l).  Together
    they partition the rectangle.
    """
    if a > b:
        raise ValueError(f"rectangle {a}..{b} is empty")
    pieces: list[Box] = []
    for l in range(b - a + 1):
        edge = b - l
        pieces.append(((a, edge), (edge + 1, edge + 1)))
        pieces.append(((edge, edge), (a, edge)))
    return pieces


def tuple_to_weyl(n: int, k: int, r: tuple[int, ...]) -> WeylElement:
    """Evaluate the staggered word of a box member tuple.

    >>> tuple_to_weyl(2, 1, (2,)).perm
    (1, 3, 2)
    """
    if len(r) != k:
        raise ValueError(f"expected a {k}-tuple, got {r}")
    for j, rj in enumerate(r, start=1):
        if not 1 <= rj <= n - k + j + 1:
            raise ValueError(f"entry {rj} at position {j} out of range")
    return coxeter.from_word(n, coxeter.tuple_word(n, k, r))


def _signed_indicator(terms: list[tuple[int, Box]]) -> dict[tuple[int, ...], int]:
    """Nonzero entries of a signed sum of box indicator vectors."""
    total: Counter = Counter()
    for sign, box in terms:
        for member in box_elements(box):
            total[member] += sign
    return {key: val for key, val in total.items() if val != 0}


def _disjoint_union_equals(parts: list[Box], whole: Box) -> bool:
    counted: Counter = Counter()
    for part in parts:
        counted.update(box_elements(part))
    if any(mult != 1 for mult in counted.values()):
        return False
    return set(counted) == set(box_elements(whole))


def verify_box_partitions(
    n: int, k: int, subset: frozenset[int] | set[int], i_top: int
) -> Report:
    """Check every box-cutting identity for one subset and upper index.

    Families checked, all exhaustively in t and t2:

    - the distinguished box is the disjoint union of C0, Ct (t = 1..k-1)
      and Ck;
    - each Ct equals the alternating sum over t2 of the Ctt boxes, as an
      identity of indicator vectors;
    - each Ctt splits into two consecutive D boxes, the extreme Ctt equals
      the extreme D, and D at t2 = 0 is Ct;
    - the translated family telescopes: the alternating sum of its boxes
      is the distinguished box of the translated subset, its box 0 shifted
      entrywise by i_1 is C0, and consecutive partial boxes glue;
    - trading complement entry i_j for i_top glues with the extreme Ctt of
      the same j into one closed box (j = 1..k-1; at j = k the traded box
      is Ck, at j = k+1 the trade is trivial), and when i_top <= n the
      traded box agrees with the distinguished box of the modified subset;
    - the long-interval box contains the distinguished box when i_k = n;
    - every rectangle (a..b) x (a..b+1) with b <= n is partitioned by its
      L-shaped pieces.
    """
    comp = _complement(n, k, subset)
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

    def variant(which: str, t: int | None = None, t2: int | None = None) -> Box:
        return cell_box_variant(n, k, subset, i_top, which, t, t2)

    base = cell_box(n, k, subset)

    pieces = [variant("C0")] + [variant("Ct", t) for t in range(1, k)] + [variant("Ck")]
    record(_disjoint_union_equals(pieces, base), {"identity": "main partition"})

    for t in range(1, k):
        terms = [((-1) ** t2, variant("Ctt", t, t2)) for t2 in range(k - t)]
        terms.append((-1, variant("Ct", t)))
        record(not _signed_indicator(terms), {"identity": "alternating cut", "t": t})
        for t2 in range(k - t - 1):
            record(
                _disjoint_union_equals(
                    [variant("D", t, t2), variant("D", t, t2 + 1)],
                    variant("Ctt", t, t2),
                ),
                {"identity": "half-open split", "t": t, "t2": t2},
            )
        record(
            variant("Ctt", t, k - t - 1) == variant("D", t, k - t - 1),
            {"identity": "extreme boxes agree", "t": t},
        )
        record(variant("D", t, 0) == variant("Ct", t), {"identity": "D0 is Ct", "t": t})

    tset = translated_set(n, subset, i_top)
    terms = [
        ((-1) ** (k - t), translated_box(n, k, subset, i_top, t)) for t in range(k + 1)
    ]
    terms.append((-1, cell_box(n, k, tset)))
    record(not _signed_indicator(terms), {"identity": "translated telescope"})
    shifted0 = tuple(
        (lo + comp[0], hi + comp[0])
        for lo, hi in translated_box(n, k, subset, i_top, 0)
    )
    record(shifted0 == variant("C0"), {"identity": "translated box 0 shifts to C0"})
    for t in range(1, k + 1):
        record(
            _disjoint_union_equals(
                [
                    translated_partial_box(n, k, subset, i_top, t),
                    translated_partial_box(n, k, subset, i_top, t + 1),
                ],
                translated_box(n, k, subset, i_top, t),
            ),
            {"identity": "translated glue", "t": t},
        )
    record(
        translated_partial_box(n, k, subset, i_top, 1)
        == translated_box(n, k, subset, i_top, 0),
        {"identity": "translated partial 1"},
    )
    record(
        translated_partial_box(n, k, subset, i_top, k + 1) == cell_box(n, k, tset),
        {"identity": "translated partial top"},
    )

    _, full, shift, _ = _interval_maps(n, k, comp, i_top)
    for j in range(1, k):
        closed = (
            tuple(full(pos) for pos in range(1, j))
            + tuple(shift(pos) for pos in range(j, k))
            + ((comp[k - 1] + 1, n + 1),)
        )
        record(
            _disjoint_union_equals(
                [replaced_cell_box(n, k, subset, j, i_top), variant("Ctt", j, k - j - 1)],
                closed,
            ),
            {"identity": "trade glue", "j": j},
        )
    record(
        replaced_cell_box(n, k, subset, k, i_top) == variant("Ck"),
        {"identity": "trade at top position"},
    )
    record(
        replaced_cell_box(n, k, subset, k + 1, i_top) == base,
        {"identity": "trade is trivial at k+1"},
    )
    if i_top <= n:
        for j in range(1, k + 1):
            traded = modified_set(subset, {i_top}, {comp[j - 1]})
            record(
                replaced_cell_box(n, k, subset, j, i_top) == cell_box(n, k, traded),
                {"identity": "trade matches modified subset", "j": j},
            )

    if comp[-1] == n:
        record(
            set(box_elements(base)) <= set(box_elements(variant("CIn"))),
            {"identity": "long box contains distinguished box"},
        )

    for a in range(1, n + 1):
        for b in range(a, n + 1):
            rect = ((a, b), (a, b + 1))
            record(
                _disjoint_union_equals(lshape_partition(a, b), rect),
                {"identity": "L-shaped partition", "a": a, "b": b},
            )

    return make_report(
        "box_partitions",
        {"n": n, "k": k, "subset": sorted(subset), "i_top": i_top},
        instances,
        failures,
        witness=witness,
    )


def coset_representative(
    w: WeylElement, subgroup_elements: list[WeylElement]
) -> WeylElement:
    """Canonical representative of w times the listed subgroup: the member
    of smallest length, ties broken by one-line form."""
    return min(
        (coxeter.multiply(w, u) for u in subgroup_elements),
        key=coxeter.sort_key,
    )


def verify_coset_decompositions(n: int) -> Report:
    """Check the coset bookkeeping used everywhere downstream, exhaustively.

    For every k = 1..n, with J the generator set {1, ..., n-k}:

    - the staggered words over the full box enumerate the quotient modulo
      the J-subgroup bijectively, so its size is (n+1)!/(n-k+1)!;
    - collapsing by one further generator j > n-k merges cosets in fibers
      of size 2 (j >= n-k+2, the partner differing by s_j on the right) or
      n-k+2 (j = n-k+1, the partners differing by the runs ending at
      n-k+1);
    - for every weakly increasing admissible tuple a, the product of the
      interval subgroups for a times the J-subgroup is exactly the disjoint
      union of the staggered-word cosets with entries bounded below by a;
    - trading the generators n-k+1, ..., n-k+m of an initial interval for
      m chosen smaller indices removes exactly those indices.
    """
    coxeter._check_enum_rank(n)
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

    group = coxeter.all_elements(n)
    for k in range(1, n + 1):
        jset = jk_set(n, k)
        jsub = coxeter.parabolic_subgroup(n, jset)
        expected = 1
        for j in range(1, k + 1):
            expected *= n - k + j + 1

        full_box = tuple((1, n - k + j + 1) for j in range(1, k + 1))
        keys = {
            r: coset_representative(tuple_to_weyl(n, k, r), jsub)
            for r in box_elements(full_box)
        }
        record(
            len(set(keys.values())) == len(keys),
            {"identity": "staggered words are distinct", "k": k},
        )
        all_keys = {coset_representative(w, jsub) for w in group}
        record(
            set(keys.values()) == all_keys and len(all_keys) == expected,
            {"identity": "staggered words cover the quotient", "k": k},
        )

        for j in range(n - k + 1, n + 1):
            bigger = coxeter.parabolic_subgroup(n, jset | {j})
            fibers: dict[WeylElement, set[WeylElement]] = {}
            for w in group:
                fibers.setdefault(
                    coset_representative(w, bigger), set()
                ).add(coset_representative(w, jsub))
            if j >= n - k + 2:
                sj = coxeter.simple_reflection(n, j)
                for rep, fiber in fibers.items():
                    expected_fiber = {
                        coset_representative(rep, jsub),
                        coset_representative(coxeter.multiply(rep, sj), jsub),
                    }
                    record(
                        fiber == expected_fiber and len(fiber) == 2,
                        {"identity": "two-point fiber", "k": k, "j": j,
                         "rep": rep.perm},
                    )
            else:
                for rep, fiber in fibers.items():
                    expected_fiber = {
                        coset_representative(
                            coxeter.multiply(
                                rep, coxeter.segment_element(n, r, n - k + 1)
                            ),
                            jsub,
                        )
                        for r in range(1, n - k + 3)
                    }
                    record(
                        fiber == expected_fiber and len(fiber) == n - k + 2,
                        {"identity": "interval fiber", "k": k, "rep": rep.perm},
                    )

        tuple_ranges = [range(1, n - k + j + 2) for j in range(1, k + 1)]
        for a in itertools.product(*tuple_ranges):
            if any(a[j] < a[j - 1] for j in range(1, k)):
                continue
            elements = set(jsub)
            for j in range(1, k + 1):
                gens = [
                    coxeter.simple_reflection(n, i)
                    for i in range(a[j - 1], n - k + j + 1)
                ]
                frontier = list(elements)
                while frontier:
                    cur = frontier.pop()
                    for g in gens:
                        nxt = coxeter.multiply(g, cur)
                        if nxt not in elements:
                            elements.add(nxt)
                            frontier.append(nxt)
            bounded_box = tuple((a[j - 1], n - k + j + 1) for j in range(1, k + 1))
            covered: set[WeylElement] = set()
            disjoint = True
            for r in box_elements(bounded_box):
                w = tuple_to_weyl(n, k, r)
                coset = {coxeter.multiply(w, u) for u in jsub}
                if covered & coset:
                    disjoint = False
                covered |= coset
            record(
                disjoint and covered == elements,
                {"identity": "interval subgroup product", "k": k, "a": list(a)},
            )

        for m in range(1, k + 1):
            pick_ranges = [range(1, n - k + pos + 1) for pos in range(1, m + 1)]
            for picks in itertools.product(*pick_ranges):
                if any(picks[pos] <= picks[pos - 1] for pos in range(1, m)):
                    continue
                traded = jset
                for pos, pick in enumerate(picks, start=1):
                    gen = n - k + pos
                    if pick == gen:
                        continue
                    traded = modified_set(traded, {pick}, {gen})
                prefix = frozenset(range(1, n - k + m + 1))
                record(
                    traded == prefix - set(picks),
                    {"identity": "trade into initial interval", "k": k, "m": m,
                     "picks": list(picks)},
                )

    return make_report(
        "coset_decompositions", {"n": n}, instances, failures, witness=witness
    )

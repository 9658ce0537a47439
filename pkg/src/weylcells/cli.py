"""Batch verification front end.

Each subcommand runs one module's check suite over a parameter grid and
emits a JSON array of result records; ``all`` chains every suite.  The
process exits zero exactly when every record is in order.  Reports are
sorted by check name and parameters, so the output is independent of
execution order, and a fixed seed makes the whole run reproducible apart
from the timing fields.

Every suite carries at least one deliberate negative control: a check that
asserts something false and therefore must report failure.  The harness
inverts these (a failing control counts as success, a passing one as
failure), so a checker that silently stopped failing cannot go unnoticed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import building, cells, coxeter, exactfield, harmonic, indexsets, spmodel
from .report import Report, make_report

Entry = tuple[Report, bool]

FINITE_PAIRS = [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)]
IWASAWA_PAIRS = [(1, 2), (2, 2), (2, 3), (3, 2)]


def _timed(fn, *args, **kwargs) -> Report:
    start = time.perf_counter()
    rep = fn(*args, **kwargs)
    rep["elapsed_ms"] = int((time.perf_counter() - start) * 1000)
    return rep


def _mix(seed: int, *parts: int) -> int:
    out = seed & 0xFFFFFFFF
    for p in parts:
        out = (out * 1000003 + p + 7) & 0xFFFFFFFF
    return out


def _subsets(n: int) -> list[frozenset[int]]:
    out = []
    for mask in range(1 << n):
        out.append(frozenset(i for i in range(1, n + 1) if mask >> (i - 1) & 1))
    return sorted(out, key=sorted)


def _want_subset(args, subset: frozenset[int]) -> bool:
    return args.I is None or frozenset(args.I) == subset


def _want_k(args, k: int) -> bool:
    return args.k is None or args.k == k


def _suite_weyl(args, seed: int) -> list[Entry]:
    top = args.n if args.n is not None else 5
    entries: list[Entry] = []
    for n in range(1, top + 1):
        entries.append((_timed(coxeter.verify_shift_identity, n), False))
        entries.append((_timed(coxeter.verify_translation_identity, n), False))
        for k in range(1, n + 1):
            if not _want_k(args, k):
                continue
            for i in range(n + 1):
                entries.append(
                    (
                        _timed(coxeter.verify_rotation_inverse_factorization, n, k, i),
                        False,
                    )
                )
        for k in range(1, n + 1):
            if not _want_k(args, k):
                continue
            for subset in spmodel.admissible_subsets(n, k):
                if not _want_subset(args, subset):
                    continue
                comp = indexsets.complement_tuple(n, subset)
                for i_top in range(comp[-1] + 1, n + 2):
                    entries.append(
                        (
                            _timed(
                                indexsets.verify_box_partitions, n, k, subset, i_top
                            ),
                            False,
                        )
                    )
    entries.append((_timed(_negative_control_commutation), True))
    return entries


def _negative_control_commutation() -> Report:
    """Deliberately false: adjacent simple reflections commute."""
    n = 2
    instances = 0
    failures = 0
    witness = None
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            u = coxeter.simple_reflection(n, i)
            v = coxeter.simple_reflection(n, j)
            instances += 1
            if coxeter.multiply(u, v) != coxeter.multiply(v, u):
                failures += 1
                if witness is None:
                    witness = {"i": i, "j": j}
    return make_report(
        "negative_control_commutation",
        {"n": n},
        instances,
        failures,
        witness=witness,
        extra={"negative_control": True},
    )


def _suite_decomp(args, seed: int) -> list[Entry]:
    top = args.n if args.n is not None else 5
    entries: list[Entry] = []
    for n in range(1, top + 1):
        entries.append((_timed(indexsets.verify_coset_decompositions, n), False))
    entries.append((_timed(_negative_control_initial_run), True))
    return entries


def _negative_control_initial_run() -> Report:
    """Deliberately false: the triangular-block index set is everything."""
    n = 2
    got = indexsets.jk_set(n, 1)
    full = frozenset(range(1, n + 1))
    ok = got == full
    return make_report(
        "negative_control_initial_run",
        {"n": n, "k": 1},
        1,
        0 if ok else 1,
        witness=None if ok else {"got": sorted(got), "claimed": sorted(full)},
        extra={"negative_control": True},
    )


def _finite_pairs_of_sets(n: int) -> list[tuple[frozenset[int], frozenset[int]]]:
    if n <= 2:
        sets = _subsets(n)
        return [(a, b) for a in sets for b in sets]
    full = frozenset(range(1, n + 1))
    chosen = [
        (frozenset(), frozenset()),
        (frozenset(), full),
        (full, frozenset()),
        (frozenset({1}), frozenset({3})),
        (frozenset({1, 2}), frozenset({2, 3})),
        (frozenset({2}), frozenset({1, 3})),
    ]
    return chosen


def _suite_finite(args, seed: int) -> list[Entry]:
    if args.n is not None and args.q is not None:
        pairs = [(args.n, args.q)]
    else:
        pairs = list(FINITE_PAIRS)
    entries: list[Entry] = []
    for n, q in pairs:
        for left, right in _finite_pairs_of_sets(n):
            entries.append(
                (_timed(cells.verify_bruhat_bijection, n, q, left, right), False)
            )
        for k in range(1, n + 1):
            if not _want_k(args, k):
                continue
            for subset in spmodel.admissible_subsets(n, k):
                if not _want_subset(args, subset):
                    continue
                entries.append(
                    (
                        _timed(cells.verify_product_cell_decomposition, n, q, k, subset),
                        False,
                    )
                )
        if n >= 3:
            entries.append(
                (
                    _timed(
                        cells.verify_commuting_parahoric_products,
                        n,
                        q,
                        frozenset({1}),
                        frozenset({3}),
                    ),
                    False,
                )
            )
    entries.append((_timed(_negative_control_flat_cells), True))
    return entries


def _negative_control_flat_cells() -> Report:
    """Deliberately false: every double coset has the triangular order."""
    n, q = 1, 2
    cells_by_w = cells.bruhat_cells(n, q)
    b = cells.borel_order(n, q)
    instances = 0
    failures = 0
    witness = None
    for w, codes in sorted(cells_by_w.items(), key=lambda kv: coxeter.sort_key(kv[0])):
        instances += 1
        if codes.size != b:
            failures += 1
            if witness is None:
                witness = {"perm": list(w.perm), "size": int(codes.size)}
    return make_report(
        "negative_control_flat_cells",
        {"n": n, "q": q},
        instances,
        failures,
        witness=witness,
        extra={"negative_control": True},
    )


def _suite_iwasawa(args, seed: int) -> list[Entry]:
    if args.n is not None and args.q is not None:
        pairs = [(args.n, args.q)]
    else:
        pairs = list(IWASAWA_PAIRS)
    samples = args.samples if args.samples is not None else 200
    perturbations = max(1, samples // 10)
    entries: list[Entry] = []
    for n, q in pairs:
        start = time.perf_counter()
        reports = cells.verify_iwasawa_normal_form_sampled(
            n, q, samples=samples, perturbations=perturbations,
            seed=_mix(seed, n, q),
        )
        elapsed = int((time.perf_counter() - start) * 1000)
        for rep in reports:
            rep["elapsed_ms"] = elapsed
            entries.append((rep, False))
        triples = max(20, samples // 2)
        sets = _subsets(n)
        for left_set in sets:
            for right_set in sets:
                entries.append(
                    (
                        _timed(
                            cells.verify_iwasawa_double_coset_sampled,
                            n,
                            q,
                            left_set,
                            right_set,
                            samples=triples,
                            seed=_mix(seed, n, q, 1),
                            perturbations=5,
                        ),
                        False,
                    )
                )
    entries.append((_timed(_negative_control_identity_class), True))
    return entries


def _negative_control_identity_class() -> Report:
    """Deliberately false: a strictly lower unipotent matrix factors over the
    identity permutation."""
    q = 2
    g = [
        [exactfield.one(q), exactfield.zero(q)],
        [exactfield.t_power(q, -1), exactfield.one(q)],
    ]
    fac = cells.iwasawa_class(g, check=True)
    ok = fac.w == coxeter.identity(1)
    return make_report(
        "negative_control_identity_class",
        {"n": 1, "q": q},
        1,
        0 if ok else 1,
        witness=None if ok else {"perm": list(fac.w.perm)},
        extra={"negative_control": True},
    )


def _gauss_binomial(m: int, d: int, q: int) -> int:
    num = 1
    den = 1
    for i in range(d):
        num *= q ** (m - i) - 1
        den *= q ** (i + 1) - 1
    assert num % den == 0
    return num // den


def _ball_count_report(n: int, q: int, radius: int) -> Report:
    instances = 0
    failures = 0
    witness = None
    chart = building.ball(n, q, radius)
    counts = []
    for r in range(radius + 1):
        counts.append(sum(1 for d in chart.distances.values() if d == r))
    if n == 1:
        for r in range(1, radius + 1):
            instances += 1
            expected = (q + 1) * q ** (r - 1)
            if counts[r] != expected:
                failures += 1
                if witness is None:
                    witness = {"radius": r, "count": counts[r], "expected": expected}
    else:
        link = sum(_gauss_binomial(n + 1, d, q) for d in range(1, n + 1))
        instances += 1
        if counts[1] != link:
            failures += 1
            witness = {"radius": 1, "count": counts[1], "expected": link}
    return make_report(
        "ball_counts",
        {"n": n, "q": q, "radius": radius},
        instances,
        failures,
        witness=witness,
        extra={"shell_counts": counts},
    )


def _export_dot(path: str, n: int, q: int, radius: int) -> None:
    chart = building.ball(n, q, radius)
    order = {v: idx for idx, v in enumerate(chart.distances)}
    lines = [f"graph ball_n{n}_q{q}_r{radius} {{"]
    for v, idx in order.items():
        lines.append(
            f'  {idx} [label="t{building.vertex_type(v)} d{chart.distances[v]}"];'
        )
    seen = set()
    for v, nbs in chart.adjacency.items():
        for nb in nbs:
            a, b = order[v], order[nb]
            key = (min(a, b), max(a, b))
            if key not in seen:
                seen.add(key)
                lines.append(f"  {key[0]} -- {key[1]};")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _suite_building(args, seed: int) -> list[Entry]:
    q = args.q if args.q is not None else 2
    ns = [args.n] if args.n is not None else [1, 2, 3]
    entries: list[Entry] = []
    for n in ns:
        entries.append((_timed(building.verify_rotation_action, n, q), False))
        limit = building.BALL_RADIUS_LIMITS[n]
        radius = min(args.radius, limit) if args.radius is not None else limit
        entries.append((_timed(_ball_count_report, n, q, radius), False))
    for n in [m for m in ns if m <= 2]:
        for k in range(1, n + 1):
            for subset in spmodel.admissible_subsets(n, k):
                if not _want_subset(args, subset):
                    continue
                comp = indexsets.complement_tuple(n, subset)
                for j in range(1, len(comp) + 1):
                    entries.append(
                        (
                            _timed(
                                building.verify_parahoric_orbits,
                                n,
                                q,
                                subset,
                                j,
                                seed=_mix(seed, n, q, j),
                            ),
                            False,
                        )
                    )
    if args.dot:
        n0 = ns[0]
        radius = min(
            args.radius if args.radius is not None else 2,
            building.BALL_RADIUS_LIMITS[n0],
        )
        _export_dot(args.dot, n0, q, radius)
    entries.append((_timed(_negative_control_rigid_pointer), True))
    return entries


def _negative_control_rigid_pointer() -> Report:
    """Deliberately false: rotating the pointer of an edge changes nothing."""
    edge = building.standard_cell(1, 2, frozenset())
    ok = building.rotate_pointer(edge) == edge
    return make_report(
        "negative_control_rigid_pointer",
        {"n": 1, "q": 2},
        1,
        0 if ok else 1,
        witness=None if ok else {"fact": "rotation moved the distinguished vertex"},
        extra={"negative_control": True},
    )


def _lshape_grid(n: int, k: int) -> list[tuple]:
    ws = [coxeter.identity(n)] + [
        coxeter.rotation_element(n, i) for i in range(1, n + 1)
    ]
    out = []
    for b in range(n - k + 2, n + 1):
        for a in range(1, b + 1):
            for w in ws:
                out.append((w, coxeter.identity(n), a, b, b))
            if b < n:
                braid = coxeter.multiply(
                    coxeter.simple_reflection(n, b + 1),
                    coxeter.simple_reflection(n, b),
                )
                out.append((coxeter.identity(n), braid, a, b, b + 1))
    return out


def _suite_sp(args, seed: int) -> list[Entry]:
    top = args.n if args.n is not None else 4
    mod = args.mod
    entries: list[Entry] = []
    for n in range(1, top + 1):
        for k in range(1, n + 1):
            if not _want_k(args, k):
                continue
            entries.append((_timed(spmodel.verify_tail_sign_relation, n, k, mod), False))
            entries.append((_timed(spmodel.verify_rotation_stability, n, k, mod), False))
            for subset in spmodel.admissible_subsets(n, k):
                if not _want_subset(args, subset):
                    continue
                comp = indexsets.complement_tuple(n, subset)
                for i_top in range(comp[-1] + 1, n + 2):
                    entries.append(
                        (
                            _timed(
                                spmodel.verify_product_reduction,
                                n,
                                k,
                                subset,
                                i_top,
                                mod,
                            ),
                            False,
                        )
                    )
                if comp[-1] == n:
                    entries.append(
                        (_timed(spmodel.verify_hc2_model, n, k, subset, mod), False)
                    )
                for i_top in range(comp[-1] + 1, n + 1):
                    entries.append(
                        (
                            _timed(spmodel.verify_hc4_model, n, k, subset, i_top, mod),
                            False,
                        )
                    )
            for params in _lshape_grid(n, k):
                w, w_prime, a, b, b_prime = params
                entries.append(
                    (
                        _timed(
                            spmodel.verify_lshape_relation,
                            n,
                            k,
                            w,
                            w_prime,
                            a,
                            b,
                            b_prime,
                            mod,
                        ),
                        False,
                    )
                )
    entries.append((_timed(_negative_control_basis_vector, min(top, 2), mod), True))
    return entries


def _negative_control_basis_vector(n: int, mod: int | None) -> Report:
    """Deliberately false: a single coset indicator is degenerate."""
    f = spmodel.cell_function(coxeter.identity(n), 1)
    member, _ = spmodel.in_degenerate_span(f, mod)
    return make_report(
        "negative_control_basis_vector",
        {"n": n, "k": 1, "mod": mod},
        1,
        0 if member else 1,
        witness=None if member else {"fact": "basis vector is outside the span"},
        extra={"negative_control": True},
    )


def _suite_harmonic(args, seed: int) -> list[Entry]:
    entries: list[Entry] = []
    trials = args.samples if args.samples is not None else 6
    if args.q is not None:
        duals = [(args.q, min(args.radius or 3, building.BALL_RADIUS_LIMITS[1]))]
    else:
        duals = [(2, min(args.radius or 3, 4)), (3, min(args.radius or 2, 3))]
    for q, radius in duals:
        entries.append(
            (
                _timed(
                    harmonic.verify_tree_duality,
                    q,
                    radius,
                    trials,
                    _mix(seed, q, radius),
                ),
                False,
            )
        )
    q2 = args.q if args.q in (2, 3) else 2
    for subset in [frozenset({2}), frozenset({1}), frozenset()]:
        if not _want_subset(args, subset):
            continue
        comp = indexsets.complement_tuple(2, subset)
        for j in range(1, len(comp) + 1):
            for l in range(j, len(comp) + 1):
                entries.append(
                    (
                        _timed(
                            harmonic.verify_refinement_exchange, 2, q2, subset, j, l
                        ),
                        False,
                    )
                )
    for n in (1, 2):
        for k in range(1, n + 1):
            if not _want_k(args, k):
                continue
            entries.append(
                (_timed(harmonic.verify_harmonicity_reductions, n, q2, k), False)
            )
    entries.append((_timed(_negative_control_corrupted_cochain, args.mod), True))
    return entries


def _negative_control_corrupted_cochain(mod: int | None) -> Report:
    """A one-value corruption that the completion checker must catch.

    The corrupted edge points at the center, where every completion is
    inside the chart; corruption on a boundary-pointed edge could hide in
    a skipped instance.
    """
    q = 2
    chart = building.ball(1, q, 2)
    mu = harmonic.boundary_measure(q, [(1, 0, 1), (0, 1, -1)])
    h = harmonic.measure_cochain(mu, chart, mod)
    target = min(
        (c for c in h.values if building.cell_vertex(c, 0) == chart.center),
        key=harmonic._cell_key,
    )
    h.values[target] = h.values[target] + 1
    rep = harmonic.check_hc2(h, chart)
    rep["check"] = "negative_control_corrupted_cochain"
    rep["negative_control"] = True
    return rep


SUITES = {
    "weyl": _suite_weyl,
    "decomp": _suite_decomp,
    "finite": _suite_finite,
    "iwasawa": _suite_iwasawa,
    "building": _suite_building,
    "sp": _suite_sp,
    "harmonic": _suite_harmonic,
}


def _parse_index_set(text: str) -> list[int]:
    if text.strip() == "":
        return []
    return [int(part) for part in text.split(",")]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weylcells",
        description="run the verification suites and emit JSON reports",
    )
    parser.add_argument("suite", choices=sorted(SUITES) + ["all"])
    parser.add_argument("--n", type=int, default=None, help="rank parameter")
    parser.add_argument("--q", type=int, default=None, help="residue field size")
    parser.add_argument("--k", type=int, default=None, help="chain length filter")
    parser.add_argument(
        "--I",
        type=_parse_index_set,
        default=None,
        metavar="LIST",
        help="comma separated generator indices; empty string for the empty set",
    )
    parser.add_argument("--radius", type=int, default=None, help="ball radius")
    parser.add_argument("--samples", type=int, default=None, help="sample count")
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--report", default=None, metavar="PATH",
                        help="write the JSON report here instead of stdout")
    parser.add_argument("--dot", default=None, metavar="PATH",
                        help="write a DOT 1-skeleton export (building suite)")
    parser.add_argument("--mod", type=int, default=None, metavar="M",
                        help="coefficient torsion for the model checks")
    return parser


def _canonical_key(entry: Entry) -> tuple[str, str]:
    rep, _ = entry
    return rep["check"], json.dumps(rep["params"], sort_keys=True, default=str)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    entries: list[Entry] = []
    for name in names:
        try:
            entries.extend(SUITES[name](args, args.seed))
        except ValueError as exc:
            entries.append(
                (
                    make_report(
                        f"{name}_suite",
                        {"flags": {
                            key: val
                            for key, val in vars(args).items()
                            if key not in ("suite", "report", "dot")
                            and val is not None
                        }},
                        0,
                        0,
                        status="skipped",
                        extra={"reason": str(exc)},
                    ),
                    False,
                )
            )
    entries.sort(key=_canonical_key)
    reports = [rep for rep, _ in entries]
    payload = json.dumps(reports, indent=2, sort_keys=True, default=str)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    ok = True
    inverted = 0
    passing = 0
    for rep, negated in entries:
        if negated:
            if rep["status"] == "fail":
                inverted += 1
            else:
                ok = False
        elif rep["status"] == "pass":
            passing += 1
        else:
            ok = False
    leftover = len(entries) - passing - inverted
    print(
        f"{len(entries)} checks: {passing} pass, {inverted} negative controls "
        f"failed as required, {leftover} not in order",
        file=sys.stderr,
    )
    return 0 if ok else 1

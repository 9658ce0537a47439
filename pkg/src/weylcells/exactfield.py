"""Exact arithmetic in the field of rational functions over a small prime field.

Scalars are quotients of polynomials in one variable ``t`` over the integers
modulo a prime q.  The local structure all higher layers rely on is the
order of vanishing at t = 0: :func:`valuation` (with infinity for 0),
:func:`reduce_mod_pi` (the residue at t = 0, defined for nonnegative
valuation), and :func:`laurent_truncate` (the initial segment of the
expansion around t = 0, itself an exact field element).

Polynomials are tuples of coefficients in ascending order with no trailing
zeros.  A :class:`RatFunc` keeps an unreduced numerator/denominator pair
and cancels only when an operation needs the canonical form (equality,
hashing, printing) or when degrees pass a threshold; valuation and residue
read off the unreduced pair directly, which keeps elimination loops free
of gcd work.  The canonical form has coprime parts and monic denominator.
"""

from __future__ import annotations

import itertools
import math
from random import Random

from .coxeter import WeylElement, apply

SUPPORTED_PRIMES = (2, 3, 5, 7)

NORMALIZE_THRESHOLD = 48
DEGREE_CAP = 64

Poly = tuple[int, ...]


def _trim(coeffs: list[int]) -> Poly:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def poly_add(q: int, a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % q
    return _trim(out)


def poly_neg(q: int, a: Poly) -> Poly:
    return tuple((-c) % q for c in a)


def poly_sub(q: int, a: Poly, b: Poly) -> Poly:
    return poly_add(q, a, poly_neg(q, b))


def poly_mul(q: int, a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % q
    return _trim(out)


def poly_divmod(q: int, a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], -1, q)
    rem = list(a)
    quo = [0] * max(0, len(a) - len(b) + 1)
    for top in range(len(a) - 1, len(b) - 2, -1):
        coeff = (rem[top] * inv_lead) % q
        if coeff:
            shift = top - (len(b) - 1)
            quo[shift] = coeff
            for i, cb in enumerate(b):
                rem[shift + i] = (rem[shift + i] - coeff * cb) % q
    return _trim(quo), _trim(rem)


def poly_gcd(q: int, a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, poly_divmod(q, a, b)[1]
    if a:
        inv_lead = pow(a[-1], -1, q)
        a = tuple((c * inv_lead) % q for c in a)
    return a


def poly_order(a: Poly) -> int | None:
    """Index of the lowest nonzero coefficient, None for the zero polynomial."""
    for i, c in enumerate(a):
        if c:
            return i
    return None


class RatFunc:
    """A quotient of polynomials mod q, canceled lazily."""

    __slots__ = ("q", "num", "den", "_canonical")

    def __init__(self, q: int, num: Poly, den: Poly = (1,), _canonical: bool = False):
        if q not in SUPPORTED_PRIMES:
            raise ValueError(f"unsupported prime {q}")
        if not den:
            raise ZeroDivisionError("zero denominator")
        self.q = q
        self.num = num
        self.den = den
        self._canonical = _canonical
        if not _canonical and max(len(num), len(den)) - 1 > NORMALIZE_THRESHOLD:
            self._normalize()

    def _normalize(self) -> None:
        if self._canonical:
            return
        q, num, den = self.q, self.num, self.den
        if not num:
            den = (1,)
        else:
            g = poly_gcd(q, num, den)
            if len(g) > 1:
                num = poly_divmod(q, num, g)[0]
                den = poly_divmod(q, den, g)[0]
            inv_lead = pow(den[-1], -1, q)
            if inv_lead != 1:
                num = tuple((c * inv_lead) % q for c in num)
                den = tuple((c * inv_lead) % q for c in den)
        if max(len(num), len(den)) - 1 > DEGREE_CAP:
            raise OverflowError(
                f"degree {max(len(num), len(den)) - 1} exceeds the cap {DEGREE_CAP}; "
                "the computation has outgrown the intended desk scale"
            )
        self.num = num
        self.den = den
        self._canonical = True

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def _coerce(self, other: object) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.q != self.q:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, int):
            return const(self.q, other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> "RatFunc":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        q = self.q
        if self.den == rhs.den:
            return RatFunc(q, poly_add(q, self.num, rhs.num), self.den)
        num = poly_add(
            q, poly_mul(q, self.num, rhs.den), poly_mul(q, rhs.num, self.den)
        )
        return RatFunc(q, num, poly_mul(q, self.den, rhs.den))

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(self.q, poly_neg(self.q, self.num), self.den, self._canonical)

    def __sub__(self, other: object) -> "RatFunc":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> "RatFunc":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other: object) -> "RatFunc":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        q = self.q
        return RatFunc(
            q, poly_mul(q, self.num, rhs.num), poly_mul(q, self.den, rhs.den)
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "RatFunc":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        if not rhs.num:
            raise ZeroDivisionError("division by the zero function")
        q = self.q
        return RatFunc(
            q, poly_mul(q, self.num, rhs.den), poly_mul(q, self.den, rhs.num)
        )

    def __rtruediv__(self, other: object) -> "RatFunc":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return rhs / self

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = const(self.q, other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        if self.q != other.q:
            return False
        self._normalize()
        other._normalize()
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        self._normalize()
        return hash((self.q, self.num, self.den))

    def __repr__(self) -> str:
        self._normalize()

        def fmt(p: Poly) -> str:
            if not p:
                return "0"
            parts = []
            for e, c in enumerate(p):
                if not c:
                    continue
                if e == 0:
                    parts.append(str(c))
                elif e == 1:
                    parts.append("t" if c == 1 else f"{c}*t")
                else:
                    parts.append(f"t^{e}" if c == 1 else f"{c}*t^{e}")
            return " + ".join(parts)

        if self.den == (1,):
            return f"({fmt(self.num)})"
        return f"({fmt(self.num)})/({fmt(self.den)})"


def to_text(f: RatFunc) -> str:
    """Canonical textual form, round-trippable through :func:`parse_ratfunc`.

    Polynomials render as ``c0 + c1*t + c2*t^2`` with zero terms dropped;
    a nontrivial denominator follows after ``/``.
    """
    f._normalize()

    def fmt(p: Poly) -> str:
        if not p:
            return "0"
        parts = []
        for e, c in enumerate(p):
            if not c:
                continue
            if e == 0:
                parts.append(str(c))
            elif e == 1:
                parts.append("t" if c == 1 else f"{c}*t")
            else:
                parts.append(f"t^{e}" if c == 1 else f"{c}*t^{e}")
        return " + ".join(parts)

    if f.den == (1,):
        return fmt(f.num)
    return f"{fmt(f.num)} / {fmt(f.den)}"


def _parse_poly(q: int, text: str) -> Poly:
    coeffs: list[int] = []
    for raw in text.replace("-", "+-").split("+"):
        term = raw.strip().replace(" ", "")
        if not term:
            continue
        sign = 1
        if term.startswith("-"):
            sign = -1
            term = term[1:]
        if "t" in term:
            head, _, tail = term.partition("t")
            coeff = int(head.rstrip("*")) if head else 1
            exp = int(tail[1:]) if tail.startswith("^") else (1 if not tail else None)
            if exp is None:
                raise ValueError(f"malformed term {raw!r}")
        else:
            coeff = int(term)
            exp = 0
        while len(coeffs) <= exp:
            coeffs.append(0)
        coeffs[exp] = (coeffs[exp] + sign * coeff) % q
    return _trim(coeffs)


def parse_ratfunc(q: int, text: str) -> RatFunc:
    """Read the textual form ``num`` or ``num / den``.

    >>> parse_ratfunc(3, "1 + 2*t / t^2") == (one(3) + 2 * t_power(3, 1)) / t_power(3, 2)
    True
    """
    num_text, slash, den_text = text.partition("/")
    num = _parse_poly(q, num_text)
    if not slash:
        return RatFunc(q, num)
    den = _parse_poly(q, den_text)
    if not den:
        raise ValueError(f"zero denominator in {text!r}")
    return RatFunc(q, num, den)


def const(q: int, c: int) -> RatFunc:
    c %= q
    return RatFunc(q, (c,) if c else (), (1,), _canonical=True)


def zero(q: int) -> RatFunc:
    return const(q, 0)


def one(q: int) -> RatFunc:
    return const(q, 1)


def from_poly(q: int, coeffs: tuple[int, ...] | list[int]) -> RatFunc:
    return RatFunc(q, _trim([c % q for c in coeffs]))


def t_power(q: int, m: int) -> RatFunc:
    """The monomial t^m, with negative m giving 1/t^{-m}."""
    mono: Poly = (0,) * abs(m) + (1,)
    if m >= 0:
        return RatFunc(q, mono, (1,), _canonical=True)
    return RatFunc(q, (1,), mono, _canonical=True)


def valuation(f: RatFunc) -> int | float:
    """Order of vanishing at t = 0; +infinity for the zero function."""
    num_ord = poly_order(f.num)
    if num_ord is None:
        return math.inf
    den_ord = poly_order(f.den)
    assert den_ord is not None
    return num_ord - den_ord


def reduce_mod_pi(f: RatFunc) -> int:
    """The residue of an integral element at t = 0, as an integer mod q.

    Raises for negative valuation: a pole has no residue-field image.
    """
    v = valuation(f)
    if v < 0:
        raise ValueError(f"valuation {v} is negative; no residue exists")
    if v > 0 or v == math.inf:
        return 0
    num_ord = poly_order(f.num)
    den_ord = poly_order(f.den)
    return (f.num[num_ord] * pow(f.den[den_ord], -1, f.q)) % f.q


def laurent_truncate(f: RatFunc, upto: int) -> RatFunc:
    """The partial expansion of f around t = 0 through exponent upto - 1.

    The result is the exact finite sum of the terms of the expansion with
    exponent below ``upto`` (exponents may be negative).
    """
    v = valuation(f)
    if v == math.inf or v >= upto:
        return zero(f.q)
    q = f.q
    num_ord = poly_order(f.num)
    den_ord = poly_order(f.den)
    a = f.num[num_ord:]
    b = f.den[den_ord:]
    terms = upto - int(v)
    inv_b0 = pow(b[0], -1, q)
    series = [0] * terms
    for i in range(terms):
        acc = a[i] if i < len(a) else 0
        for j in range(1, min(i, len(b) - 1) + 1):
            acc -= b[j] * series[i - j]
        series[i] = (acc * inv_b0) % q
    shifted = int(v)
    if shifted >= 0:
        return RatFunc(q, _trim([0] * shifted + series))
    return RatFunc(q, _trim(series), (0,) * (-shifted) + (1,))


Matrix = list[list[RatFunc]]


def mat_identity(size: int, q: int) -> Matrix:
    return [
        [one(q) if r == c else zero(q) for c in range(size)] for r in range(size)
    ]


def mat_from_rows(q: int, rows: list[list[int]] | tuple) -> Matrix:
    return [[const(q, c) for c in row] for row in rows]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    size = len(a)
    if any(len(row) != len(b) for row in a):
        raise ValueError("shape mismatch")
    out = []
    for r in range(size):
        row = []
        for c in range(len(b[0])):
            acc = a[r][0] * b[0][c]
            for m in range(1, len(b)):
                acc = acc + a[r][m] * b[m][c]
            row.append(acc)
        out.append(row)
    return out


def mat_equal(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and all(
        len(ra) == len(rb) and all(x == y for x, y in zip(ra, rb))
        for ra, rb in zip(a, b)
    )


def mat_copy(a: Matrix) -> Matrix:
    return [row[:] for row in a]


def permutation_matrix(n: int, w: WeylElement, q: int) -> Matrix:
    """Matrix of a group element: entry (r, c) is 1 exactly when r = w(c).

    With this convention the matrix of a product is the product of the
    matrices, factors in the same order.
    """
    if w.n != n:
        raise ValueError("rank mismatch")
    size = n + 1
    out = [[zero(q) for _ in range(size)] for _ in range(size)]
    for c in range(1, size + 1):
        out[apply(w, c) - 1][c - 1] = one(q)
    return out


def y_matrix(n: int, i: int, q: int) -> Matrix:
    """Diagonal matrix with i ones followed by n + 1 - i copies of t."""
    if not 0 <= i <= n + 1:
        raise ValueError(f"index {i} out of range 0..{n + 1}")
    size = n + 1
    out = [[zero(q) for _ in range(size)] for _ in range(size)]
    for d in range(size):
        out[d][d] = one(q) if d < i else t_power(q, 1)
    return out


def mat_det(a: Matrix) -> RatFunc:
    size = len(a)
    if size > 6:
        raise ValueError("determinant supported up to size 6")
    q = a[0][0].q
    total = zero(q)
    for perm in itertools.permutations(range(size)):
        sign = 1
        for x in range(size):
            for y in range(x + 1, size):
                if perm[x] > perm[y]:
                    sign = -sign
        term = const(q, sign)
        for r in range(size):
            term = term * a[r][perm[r]]
        total = total + term
    return total


def mat_inverse(a: Matrix) -> Matrix:
    size = len(a)
    q = a[0][0].q
    work = mat_copy(a)
    out = mat_identity(size, q)
    for col in range(size):
        pivot = next((r for r in range(col, size) if work[r][col]), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        out[col], out[pivot] = out[pivot], out[col]
        inv = one(q) / work[col][col]
        work[col] = [x * inv for x in work[col]]
        out[col] = [x * inv for x in out[col]]
        for r in range(size):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
                out[r] = [x - factor * y for x, y in zip(out[r], out[col])]
    return out


def mat_reduce_mod_pi(a: Matrix) -> tuple[tuple[int, ...], ...]:
    """Entrywise residue at t = 0; every entry must be integral."""
    return tuple(tuple(reduce_mod_pi(x) for x in row) for row in a)


def mat_valuation_of_det(a: Matrix) -> int | float:
    return valuation(mat_det(a))


def random_ratfunc(q: int, rng: Random, allow_zero: bool = True) -> RatFunc:
    """A sampled scalar: valuation in -2..2, unit parts of degree up to 3."""
    if allow_zero and rng.random() < 0.15:
        return zero(q)
    v = rng.randint(-2, 2)

    def unit_poly() -> Poly:
        deg = rng.randint(0, 3)
        coeffs = [rng.randrange(1, q)] + [rng.randrange(q) for _ in range(deg)]
        return _trim(coeffs)

    return t_power(q, v) * RatFunc(q, unit_poly(), unit_poly())


def random_invertible_matrix(n: int, q: int, rng: Random) -> Matrix:
    """A sampled invertible matrix with entries from :func:`random_ratfunc`."""
    while True:
        mat = [
            [random_ratfunc(q, rng) for _ in range(n + 1)] for _ in range(n + 1)
        ]
        if mat_det(mat):
            return mat


def random_integral_matrix(n: int, q: int, rng: Random, max_deg: int = 2) -> Matrix:
    return [
        [
            from_poly(q, [rng.randrange(q) for _ in range(max_deg + 1)])
            for _ in range(n + 1)
        ]
        for _ in range(n + 1)
    ]

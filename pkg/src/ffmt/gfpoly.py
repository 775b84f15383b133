"""Finite fields F_q and polynomials over them.

Field elements are the integers ``0 .. q-1``.  For ``q = p**e`` the code of
an element is ``sum(d_i * p**i)`` where ``d_0 + d_1 x + ... + d_{e-1} x^{e-1}``
is its residue modulo the field's reduction polynomial over F_p.

A monic polynomial of degree ``n`` has a dense index in ``[0, q**n)``: the
base-q number formed by its non-leading coefficients (constant term is the
least significant digit).  Every polynomial also has a *code*, the base-q
number formed by all its coefficients, so a monic of degree ``n`` has code
``q**n + index``.
"""

from __future__ import annotations

import re
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    CoefficientOutOfRange,
    DivisionByZero,
    FieldMismatch,
    FieldTooLarge,
    NotIrreducible,
    NotMonic,
    NotPrime,
    PolySyntaxError,
)

MAX_Q = 1 << 16
# q x q multiplication table only up to this size (2^24 entries)
TABLE_Q = 1 << 12


def is_prime_int(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors_int(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class _DegreeOfZero:
    """Degree of the zero polynomial.

    Compares below every integer but refuses arithmetic, so code that forgets
    the zero case fails loudly instead of computing with -1.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "-inf"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("ffmt.NEG_INF")

    def _no_arith(self, *args):
        raise TypeError("degree of the zero polynomial does not support arithmetic")

    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = _no_arith
    __index__ = __int__ = _no_arith


NEG_INF = _DegreeOfZero()


# ---------------------------------------------------------------------------
# prime-field polynomial helpers (digit lists over F_p), used to set up F_q
# ---------------------------------------------------------------------------

def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m over F_p."""
    a = list(a)
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return _fp_trim(a[:dm])


def _fp_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _fp_trim(out)


def _fp_irreducible(m: list[int], p: int) -> bool:
    """Trial division of monic m by every monic of degree 1..deg(m)//2."""
    d = len(m) - 1
    for k in range(1, d // 2 + 1):
        for idx in range(p ** k):
            g = _digits(idx, p, k) + [1]
            if not _fp_mod(m, g, p):
                return False
    return True


def _digits(x: int, base: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        x, r = divmod(x, base)
        out.append(r)
    return out


def _from_digits(ds: Sequence[int], base: int) -> int:
    x = 0
    for d in reversed(ds):
        x = x * base + d
    return x


class FieldSpec:
    """The finite field F_q, q = p**e.

    Build instances with :func:`field_create`; they are immutable and cached,
    so two calls with the same parameters return the same object.
    """

    def __init__(self, p: int, e: int, reduction: tuple[int, ...] | None):
        self.p = p
        self.e = e
        self.q = p ** e
        self.reduction = reduction
        if e == 1:
            self._log = self._exp = None
        else:
            self._build_log_tables()

    def _elem_mul_slow(self, a: int, b: int) -> int:
        p, e = self.p, self.e
        prod = _fp_mul(_fp_trim(_digits(a, p, e)), _fp_trim(_digits(b, p, e)), p)
        return _from_digits(_fp_mod(prod, list(self.reduction), p), p)

    def _build_log_tables(self):
        q = self.q
        exps = [(q - 1) // r for r in _prime_factors_int(q - 1)]

        def power(g, k):
            r, base = 1, g
            while k:
                if k & 1:
                    r = self._elem_mul_slow(r, base)
                base = self._elem_mul_slow(base, base)
                k >>= 1
            return r

        for g in range(2, q):
            if all(power(g, k) != 1 for k in exps):
                break
        else:  # pragma: no cover - every finite field has a generator
            raise RuntimeError("no primitive element found")
        exp = [0] * (2 * (q - 1))
        log = [0] * q
        x = 1
        for i in range(q - 1):
            exp[i] = exp[i + q - 1] = x
            log[x] = i
            x = self._elem_mul_slow(x, g)
        self.generator = g
        self._exp = exp
        self._log = log

    # -- element arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.e == 1:
            s = a + b
            return s - self.p if s >= self.p else s
        if self.p == 2:
            return a ^ b
        p, r, m = self.p, 0, 1
        while a or b:
            r += ((a % p + b % p) % p) * m
            a //= p
            b //= p
            m *= p
        return r

    def neg(self, a: int) -> int:
        if self.e == 1:
            return (self.p - a) % self.p
        if self.p == 2:
            return a
        p, r, m = self.p, 0, 1
        while a:
            r += ((p - a % p) % p) * m
            a //= p
            m *= p
        return r

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.e == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("0 has no inverse in a field")
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Full q x q multiplication table (only for q <= 2**12)."""
        if self.q > TABLE_Q:
            raise FieldTooLarge(f"multiplication table capped at q <= {TABLE_Q}")
        q = self.q
        if self.e == 1:
            a = np.arange(q, dtype=np.int64)
            return (np.outer(a, a) % q).astype(np.uint16)
        log = np.asarray(self._log, dtype=np.int64)
        exp = np.asarray(self._exp, dtype=np.int64)
        t = exp[log[:, None] + log[None, :]]
        t[0, :] = 0
        t[:, 0] = 0
        return t.astype(np.uint16)

    @cached_property
    def inv_table(self) -> np.ndarray:
        return np.array([0] + [self.inv(a) for a in range(1, self.q)], dtype=np.uint16)

    @cached_property
    def kernel_tables(self) -> tuple:
        """(p, e, q, log, exp, zech, neg, inc_delta) for the compiled kernels.

        ``zech[k]`` is log(1 + g^k), or -1 when 1 + g^k = 0; with it, addition
        in odd-characteristic extensions is two table lookups.
        ``inc_delta[c]`` is the field difference between code ``(c+1) % q`` and
        code ``c``; walking a coefficient through codes 0..q-1 adds these.
        """
        q = self.q
        if self.e == 1:
            log = np.zeros(1, dtype=np.int64)
            exp = np.zeros(1, dtype=np.int64)
            zech = np.zeros(1, dtype=np.int64)
        else:
            log = np.asarray(self._log, dtype=np.int64)
            exp = np.asarray(self._exp, dtype=np.int64)
            zech = np.full(q - 1, -1, dtype=np.int64)
            for k in range(q - 1):
                s = self.add(1, self._exp[k])
                if s:
                    zech[k] = self._log[s]
        neg = np.array([self.neg(a) for a in range(q)], dtype=np.int64)
        inc = np.array([self.sub((c + 1) % q, c) for c in range(q)], dtype=np.int64)
        return (self.p, self.e, q, log, exp, zech, neg, inc)

    # -- conveniences ---------------------------------------------------------

    def poly(self, coeffs: Sequence[int] | str) -> "Poly":
        if isinstance(coeffs, str):
            return poly_parse(coeffs, self)
        for c in coeffs:
            if not 0 <= c < self.q:
                raise CoefficientOutOfRange(f"coefficient {c} not in 0..{self.q - 1}")
        return Poly(self, coeffs)

    @property
    def one(self) -> "Poly":
        return Poly(self, (1,))

    @property
    def zero(self) -> "Poly":
        return Poly(self, ())

    @property
    def T(self) -> "Poly":
        return Poly(self, (0, 1))

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.e, self.reduction) == (
            other.p, other.e, other.reduction)

    def __hash__(self):
        return hash((self.p, self.e, self.reduction))

    def __repr__(self):
        if self.e == 1:
            return f"GF({self.q})"
        return f"GF({self.p}^{self.e}, reduction={list(self.reduction)})"

    @property
    def reduction_index(self) -> int:
        """MonicIndex of the reduction polynomial over F_p (0 for prime fields)."""
        if self.reduction is None:
            return 0
        return _from_digits(self.reduction[:-1], self.p)


_FIELDS: dict[tuple, FieldSpec] = {}


def field_create(p: int, e: int = 1, reduction=None) -> FieldSpec:
    """Return F_{p^e}.

    ``reduction`` (a monic degree-e polynomial over F_p, as a :class:`Poly` or a
    little-endian coefficient sequence) defines the extension; if omitted the
    least monic irreducible of degree e in MonicIndex order is used.
    """
    if not is_prime_int(p):
        raise NotPrime(f"{p} is not prime")
    if e < 1:
        raise ValueError("extension degree must be positive")
    if p ** e > MAX_Q:
        raise FieldTooLarge(f"q = {p}^{e} exceeds {MAX_Q}")
    red = None
    if reduction is not None:
        red = tuple(reduction.coeffs) if isinstance(reduction, Poly) else tuple(int(c) for c in reduction)
        red = tuple(_fp_trim(list(red)))
        if len(red) != e + 1 or red[-1] != 1:
            raise NotMonic(f"reduction must be monic of degree {e}")
        if any(not 0 <= c < p for c in red):
            raise CoefficientOutOfRange("reduction coefficients must lie in F_p")
        if not _fp_irreducible(list(red), p):
            raise NotIrreducible(f"reduction {list(red)} is reducible over F_{p}")
        if e == 1:
            red = None
    elif e > 1:
        for idx in range(p ** e):
            cand = _digits(idx, p, e) + [1]
            if _fp_irreducible(cand, p):
                red = tuple(cand)
                break
    key = (p, e, red)
    if key not in _FIELDS:
        _FIELDS[key] = FieldSpec(p, e, red)
    return _FIELDS[key]


def field_from_q(q: int) -> FieldSpec:
    """F_q with the default reduction polynomial."""
    if q < 2:
        raise NotPrime(f"{q} is not a prime power")
    ps = _prime_factors_int(q)
    if len(ps) != 1:
        raise NotPrime(f"{q} is not a prime power")
    p = ps[0]
    e = 0
    while q > 1:
        q //= p
        e += 1
    return field_create(p, e)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class MonicIndex(NamedTuple):
    degree: int
    index: int


class Poly:
    """Polynomial over a :class:`FieldSpec`, little-endian coefficient tuple."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FieldSpec, coeffs: Sequence[int]):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    @property
    def norm(self) -> int:
        """|F| = q**deg F, and 0 for F = 0."""
        return self.field.q ** self.degree if self.coeffs else 0

    def code(self) -> int:
        return _from_digits(self.coeffs, self.field.q)

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        return self.scale(self.field.inv(self.leading))

    def scale(self, c: int) -> "Poly":
        f = self.field
        return Poly(f, [f.mul(c, a) for a in self.coeffs])

    def _check(self, other) -> "Poly":
        if isinstance(other, int):
            return Poly(self.field, (other % self.field.q,)) if self.field.e == 1 else Poly(self.field, (other,))
        if not isinstance(other, Poly):
            return NotImplemented
        if other.field != self.field:
            raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return NotImplemented if other is NotImplemented else poly_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        return Poly(f, [f.neg(a) for a in self.coeffs])

    def __sub__(self, other):
        other = self._check(other)
        return NotImplemented if other is NotImplemented else poly_add(self, -other)

    def __rsub__(self, other):
        other = self._check(other)
        return NotImplemented if other is NotImplemented else poly_add(other, -self)

    def __mul__(self, other):
        other = self._check(other)
        return NotImplemented if other is NotImplemented else poly_mul(self, other)

    __rmul__ = __mul__

    def __divmod__(self, other):
        return poly_divrem(self, self._check(other))

    def __floordiv__(self, other):
        return poly_divrem(self, self._check(other))[0]

    def __mod__(self, other):
        return poly_divrem(self, self._check(other))[1]

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        r, base = self.field.one, self
        while k:
            if k & 1:
                r = r * base
            base = base * base
            k >>= 1
        return r

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.field == other.field and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __str__(self):
        return poly_format(self)

    def __repr__(self):
        return f"Poly({self.field!r}, {poly_format(self)!r})"


def _same_field(a: Poly, b: Poly) -> FieldSpec:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field!r} vs {b.field!r}")
    return a.field


def poly_add(a: Poly, b: Poly) -> Poly:
    f = _same_field(a, b)
    x, y = a.coeffs, b.coeffs
    if len(x) < len(y):
        x, y = y, x
    out = list(x)
    for i, c in enumerate(y):
        out[i] = f.add(out[i], c)
    return Poly(f, out)


def poly_mul(a: Poly, b: Poly) -> Poly:
    f = _same_field(a, b)
    x, y = a.coeffs, b.coeffs
    if not x or not y:
        return f.zero
    out = [0] * (len(x) + len(y) - 1)
    if f.e == 1:
        p = f.p
        for i, u in enumerate(x):
            if u:
                for j, v in enumerate(y):
                    out[i + j] += u * v
        return Poly(f, [c % p for c in out])
    for i, u in enumerate(x):
        if u:
            for j, v in enumerate(y):
                if v:
                    out[i + j] = f.add(out[i + j], f.mul(u, v))
    return Poly(f, out)


def poly_divrem(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    """Quotient and remainder with deg r < deg b."""
    f = _same_field(a, b)
    if b.is_zero():
        raise DivisionByZero("polynomial division by zero")
    r = list(a.coeffs)
    db = len(b.coeffs) - 1
    if len(r) - 1 < db:
        return f.zero, a
    inv_lead = f.inv(b.coeffs[-1])
    quot = [0] * (len(r) - db)
    bc = b.coeffs
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i]
        if c == 0:
            continue
        c = f.mul(c, inv_lead)
        quot[i - db] = c
        for j in range(db + 1):
            if bc[j]:
                r[i - db + j] = f.sub(r[i - db + j], f.mul(c, bc[j]))
    return Poly(f, quot), Poly(f, r[:db])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic generator of the ideal (a, b); zero only if both are zero."""
    _same_field(a, b)
    while not b.is_zero():
        a, b = b, poly_divrem(a, b)[1]
    return a.monic()


def poly_xgcd(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """(g, s, t) with s*a + t*b = g, g monic."""
    f = _same_field(a, b)
    r0, r1 = a, b
    s0, s1 = f.one, f.zero
    t0, t1 = f.zero, f.one
    while not r1.is_zero():
        qt, r = poly_divrem(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - qt * s1
        t0, t1 = t1, t0 - qt * t1
    if r0.is_zero():
        return r0, s0, t0
    u = f.inv(r0.leading)
    return r0.scale(u), s0.scale(u), t0.scale(u)


def poly_lcm(a: Poly, b: Poly) -> Poly:
    if a.is_zero() or b.is_zero():
        raise DivisionByZero("lcm with the zero polynomial")
    g = poly_gcd(a, b)
    return poly_divrem(poly_mul(a, b), g)[0].monic()


def poly_powmod(a: Poly, k: int, m: Poly) -> Poly:
    if m.is_zero():
        raise DivisionByZero("modulus is zero")
    if k < 0:
        raise ValueError("negative exponent")
    f = _same_field(a, m)
    r = poly_divrem(f.one, m)[1]
    base = poly_divrem(a, m)[1]
    while k:
        if k & 1:
            r = poly_divrem(r * base, m)[1]
        base = poly_divrem(base * base, m)[1]
        k >>= 1
    return r


def poly_invmod(a: Poly, m: Poly) -> Poly:
    """Inverse of a modulo m; raises ValueError when (a, m) != 1."""
    g, s, _ = poly_xgcd(a, m)
    if g.degree != 0:
        raise ValueError(f"{a} is not invertible modulo {m}")
    return poly_divrem(s, m)[1]


# -- text form ---------------------------------------------------------------

_LIST_RE = re.compile(r"^\[\s*(\d+(?:\s*,\s*\d+)*)?\s*\]$")
_TERM_RE = re.compile(r"^(?:(\d+)\s*\*\s*)?T(?:\s*\^\s*(\d+))?$|^(\d+)$")


def poly_parse(text: str, field: FieldSpec) -> Poly:
    """Parse ``T^3+2*T+1`` style sums or the list form ``[c0,c1,...]``."""
    s = text.strip()
    if not s:
        raise PolySyntaxError("empty polynomial literal")
    q = field.q
    m = _LIST_RE.match(s)
    if m:
        cs = [int(t) for t in m.group(1).split(",")] if m.group(1) else []
        for c in cs:
            if c >= q:
                raise CoefficientOutOfRange(f"coefficient {c} not in 0..{q - 1}")
        return Poly(field, cs)
    coeffs: dict[int, int] = {}
    for term in s.split("+"):
        term = term.strip()
        tm = _TERM_RE.match(term)
        if not tm:
            raise PolySyntaxError(f"cannot parse term {term!r} in {text!r}")
        if tm.group(3) is not None:
            c, k = int(tm.group(3)), 0
        else:
            c = int(tm.group(1)) if tm.group(1) is not None else 1
            k = int(tm.group(2)) if tm.group(2) is not None else 1
        if c >= q:
            raise CoefficientOutOfRange(f"coefficient {c} not in 0..{q - 1}")
        coeffs[k] = field.add(coeffs.get(k, 0), c)
    top = max(coeffs)
    return Poly(field, [coeffs.get(i, 0) for i in range(top + 1)])


def poly_format(f: Poly) -> str:
    """Canonical text: descending terms over prime fields, list form otherwise."""
    if f.field.e > 1:
        return "[" + ",".join(str(c) for c in f.coeffs) + "]"
    if f.is_zero():
        return "0"
    terms = []
    for k in range(len(f.coeffs) - 1, -1, -1):
        c = f.coeffs[k]
        if c == 0:
            continue
        if k == 0:
            terms.append(str(c))
            continue
        mono = "T" if k == 1 else f"T^{k}"
        terms.append(mono if c == 1 else f"{c}*{mono}")
    return "+".join(terms)


# -- monic indexing ----------------------------------------------------------

def monic_encode(f: Poly) -> MonicIndex:
    if not f.is_monic():
        raise NotMonic(f"{f} is not monic")
    return MonicIndex(f.degree, _from_digits(f.coeffs[:-1], f.field.q))


def monic_decode(field: FieldSpec, mi: MonicIndex | tuple[int, int]) -> Poly:
    degree, index = mi
    if not 0 <= index < field.q ** degree:
        raise ValueError(f"index {index} out of range for degree {degree}")
    return Poly(field, _digits(index, field.q, degree) + [1])


def poly_from_code(field: FieldSpec, code: int) -> Poly:
    out = []
    while code:
        code, r = divmod(code, field.q)
        out.append(r)
    return Poly(field, out)


def enumerate_monics(field: FieldSpec, degree: int) -> Iterator[Poly]:
    """All q**degree monic polynomials of the given degree, in index order."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    for idx in range(field.q ** degree):
        yield Poly(field, _digits(idx, field.q, degree) + [1])


def residues(M: Poly) -> Iterator[Poly]:
    """All polynomials of degree < deg M (the residues modulo M), by code."""
    f = M.field
    for code in range(f.q ** M.degree):
        yield poly_from_code(f, code)


def unit_residues(M: Poly) -> list[Poly]:
    """Residues A modulo M with (A, M) = 1."""
    if M.degree == 0:
        return [M.field.zero]
    return [A for A in residues(M) if not A.is_zero() and poly_gcd(A, M).degree == 0]

"""Smallest-prime-factor sieve over monic polynomials and multiplicative counts.

The table stores, for every monic polynomial of degree 1..max_deg, the degree
and MonicIndex of its smallest prime factor ("smallest" = least degree, ties
broken by least index).  Everything else in this module (factorizations,
prime counts, Mobius and Euler phi, squarefree counts) reads off that table.
"""

from __future__ import annotations

import logging
import math
import random
import struct
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import (
    BudgetExceeded,
    DegreeExceedsTable,
    FieldMismatch,
    NotCoprime,
    NotMonic,
    SieveFileError,
)
from .gfpoly import (
    FieldSpec,
    Poly,
    _digits,
    field_create,
    monic_decode,
    monic_encode,
    poly_divrem,
    poly_gcd,
    poly_powmod,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 1 << 28
MAGIC = b"FFMT"
FORMAT_VERSION = 1


def mobius_int(n: int) -> int:
    if n == 1:
        return 1
    out, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            out = -out
        d += 1
    return -out if n > 1 else out


def poly_digits(F: Poly, length: int | None = None) -> np.ndarray:
    """Coefficients of F as an int64 array, zero padded to ``length``."""
    n = len(F.coeffs) if length is None else length
    out = np.zeros(max(n, 1), dtype=np.int64)
    out[: len(F.coeffs)] = F.coeffs
    return out


def pow_table(q: int, n: int) -> np.ndarray:
    return np.array([q ** j for j in range(max(n, 1))], dtype=np.int64)


@dataclass
class DegreeStats:
    """Factorization data for every monic of one degree, indexed by MonicIndex."""

    degree: int
    types: np.ndarray    # (q**d, d+1) uint8, distinct primes per degree
    sqfree: np.ndarray
    omega: np.ndarray    # distinct prime factors
    tau: np.ndarray
    W: np.ndarray
    L: np.ndarray
    degmask: np.ndarray  # bit t set iff a divisor of degree t exists
    coprime: np.ndarray  # no prime factor in common with the modulus used


@dataclass(frozen=True)
class FactorizationType:
    """m[i-1] = number of distinct prime divisors of degree i."""

    m: tuple[int, ...]

    def count(self, i: int) -> int:
        return self.m[i - 1] if 1 <= i <= len(self.m) else 0

    def weight(self) -> int:
        return sum(i * c for i, c in enumerate(self.m, start=1))


class SPFTable:
    """Smallest prime factor of every monic polynomial of degree <= max_deg."""

    def __init__(self, field: FieldSpec, max_deg: int, spf_deg: np.ndarray,
                 spf_idx: np.ndarray, offsets: np.ndarray):
        self.field = field
        self.max_deg = max_deg
        self.spf_deg = spf_deg
        self.spf_idx = spf_idx
        self.offsets = offsets
        self._stats: OrderedDict = OrderedDict()

    def __repr__(self):
        return f"SPFTable({self.field!r}, max_deg={self.max_deg})"

    def check(self, field: FieldSpec, degree: int):
        if field != self.field:
            raise FieldMismatch(f"table is over {self.field!r}, not {field!r}")
        self.check_degree(degree)

    def check_degree(self, degree: int):
        if degree > self.max_deg:
            raise DegreeExceedsTable(f"degree {degree} > table max_deg {self.max_deg}")

    def degree_slice(self, d: int) -> np.ndarray:
        """spf degrees for all monics of degree d (a view)."""
        self.check_degree(d)
        o = int(self.offsets[d])
        return self.spf_deg[o: o + self.field.q ** d]

    def spf_pair(self, d: int, idx: int) -> tuple[int, int]:
        self.check_degree(d)
        if d == 0:
            raise ValueError("1 has no prime factor")
        o = int(self.offsets[d]) + idx
        k = int(self.spf_deg[o])
        return (d, idx) if k == d else (k, int(self.spf_idx[o]))

    def spf(self, F: Poly) -> Poly:
        d, idx = monic_encode(F)
        return monic_decode(self.field, self.spf_pair(d, idx))

    def is_prime(self, F: Poly) -> bool:
        d, idx = monic_encode(F)
        return d >= 1 and self.spf_pair(d, idx) == (d, idx)

    def prime_indices(self, d: int) -> np.ndarray:
        return np.flatnonzero(self.degree_slice(d) == d)

    def primes(self, d: int) -> list[Poly]:
        return [monic_decode(self.field, (d, int(i))) for i in self.prime_indices(d)]

    def stats(self, d: int, M: Poly | None = None) -> DegreeStats:
        """Per-polynomial factorization statistics for degree d (cached)."""
        self.check_degree(d)
        mp = () if M is None or M.degree < 1 else tuple(
            tuple(monic_encode(P)) for P, _ in factorize_any(M.monic(), self))
        key = (d, mp)
        if key in self._stats:
            self._stats.move_to_end(key)
            return self._stats[key]
        q = self.field.q
        n = q ** d
        p, e, _, lg, ex, zc, neg, _ = self.field.kernel_tables
        types = np.zeros((n, d + 1), dtype=np.uint8)
        sqfree = np.zeros(n, dtype=np.bool_)
        omega = np.zeros(n, dtype=np.int64)
        tau = np.zeros(n, dtype=np.int64)
        W = np.zeros(n, dtype=np.int64)
        L = np.zeros(n, dtype=np.int64)
        degmask = np.zeros(n, dtype=np.int64)
        coprime = np.zeros(n, dtype=np.bool_)
        mdeg = np.array([a for a, _ in mp] or [-1], dtype=np.int64)
        midx = np.array([b for _, b in mp] or [-1], dtype=np.int64)
        K.degree_stats(d, p, e, q, lg, ex, zc, neg, pow_table(q, self.max_deg + 1),
                       self.spf_deg, self.spf_idx, self.offsets, mdeg, midx,
                       types, sqfree, omega, tau, W, L, degmask, coprime)
        st = DegreeStats(d, types, sqfree, omega, tau, W, L, degmask, coprime)
        self._stats[key] = st
        while len(self._stats) > 12:
            self._stats.popitem(last=False)
        return st

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path):
        f = self.field
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", FORMAT_VERSION))
            fh.write(struct.pack("<4Q", f.p, f.e, f.reduction_index, self.max_deg))
            for d in range(1, self.max_deg + 1):
                o = int(self.offsets[d])
                n = f.q ** d
                sd = self.spf_deg[o: o + n].astype(np.uint64)
                si = self.spf_idx[o: o + n].astype(np.uint64)
                own = np.arange(n, dtype=np.uint64)
                si = np.where(sd == d, own, si)
                ((sd << np.uint64(48)) | si).astype("<u8").tofile(fh)

    @classmethod
    def load(cls, path: str | Path, checks: int = 3, seed: int | None = None) -> "SPFTable":
        """Read a table written by :meth:`save`, spot-checking entries by trial division."""
        with open(path, "rb") as fh:
            head = fh.read(4 + 4 + 32)
            if len(head) < 40 or head[:4] != MAGIC:
                raise SieveFileError(f"{path}: bad magic")
            (version,) = struct.unpack("<I", head[4:8])
            if version != FORMAT_VERSION:
                raise SieveFileError(f"{path}: unsupported format version {version}")
            p, e, ridx, max_deg = struct.unpack("<4Q", head[8:40])
            try:
                red = None if e == 1 else _digits(ridx, p, e) + [1]
                field = field_create(p, e, red)
            except Exception as exc:
                raise SieveFileError(f"{path}: invalid field header ({exc})") from exc
            q = field.q
            offsets = _offsets(q, max_deg)
            spf_deg = np.zeros(int(offsets[-1]), dtype=np.uint8)
            spf_idx = np.zeros(int(offsets[-1]), dtype=_idx_dtype(q, max_deg))
            for d in range(1, max_deg + 1):
                n = q ** d
                raw = np.fromfile(fh, dtype="<u8", count=n)
                if raw.size != n:
                    raise SieveFileError(f"{path}: truncated at degree {d}")
                sd = (raw >> np.uint64(48)).astype(np.int64)
                si = raw & np.uint64((1 << 48) - 1)
                if sd.min() < 1 or sd.max() > d:
                    raise SieveFileError(f"{path}: spf degree out of range at degree {d}")
                o = int(offsets[d])
                spf_deg[o: o + n] = sd
                spf_idx[o: o + n] = np.where(sd == d, 0, si)
            if fh.read(1):
                raise SieveFileError(f"{path}: trailing data")
        table = cls(field, int(max_deg), spf_deg, spf_idx, offsets)
        rng = random.Random(seed)
        for _ in range(checks if max_deg >= 1 else 0):
            d = rng.randint(1, int(max_deg))
            idx = rng.randrange(q ** d)
            F = monic_decode(field, (d, idx))
            expect = factor_by_trial(F)[0][0]
            if table.spf(F) != expect:
                raise SieveFileError(f"{path}: entry {F} fails trial-division check")
        return table


def _offsets(q: int, max_deg: int) -> np.ndarray:
    sizes = [q ** d for d in range(max_deg + 1)]
    return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)


def _idx_dtype(q: int, max_deg: int):
    # composite entries point at a prime of degree <= max_deg // 2
    return np.uint16 if q ** (max_deg // 2) <= 1 << 16 else np.uint32


def table_entries(q: int, max_deg: int) -> int:
    return sum(q ** d for d in range(max_deg + 1))


def _chunk_table(p: int, width: int, chunk: int) -> np.ndarray:
    """Base-p value of every packed group of ``chunk`` digits (garbage slots stay 0)."""
    tab = np.zeros(1 << (width * chunk), dtype=np.int64)
    for v in range(p ** chunk):
        key, x = 0, v
        for j in range(chunk):
            key |= (x % p) << (width * j)
            x //= p
        tab[key] = v
    return tab


def build_spf(field: FieldSpec, max_deg: int, budget: int = DEFAULT_BUDGET) -> SPFTable:
    """Sieve smallest prime factors for all monics of degree 1..max_deg."""
    if max_deg < 0:
        raise ValueError("max_deg must be non-negative")
    q = field.q
    total = table_entries(q, max_deg)
    if total > budget:
        raise BudgetExceeded(f"{total} table entries exceed budget {budget}")
    offsets = _offsets(q, max_deg)
    spf_deg = np.zeros(total, dtype=np.uint8)
    spf_idx = np.zeros(total, dtype=_idx_dtype(q, max_deg))
    p, e, _, lg, ex, zc, _, inc = field.kernel_tables
    powq = pow_table(q, max_deg + 1)
    width = K.packed_width(p)
    packed = max_deg * e * width <= 62
    if packed:
        chunk = max(1, 12 // width)
        ctab = _chunk_table(p, width, chunk)
    for d in range(1, max_deg + 1):
        if packed:
            K.sieve_degree_packed(d, p, e, lg, ex, spf_deg, spf_idx, offsets, width, ctab, chunk)
        else:
            K.sieve_degree(d, p, e, q, lg, ex, zc, inc, powq, spf_deg, spf_idx, offsets)
        log.debug("sieved degree %d over %r", d, field)
    return SPFTable(field, max_deg, spf_deg, spf_idx, offsets)


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

def factor_by_trial(F: Poly) -> list[tuple[Poly, int]]:
    """Factor a monic F by trial division in (degree, index) order.

    Independent of any table; meant for oracles and file validation.
    """
    if not F.is_monic():
        raise NotMonic(f"{F} is not monic")
    field = F.field
    out: list[tuple[Poly, int]] = []
    k = 1
    while F.degree >= 2 * k:
        for idx in range(field.q ** k):
            G = monic_decode(field, (k, idx))
            qt, r = poly_divrem(F, G)
            if r.is_zero():
                e = 0
                while r.is_zero():
                    F, e = qt, e + 1
                    qt, r = poly_divrem(F, G)
                out.append((G, e))
                if F.degree < 2 * k:
                    break
        k += 1
    if F.degree >= 1:
        if out and out[-1][0] == F:
            out[-1] = (F, out[-1][1] + 1)
        else:
            out.append((F, 1))
    return out


def factorize(F: Poly, table: SPFTable) -> list[tuple[Poly, int]]:
    """Prime factorization of monic F as (prime, exponent) pairs, primes ascending."""
    if not F.is_monic():
        raise NotMonic(f"{F} is not monic")
    table.check(F.field, F.degree)
    out: list[tuple[Poly, int]] = []
    while F.degree > 0:
        P = table.spf(F)
        F = poly_divrem(F, P)[0]
        if out and out[-1][0] == P:
            out[-1] = (P, out[-1][1] + 1)
        else:
            out.append((P, 1))
    return out


def factorize_any(F: Poly, table: SPFTable | None = None) -> list[tuple[Poly, int]]:
    """Use the table when it covers deg F, trial division otherwise."""
    if table is not None and F.field == table.field and F.degree <= table.max_deg:
        return factorize(F, table)
    return factor_by_trial(F)


def factorization_type(F: Poly, table: SPFTable) -> FactorizationType:
    m = [0] * max(F.degree, 0)
    for P, _ in factorize(F, table):
        m[P.degree - 1] += 1
    return FactorizationType(tuple(m))


# ---------------------------------------------------------------------------
# prime counts
# ---------------------------------------------------------------------------

def pi(field: FieldSpec, n: int, table: SPFTable) -> int:
    """Number of primes of degree n, by scanning the table."""
    if n < 1:
        raise ValueError("n must be >= 1")
    table.check(field, n)
    return int(np.count_nonzero(table.degree_slice(n) == n))


def pi_formula(field: FieldSpec, n: int) -> int:
    """(1/n) sum_{d | n} mu(n/d) q^d, exactly."""
    if n < 1:
        raise ValueError("n must be >= 1")
    q = field.q
    s = sum(mobius_int(n // d) * q ** d for d in range(1, n + 1) if n % d == 0)
    assert s % n == 0
    return s // n


@lru_cache(maxsize=8)
def residue_codes(field: FieldSpec, n: int, M: Poly) -> np.ndarray:
    """Code of F mod M for every F in M_n, in MonicIndex order."""
    q = field.q
    if q ** n > DEFAULT_BUDGET:
        raise BudgetExceeded(f"q^n = {q ** n} exceeds budget")
    if M.degree < 1:
        return np.zeros(q ** n, dtype=np.int64)
    dm = M.degree
    T = field.T
    base = poly_digits(poly_powmod(T, n, M), dm)
    steps = np.zeros((max(n, 1), dm), dtype=np.int64)
    for i in range(n):
        steps[i] = poly_digits(poly_powmod(T, i, M), dm)
    lo = np.zeros(max(n, 1), dtype=np.int64)
    hi = np.full(max(n, 1), dm, dtype=np.int64)
    p, e, _, lg, ex, zc, _, inc = field.kernel_tables
    out = np.empty(q ** n, dtype=np.int64)
    K.walk_fill(base, steps, lo, hi, n, dm, p, e, q, lg, ex, zc, inc, pow_table(q, dm), out)
    out.setflags(write=False)
    return out


def pi_ap(field: FieldSpec, n: int, A: Poly, M: Poly, table: SPFTable) -> int:
    """Primes P of degree n with P = A mod M."""
    if M.degree < 1:
        raise ValueError("modulus must have degree >= 1")
    if poly_gcd(A, M).degree != 0:
        raise NotCoprime(f"({A}, {M}) != 1")
    table.check(field, n)
    res = residue_codes(field, n, M)
    target = (A % M).code()
    return int(np.count_nonzero((table.degree_slice(n) == n) & (res == target)))


def mobius(F: Poly, table: SPFTable) -> int:
    fac = factorize(F, table)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def phi(M: Poly, table: SPFTable | None = None) -> int:
    """#{A : deg A < deg M, (A, M) = 1}."""
    M = M.monic()
    q = M.field.q
    out = 1
    for P, k in factorize_any(M, table):
        out *= q ** ((k - 1) * P.degree) * (q ** P.degree - 1)
    return out


def smallest_prime_degree(F: Poly, table: SPFTable) -> int | float:
    """P^-(F); ``math.inf`` for F = 1."""
    d, idx = monic_encode(F)
    if d == 0:
        return math.inf
    return table.spf_pair(d, idx)[0]


def P_j(M: Poly, j: int, table: SPFTable | None = None) -> int:
    """Number of distinct prime divisors of M of degree j."""
    return sum(1 for P, _ in factorize_any(M.monic(), table) if P.degree == j)


def squarefree_count(field: FieldSpec, i: int, table: SPFTable) -> int:
    if i == 0:
        return 1
    table.check(field, i)
    return int(np.count_nonzero(table.stats(i).sqfree))


def squarefree_count_formula(q: int, i: int) -> int:
    return q ** i if i <= 1 else q ** i - q ** (i - 1)


def gamma_roots(field: FieldSpec, n: int, l: int, E: Poly, M: Poly, table: SPFTable) -> int:
    """#{P prime of degree n : P^l = E mod M}."""
    if M.degree < 1:
        raise ValueError("modulus must have degree >= 1")
    if l < 1:
        raise ValueError("l must be >= 1")
    table.check(field, n)
    target = E % M
    return sum(1 for P in table.primes(n) if poly_powmod(P, l, M) == target)


def ppt_sandwich(q: int, n: int, count: int) -> tuple[bool, bool]:
    """(lower, upper) halves of q^n/n - 2q^(n/2)/n <= count <= q^n/n.

    The lower half is n*count >= q^n - sqrt(4 q^n); both sides are compared
    exactly, using that n*count is an integer.
    """
    qn = q ** n
    lower = n * count >= qn - math.isqrt(4 * qn)
    upper = Fraction(count) <= Fraction(qn, n)
    return lower, upper

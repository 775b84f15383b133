"""Product sets of residue classes and the divisor-degree statistics of a polynomial.

Product sets are computed by marking: one factor family is listed
explicitly, the other is walked as an affine family G0 + M*R (deg R < f), and
every product's MonicIndex is flagged in a boolean array.
"""

from __future__ import annotations

import itertools
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, FieldMismatch, NotCoprime, SieveFileError
from .gfpoly import FieldSpec, Poly, poly_gcd, unit_residues
from .sieve import DEFAULT_BUDGET, SPFTable, factorize, pow_table, residue_codes

HITSET_MAGIC = b"FFHS"
MAX_SHARDS = 1 << 12
DELTA = 1 - (1 + math.log(math.log(2))) / math.log(2)


# ---------------------------------------------------------------------------
# residue-class families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class APSpec:
    """{G monic of degree ``degree`` : G = A mod M}; M = 1 means all of M_degree."""

    degree: int
    A: Poly
    M: Poly

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if self.A.field != self.M.field:
            raise FieldMismatch("residue and modulus over different fields")
        if self.M.is_zero():
            raise ValueError("modulus must be nonzero")

    @classmethod
    def full(cls, field: FieldSpec, degree: int) -> "APSpec":
        return cls(degree, field.one, field.one)

    @property
    def field(self) -> FieldSpec:
        return self.M.field

    def contains(self, G: Poly) -> bool:
        return G.is_monic() and G.degree == self.degree and (G - self.A) % self.M == self.field.zero

    def affine(self) -> tuple[Poly, Poly, int] | None:
        """(G0, M, f) with members G0 + M*R, deg R < f; None if the class is empty."""
        field, b = self.field, self.degree
        M = self.M.monic()
        Tb = field.T ** b
        if M.degree == 0:
            return Tb, field.one, b
        if M.degree <= b:
            return Tb + (self.A - Tb) % M, M, b - M.degree
        G = self.A % M
        if G.degree == b and G.is_monic():
            return G, M, 0
        return None

    def size(self) -> int:
        aff = self.affine()
        return 0 if aff is None else self.field.q ** aff[2]

    def indices(self) -> np.ndarray:
        """MonicIndex of every member, ascending in the walk order."""
        aff = self.affine()
        if aff is None:
            return np.zeros(0, dtype=np.int64)
        G0, M, f = aff
        field, b = self.field, self.degree
        base, steps, lo, hi = _walk_arrays(G0, M, f, max(b, 1))
        out = np.empty(field.q ** f, dtype=np.int64)
        p, e, q, lg, ex, zc, _, inc = field.kernel_tables
        K.walk_fill(base, steps, lo, hi, f, b, p, e, q, lg, ex, zc, inc, pow_table(q, b), out)
        return out

    def members(self) -> list[Poly]:
        from .gfpoly import monic_decode
        return [monic_decode(self.field, (self.degree, int(i))) for i in self.indices()]


def _digits(P: Poly, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.int64)
    out[: len(P.coeffs)] = P.coeffs
    return out


def _walk_arrays(G0: Poly, M: Poly, f: int, width: int):
    base = _digits(G0, width + 1)
    steps = np.zeros((max(f, 1), width + 1), dtype=np.int64)
    lo = np.zeros(max(f, 1), dtype=np.int64)
    hi = np.zeros(max(f, 1), dtype=np.int64)
    for i in range(f):
        steps[i, i: i + M.degree + 1] = M.coeffs
        lo[i], hi[i] = i, i + M.degree + 1
    return base, steps, lo, hi


def _index_rows(idx: np.ndarray, q: int, b: int) -> np.ndarray:
    """Digit rows (monic, length b+1) of the degree-b monics with the given indices."""
    rows = np.empty((len(idx), b + 1), dtype=np.int64)
    x = idx.copy()
    for j in range(b):
        rows[:, j] = x % q
        x //= q
    rows[:, b] = 1
    return rows


# ---------------------------------------------------------------------------
# HitSet
# ---------------------------------------------------------------------------

class HitSet:
    """Flags over the monics of degree n with index in [lo, lo + len(bits))."""

    def __init__(self, field: FieldSpec, n: int, bits: np.ndarray, lo: int = 0):
        self.field = field
        self.n = n
        self.bits = bits
        self.lo = lo

    @classmethod
    def empty(cls, field: FieldSpec, n: int, lo: int = 0, hi: int | None = None) -> "HitSet":
        hi = field.q ** n if hi is None else hi
        return cls(field, n, np.zeros(hi - lo, dtype=np.bool_), lo)

    @property
    def complete(self) -> bool:
        return self.lo == 0 and len(self.bits) == self.field.q ** self.n

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __len__(self) -> int:
        return self.count()

    def __contains__(self, F: Poly) -> bool:
        if not F.is_monic() or F.degree != self.n:
            return False
        i = F.code() - self.field.q ** self.n - self.lo
        return 0 <= i < len(self.bits) and bool(self.bits[i])

    def _same_shape(self, other: "HitSet"):
        if (self.field, self.n, self.lo, len(self.bits)) != (other.field, other.n, other.lo, len(other.bits)):
            raise FieldMismatch("hit sets cover different ranges")

    def __or__(self, other: "HitSet") -> "HitSet":
        self._same_shape(other)
        return HitSet(self.field, self.n, self.bits | other.bits, self.lo)

    def __and__(self, other: "HitSet") -> "HitSet":
        self._same_shape(other)
        return HitSet(self.field, self.n, self.bits & other.bits, self.lo)

    def restrict(self, A: Poly, M: Poly) -> "HitSet":
        """Keep only the F with F = A mod M."""
        if M.degree < 1:
            return self
        res = residue_codes(self.field, self.n, M)[self.lo: self.lo + len(self.bits)]
        return HitSet(self.field, self.n, self.bits & (res == (A % M).code()), self.lo)

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits) + self.lo

    def export(self, path: str | Path):
        """Write "FFHS", q and n (u64 LE), then the flags as a little-endian bit array."""
        if not self.complete:
            raise ValueError("only complete hit sets can be exported")
        with open(path, "wb") as fh:
            fh.write(HITSET_MAGIC)
            fh.write(struct.pack("<2Q", self.field.q, self.n))
            fh.write(np.packbits(self.bits, bitorder="little").tobytes())

    @classmethod
    def load(cls, path: str | Path, field: FieldSpec) -> "HitSet":
        raw = Path(path).read_bytes()
        if raw[:4] != HITSET_MAGIC or len(raw) < 20:
            raise SieveFileError(f"{path}: not a hit-set file")
        q, n = struct.unpack("<2Q", raw[4:20])
        if q != field.q:
            raise FieldMismatch(f"{path}: file is over q={q}")
        size = q ** n
        bits = np.unpackbits(np.frombuffer(raw[20:], dtype=np.uint8), bitorder="little")
        if len(bits) < size:
            raise SieveFileError(f"{path}: truncated")
        return cls(field, int(n), bits[:size].astype(np.bool_))


def _mark_into(hit: np.ndarray, lo: int, hi: int, rows: np.ndarray, b1: int,
               walk: tuple[Poly, Poly, int], n: int, field: FieldSpec):
    G0, M, f = walk
    p, e, q, lg, ex, zc, _, inc = field.kernel_tables
    K.mark_products(rows, b1, _digits(G0, G0.degree + 1), _digits(M, M.degree + 1), f, n,
                    p, e, q, lg, ex, zc, inc, pow_table(q, n + 1), hit, lo, hi)


def mark_product_set(omega1: APSpec, omega2: APSpec, lo: int = 0, hi: int | None = None,
                     threads: int = 1) -> HitSet:
    """Flags of the products G1*G2 (G_i in omega_i) whose index lies in [lo, hi)."""
    field = omega1.field
    if omega2.field != field:
        raise FieldMismatch("families over different fields")
    n = omega1.degree + omega2.degree
    hi = field.q ** n if hi is None else hi
    out = HitSet.empty(field, n, lo, hi)
    a1, a2 = omega1.affine(), omega2.affine()
    if a1 is None or a2 is None:
        return out
    # list the smaller family, walk the larger
    if omega1.size() > omega2.size():
        omega1, omega2, a2 = omega2, omega1, a1
    b1 = omega1.degree
    rows = _index_rows(omega1.indices(), field.q, b1)
    threads = max(1, min(threads, len(rows)))
    if threads == 1:
        _mark_into(out.bits, lo, hi, rows, b1, a2, n, field)
        return out
    parts = np.array_split(rows, threads)
    bufs = [np.zeros_like(out.bits) for _ in parts]
    with ThreadPoolExecutor(threads) as pool:
        list(pool.map(lambda pb: _mark_into(pb[1], lo, hi, pb[0], b1, a2, n, field),
                      zip(parts, bufs)))
    for buf in bufs:
        out.bits |= buf
    return out


def _shards(q: int, n: int, budget: int) -> list[tuple[int, int]]:
    """Contiguous index ranges (equal top-coefficient blocks) of at most ``budget`` each."""
    total = q ** n
    if total <= budget:
        return [(0, total)]
    k = 0
    while q ** (n - k) > budget:
        k += 1
    if q ** k > MAX_SHARDS:
        # every shard walks the full product family, so tiny budgets cost quadratically
        raise BudgetExceeded(f"budget {budget} would need {q ** k} shards (limit {MAX_SHARDS})")
    width = q ** (n - k)
    return [(s * width, (s + 1) * width) for s in range(q ** k)]


def product_set(omega1: APSpec, omega2: APSpec, budget: int = DEFAULT_BUDGET,
                threads: int = 1) -> HitSet:
    n = omega1.degree + omega2.degree
    if omega1.field.q ** n > budget:
        raise BudgetExceeded(f"q^{n} flags exceed budget {budget}; use product_set_count")
    return mark_product_set(omega1, omega2, threads=threads)


def product_set_count(omega1: APSpec, omega2: APSpec, budget: int = DEFAULT_BUDGET,
                      threads: int = 1, A: Poly | None = None, M: Poly | None = None) -> int:
    """|omega1 * omega2|, optionally only products = A mod M; sharded past the budget."""
    field = omega1.field
    n = omega1.degree + omega2.degree
    total = 0
    for lo, hi in _shards(field.q, n, budget):
        hs = mark_product_set(omega1, omega2, lo, hi, threads)
        if M is not None:
            hs = hs.restrict(A, M)
        total += hs.count()
    return total


# ---------------------------------------------------------------------------
# H(n, b) and friends
# ---------------------------------------------------------------------------

def _degrees(n: int, b: int):
    if not 0 <= b <= n:
        raise ValueError("need 0 <= b <= n")


def h_count(field: FieldSpec, n: int, b: int, table: SPFTable | None = None,
            budget: int = DEFAULT_BUDGET, threads: int = 1) -> int:
    """#{F in M_n : F has a monic divisor of degree b}, by product marking."""
    _degrees(n, b)
    return product_set_count(APSpec.full(field, b), APSpec.full(field, n - b), budget, threads)


def h_count_scan(field: FieldSpec, n: int, b: int, table: SPFTable) -> int:
    """Same count by scanning each F's divisor degrees (from its factorization)."""
    _degrees(n, b)
    if n == 0:
        return 1
    table.check(field, n)
    mask = table.stats(n).degmask
    return int(np.count_nonzero((mask >> b) & 1))


def h_ap_count(field: FieldSpec, n: int, b: int, A: Poly, M: Poly,
               budget: int = DEFAULT_BUDGET, threads: int = 1) -> int:
    """#{F in M_n : F = A mod M, F has a monic divisor of degree b}."""
    _degrees(n, b)
    return product_set_count(APSpec.full(field, b), APSpec.full(field, n - b), budget, threads,
                             A=A, M=M)


def h_divisor_ap_count(field: FieldSpec, n: int, b: int, A: Poly, M: Poly,
                       budget: int = DEFAULT_BUDGET, threads: int = 1) -> int:
    """#{F in M_n : some monic G | F has degree b and G = A mod M}."""
    _degrees(n, b)
    return product_set_count(APSpec(b, A, M), APSpec.full(field, n - b), budget, threads)


def h_two_ap_count(field: FieldSpec, n: int, b: int, A1: Poly, M1: Poly, A2: Poly, M2: Poly,
                   budget: int = DEFAULT_BUDGET, threads: int = 1) -> int:
    """|{G1*G2 : G1 in M_b, G1 = A1 mod M1, G2 in M_(n-b), G2 = A2 mod M2}|."""
    _degrees(n, b)
    return product_set_count(APSpec(b, A1, M1), APSpec(n - b, A2, M2), budget, threads)


def m_table_count(field: FieldSpec, n: int, A: Poly | None = None, M: Poly | None = None,
                  A2: Poly | None = None, M2: Poly | None = None,
                  budget: int = DEFAULT_BUDGET, threads: int = 1) -> int:
    """|M(2n)|, |M(2n; A, M)| (one class), or |M(2n; A, A2, M, M2)| (two classes)."""
    if A2 is not None or M2 is not None:
        return h_two_ap_count(field, 2 * n, n, A, M, A2, M2, budget, threads)
    if M is not None:
        return h_ap_count(field, 2 * n, n, A, M, budget, threads)
    return h_count(field, 2 * n, n, budget=budget, threads=threads)


def disjoint_classes_check(field: FieldSpec, n: int, b: int, A: Poly, M: Poly,
                           budget: int = DEFAULT_BUDGET) -> tuple[bool, int, int]:
    """Sets H(n, b; A, A', M, M) over invertible A' against H'(n, b; A, M).

    Returns (pairwise disjoint, sum of their sizes, |H'(n, b; A, M)|).
    """
    if poly_gcd(A, M).degree != 0:
        raise NotCoprime(f"({A}, {M}) != 1")
    if field.q ** n > budget:
        raise BudgetExceeded("needs explicit hit sets")
    first = APSpec(b, A, M)
    sets = [mark_product_set(first, APSpec(n - b, A2, M)) for A2 in unit_residues(M)]
    disjoint = all((s & t).count() == 0 for s, t in itertools.combinations(sets, 2))
    union_bound = mark_product_set(first, APSpec.full(field, n - b)).count()
    return disjoint, sum(s.count() for s in sets), union_bound


# ---------------------------------------------------------------------------
# divisor statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivisorStats:
    degset: frozenset[int]
    L: int
    tau_d: tuple[int, ...]
    tau: int
    W: int


def divisor_stats(H: Poly, table: SPFTable) -> DivisorStats:
    """Degree profile of the monic divisors of H, one divisor per exponent choice."""
    fac = factorize(H, table)
    tau_d = [0] * (max(H.degree, 0) + 1)
    for exps in itertools.product(*(range(a + 1) for _, a in fac)):
        tau_d[sum(P.degree * k for (P, _), k in zip(fac, exps))] += 1
    degset = frozenset(d for d, c in enumerate(tau_d) if c)
    return DivisorStats(degset, len(degset), tuple(tau_d), sum(tau_d), sum(c * c for c in tau_d))


def cauchy_schwarz_family(family: list[Poly], table: SPFTable) -> tuple[Fraction, Fraction]:
    """((sum tau/|H|)^2, (sum L/|H|)(sum W/|H|)) over a family of monics."""
    st, sl, sw = Fraction(0), Fraction(0), Fraction(0)
    for H in family:
        ds = divisor_stats(H, table)
        w = Fraction(1, H.norm)
        st += ds.tau * w
        sl += ds.L * w
        sw += ds.W * w
    return st * st, sl * sw


# ---------------------------------------------------------------------------
# desk-scale order of |H(n, b)|
# ---------------------------------------------------------------------------

def scaling_ratio(q: int, n: int, b: int, count: int) -> tuple[float, float]:
    """count * b^delta * (1 + log b)^(3/2) / q^n with log = ln and with log = log_q."""
    if b < 1:
        raise ValueError("b must be >= 1")
    head = count * b ** DELTA / q ** n
    return head * (1 + math.log(b)) ** 1.5, head * (1 + math.log(b, q)) ** 1.5

"""Rough polynomials and the Selberg upper-bound sieve, plus capped factorization types.

A monic F is b-rough when every prime factor has degree > b.  Counts come
from the smallest-prime-factor table; residue-class variants pair it with
the vector of F mod M over the whole degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded, FieldMismatch
from .gfpoly import FieldSpec, Poly, poly_invmod, unit_residues
from .report import Report, timed
from .sieve import (
    FactorizationType,
    SPFTable,
    pi,
    pi_formula,
    residue_codes,
)

SELBERG_BUDGET = 1 << 12  # squarefree moduli in an explicit weight system


# ---------------------------------------------------------------------------
# Psi(n, b) and Psi(n, b; A, M)
# ---------------------------------------------------------------------------

def rough_mask(table: SPFTable, n: int, b: int) -> np.ndarray:
    """Boolean mask over M_n (MonicIndex order) of the b-rough polynomials."""
    if n == 0:
        return np.ones(1, dtype=np.bool_)
    return table.degree_slice(n) > b


def psi(field: FieldSpec, n: int, b: int, table: SPFTable) -> int:
    """#{F in M_n : every prime factor of F has degree > b}."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1
    table.check(field, n)
    return int(np.count_nonzero(rough_mask(table, n, b)))


def _residue_vector(field: FieldSpec, n: int, M: Poly) -> np.ndarray:
    if n == 0:
        return np.array([field.one.code()], dtype=np.int64)
    return residue_codes(field, n, M)


def psi_by_residue(field: FieldSpec, n: int, b: int, M: Poly, table: SPFTable) -> np.ndarray:
    """Rough counts split by F mod M; entry c is the class with residue code c."""
    if M.degree < 1:
        raise ValueError("modulus must have degree >= 1")
    if n > 0:
        table.check(field, n)
    res = _residue_vector(field, n, M)
    return np.bincount(res[rough_mask(table, n, b)], minlength=field.q ** M.degree)


def psi_ap(field: FieldSpec, n: int, b: int, A: Poly, M: Poly, table: SPFTable) -> int:
    """#{F in M_n : b-rough, F = A mod M}."""
    return int(psi_by_residue(field, n, b, M, table)[(A % M).code()])


def equidistribution_ratio(field: FieldSpec, n: int, b: int, M: Poly,
                           table: SPFTable) -> tuple[int, int, Fraction | None]:
    """(max, min, max/min) of Psi(n, b; A, M) over invertible A; ratio None if min is 0."""
    counts = psi_by_residue(field, n, b, M, table)
    units = [A.code() for A in unit_residues(M)]
    vals = counts[units]
    hi, lo = int(vals.max()), int(vals.min())
    return hi, lo, (Fraction(hi, lo) if lo else None)


def psi_recursion_report(field: FieldSpec, n: int, b: int, table: SPFTable) -> list[Report]:
    """Check the recursion lower bound and Psi(n, b) >= q^n/(10b+5).

    The recursion's right side q^n - 2q^(n/2) + sum is irrational for odd n.
    The left side is an integer, so comparing it with the ceiling of the
    right side is exact: ceil(x - sqrt(4q^n)) = x - isqrt(4q^n).
    """
    with timed() as sw:
        q = field.q
        params = {"q": q, "n": n, "b": b}
        count = psi(field, n, b, table)
        if b >= n or b < 1:
            # nothing to recurse on: every F is rough (b < 1) or none is (b >= n >= 1)
            expect = q ** n if b < 1 or n == 0 else 0
            out = [Report.check("psi.degenerate", dict(params, degenerate="true"),
                                count, expect, "=")]
        else:
            tail = sum(d * pi(field, d, table) * psi(field, n - d, b, table)
                       for d in range(b + 1, n - b))
            qn = q ** n
            out = [
                Report.check("psi.recursion", dict(params, rhs="ceil"), n * count,
                             qn - math.isqrt(4 * qn) + tail, ">="),
                Report.check("psi.lower_10b5", params, count, Fraction(qn, 10 * b + 5), ">="),
            ]
    for r in out:
        r.wall_time_ms = sw.ms
    return out


# ---------------------------------------------------------------------------
# Selberg sieve
# ---------------------------------------------------------------------------

def selberg_S(field: FieldSpec, z: int, table: SPFTable | None = None) -> Fraction:
    """S(z) = sum over squarefree monic D, deg D <= z, of 1/Phi(D).

    Expands prod_d (1 + x^d/(q^d - 1))^pi(d) up to x^z.
    """
    q = field.q
    coeff = [Fraction(0)] * (z + 1)
    coeff[0] = Fraction(1)
    for d in range(1, z + 1):
        npr = pi(field, d, table) if table is not None and d <= table.max_deg else pi_formula(field, d)
        w = Fraction(1, q ** d - 1)
        new = [Fraction(0)] * (z + 1)
        for deg, c in enumerate(coeff):
            if not c:
                continue
            for k in range(0, min(npr, (z - deg) // d) + 1):
                new[deg + k * d] += c * math.comb(npr, k) * w ** k
        coeff = new
    return sum(coeff)


def squarefree_norm_sum(field: FieldSpec, z: int) -> Fraction:
    """sum_{i <= z} #{squarefree D in M_i} / q^i, from the closed-form counts."""
    q = field.q
    total = Fraction(0)
    for i in range(z + 1):
        sf = q ** i if i <= 1 else q ** i - q ** (i - 1)
        total += Fraction(sf, q ** i)
    return total


@dataclass
class SelbergWeights:
    """Optimal Selberg weights for sifting out primes of degree <= z."""

    z: int
    weights: dict[Poly, Fraction]
    S: Fraction
    theta: dict[Poly, Fraction]
    Q: Fraction
    gradient: dict[Poly, Fraction] = dc_field(repr=False)

    @property
    def exact(self) -> bool:
        return self.Q * self.S == 1

    def perturbation_delta(self, D: Poly, eps: Fraction) -> Fraction:
        """Q(lambda + eps*e_D) - Q(lambda), exactly (Q is quadratic)."""
        return 2 * eps * self.gradient[D] + eps * eps / D.norm

    def locally_minimal(self, eps: Fraction) -> bool:
        """No single lambda_D (D != 1) moved by +-eps lowers Q."""
        return all(self.perturbation_delta(D, s * eps) >= 0
                   for D in self.weights if D.degree > 0 for s in (1, -1))


def _squarefree_upto(primes: list[Poly], z: int) -> list[tuple[int, int]]:
    """(bitmask over primes, degree) for every squarefree product of degree <= z."""
    out = [(0, 0)]

    def grow(start: int, mask: int, deg: int):
        for i in range(start, len(primes)):
            d = deg + primes[i].degree
            if d > z:
                break
            m = mask | (1 << i)
            out.append((m, d))
            grow(i + 1, m, d)

    grow(0, 0, 0)
    return out


def selberg_weights(field: FieldSpec, z: int, table: SPFTable,
                    budget: int = SELBERG_BUDGET) -> SelbergWeights:
    """theta_E = mu(E)/(Phi(E) S(z)), lambda by dual Mobius inversion, and Q(Lambda)."""
    if z < 0:
        raise ValueError("z must be non-negative")
    table.check(field, z)
    q = field.q
    primes = [P for d in range(1, z + 1) for P in table.primes(d)]
    pdeg = [P.degree for P in primes]
    mods = _squarefree_upto(primes, z)
    if len(mods) > budget:
        raise BudgetExceeded(f"{len(mods)} squarefree moduli exceed budget {budget}")

    def bits(mask: int) -> list[int]:
        return [i for i in range(len(primes)) if mask >> i & 1]

    phi = {}
    for mask, _ in mods:
        v = 1
        for i in bits(mask):
            v *= q ** pdeg[i] - 1
        phi[mask] = v
    S = sum(Fraction(1, v) for v in phi.values())
    theta = {mask: Fraction((-1) ** bin(mask).count("1"), phi[mask]) / S for mask, _ in mods}
    lam = {}
    for E, dE in mods:
        acc = Fraction(0)
        for D, _ in mods:
            if D & E == E:
                acc += (-1) ** bin(D & ~E).count("1") * theta[D]
        lam[E] = acc * q ** dE

    deg_of = dict(mods)

    def gcd_deg(a: int, b: int) -> int:
        return sum(pdeg[i] for i in bits(a & b))

    grad = {}
    for D1, d1 in mods:
        row = Fraction(0)
        for D2, d2 in mods:
            if lam[D2]:
                row += lam[D2] / q ** (d1 + d2 - gcd_deg(D1, D2))
        grad[D1] = row
    Q = sum(lam[D] * grad[D] for D, _ in mods)

    def poly_of(mask: int) -> Poly:
        out = field.one
        for i in bits(mask):
            out = out * primes[i]
        return out

    polys = {mask: poly_of(mask) for mask, _ in mods}
    assert all(polys[m].degree == deg_of[m] for m in polys)
    return SelbergWeights(
        z=z,
        weights={polys[m]: lam[m] for m in polys},
        S=S,
        theta={polys[m]: theta[m] for m in polys},
        Q=Q,
        gradient={polys[m]: grad[m] for m in polys},
    )


def selberg_upper_bound_report(field: FieldSpec, n: int, z: int, table: SPFTable) -> list[Report]:
    """Psi(n, z) <= q^n/S(z), and the weaker Psi(n, z) <= q^n/(z(1 - 1/q))."""
    if not 1 <= z <= n / 2:
        raise ValueError("need 1 <= z <= n/2")
    with timed() as sw:
        q = field.q
        count = psi(field, n, z, table)
        S = selberg_S(field, z, table)
        bound = Fraction(q ** n) / S
        weak = Fraction(q ** n) / (z * (1 - Fraction(1, q)))
        params = {"q": q, "n": n, "z": z}
        out = [
            Report.check("selberg.strong", params, count, bound, "<="),
            Report.check("selberg.weak", params, bound, weak, "<="),
        ]
    for r in out:
        r.wall_time_ms = sw.ms
    return out


# ---------------------------------------------------------------------------
# factorization types: xi and the capped count
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CappedTypeQuery:
    """b-rough F of degree n with at most ``cap`` distinct primes of each degree."""

    n: int
    b: int
    cap: int = 3
    E: Poly | None = None
    M: Poly | None = None

    def __post_init__(self):
        if not 1 <= self.b < self.n:
            raise ValueError("need 1 <= b < n")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if (self.E is None) != (self.M is None):
            raise ValueError("give both E and M, or neither")


def _types(table: SPFTable, n: int) -> np.ndarray:
    """(q^n, n) array; column i-1 holds the number of distinct primes of degree i."""
    return table.stats(n).types[:, 1:]


def capped_rough_count(query: CappedTypeQuery, table: SPFTable) -> int:
    n, b = query.n, query.b
    field = table.field
    table.check(field, n)
    keep = rough_mask(table, n, b) & (_types(table, n).max(axis=1) <= query.cap)
    if query.M is not None:
        keep &= _residue_vector(field, n, query.M) == (query.E % query.M).code()
    return int(np.count_nonzero(keep))


def _type_vector(m: FactorizationType | tuple[int, ...], n: int) -> np.ndarray | None:
    ms = m.m if isinstance(m, FactorizationType) else tuple(m)
    if any(ms[n:]):
        return None
    out = np.zeros(n, dtype=np.int64)
    out[: min(n, len(ms))] = ms[:n]
    return out


def xi_by_residue(field: FieldSpec, n: int, m, b: int, M: Poly, table: SPFTable) -> np.ndarray:
    """Counts of F in M_n with type m, split by F mod M (zero when m_1..m_b != 0)."""
    size = field.q ** max(M.degree, 0)
    want = _type_vector(m, n)
    if want is None or any(want[:b]):
        return np.zeros(size, dtype=np.int64)
    if n == 0:
        out = np.zeros(size, dtype=np.int64)
        out[(field.one % M).code() if M.degree >= 1 else 0] = 1
        return out
    table.check(field, n)
    match = np.all(_types(table, n) == want, axis=1)
    if M.degree < 1:
        return np.array([np.count_nonzero(match)], dtype=np.int64)
    return np.bincount(residue_codes(field, n, M)[match], minlength=size)


def xi(field: FieldSpec, n: int, m, b: int, table: SPFTable,
       E: Poly | None = None, M: Poly | None = None) -> int:
    """#{F in M_n : type of F is m, F = E mod M}, times [m_1 = ... = m_b = 0]."""
    if M is None:
        return int(xi_by_residue(field, n, m, b, field.one, table)[0])
    if E is None:
        raise ValueError("residue E required with modulus M")
    return int(xi_by_residue(field, n, m, b, M, table)[(E % M).code()])


def partitions(n: int, min_part: int = 1) -> Iterator[tuple[int, ...]]:
    """Type vectors (m_1, ..., m_n) with sum i*m_i = n and m_i = 0 for i < min_part."""

    def rec(rest: int, part: int):
        if rest == 0:
            yield ()
            return
        if part > rest:
            return
        for k in range(rest // part, -1, -1):
            for tail in rec(rest - k * part, part + 1):
                yield ((part, k),) + tail if k else tail

    for chosen in rec(n, max(min_part, 1)):
        m = [0] * n
        for part, k in chosen:
            m[part - 1] = k
        yield tuple(m)


def xi_decomposition(field: FieldSpec, n: int, m: tuple[int, ...], b: int, D: Poly, M: Poly,
                     table: SPFTable) -> tuple[int, int]:
    """Both sides of the split by the lowest occupied degree j, with i = m_j.

    Left: xi(n, m, D, M).  Right: sum over invertible C of
    xi(n - ij, m - i e_j, C, M) * xi(ij, i e_j, D/C, M).
    Holds for partitions m (squarefree F), where the split F = F1 * F2 is unique.
    """
    if field != M.field:
        raise FieldMismatch("modulus over a different field")
    j = next(k for k, c in enumerate(m, start=1) if c)
    i = m[j - 1]
    rest = list(m)
    rest[j - 1] = 0
    block = [0] * (i * j)
    block[j - 1] = i
    left = xi(field, n, m, b, table, D, M)
    first = xi_by_residue(field, n - i * j, tuple(rest), b, M, table)
    second = xi_by_residue(field, i * j, tuple(block), b, M, table)
    right = 0
    for C in unit_residues(M):
        target = (D * poly_invmod(C, M)) % M
        right += int(first[C.code()]) * int(second[target.code()])
    return left, right


def capped_ratio_report(field: FieldSpec, n: int, b: int, M: Poly, table: SPFTable,
                        cap: int = 3) -> Report:
    """Empirical max/min over invertible E of the capped count in class E (no threshold)."""
    with timed() as sw:
        keep = rough_mask(table, n, b) & (_types(table, n).max(axis=1) <= cap)
        counts = np.bincount(residue_codes(field, n, M)[keep], minlength=field.q ** M.degree)
        vals = counts[[A.code() for A in unit_residues(M)]]
        hi, lo = int(vals.max()), int(vals.min())
    params = {"q": field.q, "n": n, "b": b, "M": M, "cap": cap}
    return Report.check("capped.equidistribution", params, hi, max(lo, 1), "ratio", sw.ms)

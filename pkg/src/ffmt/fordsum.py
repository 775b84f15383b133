"""Prime pools of geometrically growing degree and the divisor-degree sums over them.

The pools E_1, E_2, ... split the primes coprime to a modulus into
consecutive degree intervals (lambda_{j-1}, lambda_j], each grown greedily
while its reciprocal-norm sum stays below a fixed rational just under ln 2.
A vector v = (b_1, ..., b_J) selects the family A(v) of squarefree monics
with exactly b_j prime factors from E_j and none elsewhere.

Every H in A(v) is squarefree, so its divisor-degree profile (tau, W, L)
depends only on the multiset of its prime degrees.  Sums over A(v) are
therefore taken class by class over those multisets, weighted by how many
prime choices realise each class; explicit enumeration of the members is a
second, independent route used when the pools fit in the table.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterator

from .errors import BudgetExceeded, DegreeExceedsTable, FieldMismatch, PoolTooSmall
from .gfpoly import FieldSpec, Poly, poly_gcd
from .mtable import divisor_stats
from .report import Report, timed
from .sieve import SPFTable, factorize_any, pi_formula

# 6931471805599453/10^16 < ln 2 < that + 10^-16
LN2_LOWER = Fraction(6931471805599453, 10 ** 16)

CLASS_BUDGET = 1 << 20
MEMBER_BUDGET = 1 << 16


# ---------------------------------------------------------------------------
# the lambda sequence and its pools
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaSequence:
    field: FieldSpec
    M: Poly
    lambdas: tuple[int, ...]
    counts: dict[int, int]          # degree -> primes of that degree not dividing M
    truncated: bool
    table: SPFTable | None = None

    @property
    def J(self) -> int:
        return len(self.lambdas)

    def bounds(self, j: int) -> tuple[int, int]:
        """(lambda_{j-1}, lambda_j), with lambda_0 = 0."""
        if not 1 <= j <= self.J:
            raise DegreeExceedsTable(
                f"pool {j} not computed (have {self.J}{', truncated' if self.truncated else ''})")
        return (self.lambdas[j - 2] if j >= 2 else 0), self.lambdas[j - 1]

    def degrees(self, j: int) -> range:
        lo, hi = self.bounds(j)
        return range(lo + 1, hi + 1)

    def count(self, d: int) -> int:
        return self.counts[d]

    def pool_size(self, j: int) -> int:
        return sum(self.counts[d] for d in self.degrees(j))

    def pool_sum(self, j: int) -> Fraction:
        q = self.field.q
        return sum((Fraction(self.counts[d], q ** d) for d in self.degrees(j)), Fraction(0))

    def next_degree_term(self, j: int) -> Fraction:
        d = self.lambdas[j - 1] + 1
        return Fraction(self.counts[d], self.field.q ** d)

    def maximal(self, j: int) -> bool:
        """Adding the primes of degree lambda_j + 1 overshoots LN2_LOWER."""
        return self.pool_sum(j) + self.next_degree_term(j) > LN2_LOWER

    def primes(self, j: int) -> list[Poly]:
        """The primes of E_j, ascending by (degree, index); needs the table."""
        lo, hi = self.bounds(j)
        if self.table is None or hi > self.table.max_deg:
            raise DegreeExceedsTable(f"pool {j} reaches degree {hi}, beyond the table")
        out = []
        for d in range(lo + 1, hi + 1):
            out.extend(P for P in self.table.primes(d) if poly_gcd(P, self.M).degree == 0)
        return out

    @property
    def K_empirical(self) -> float:
        return max(abs(math.log2(lam) - j) for j, lam in enumerate(self.lambdas, start=1))

    @property
    def K_int(self) -> int:
        """Least integer K with 2^(j-K) <= lambda_j <= 2^(j+K) for every computed j."""
        K = 0
        for j, lam in enumerate(self.lambdas, start=1):
            while not (Fraction(2) ** (j - K) <= lam <= 2 ** (j + K)):
                K += 1
        return K


def coprime_prime_count(field: FieldSpec, d: int, M_degrees: dict[int, int]) -> int:
    return pi_formula(field, d) - M_degrees.get(d, 0)


def lambda_sequence(field: FieldSpec, M: Poly, j_max: int, degree_cap: int,
                    table: SPFTable | None = None) -> LambdaSequence:
    """Greedy thresholds lambda_1 = 1 < lambda_2 < ... up to j_max of them.

    Prime counts per degree come from the Moebius formula, less the prime
    factors of M, so the thresholds may run past the table; only listing a
    pool's primes needs the table.  If some lambda_j would exceed
    ``degree_cap`` the sequence stops there with ``truncated`` set.
    """
    if M.field != field:
        raise FieldMismatch("modulus over a different field")
    if table is not None and table.field != field:
        raise FieldMismatch(f"table is over {table.field!r}, not {field!r}")
    if j_max < 1 or degree_cap < 1:
        raise ValueError("j_max and degree_cap must be >= 1")
    q = field.q
    M_degrees: dict[int, int] = {}
    if M.degree >= 1:
        for P, _ in factorize_any(M.monic(), table):
            M_degrees[P.degree] = M_degrees.get(P.degree, 0) + 1
    counts: dict[int, int] = {}

    def c(d: int) -> int:
        if d not in counts:
            counts[d] = coprime_prime_count(field, d, M_degrees)
        return counts[d]

    lambdas = [1]
    c(1)
    truncated = False
    while len(lambdas) < j_max:
        d = lambdas[-1] + 1
        s = Fraction(0)
        while s + Fraction(c(d), q ** d) <= LN2_LOWER:
            s += Fraction(c(d), q ** d)
            d += 1
        if d - 1 <= lambdas[-1]:
            raise ArithmeticError(f"degree {d} alone exceeds the pool bound")
        if d - 1 > degree_cap:
            truncated = True
            break
        lambdas.append(d - 1)
    c(lambdas[-1] + 1)
    return LambdaSequence(field, M, tuple(lambdas), counts, truncated, table)


# ---------------------------------------------------------------------------
# vectors and the families A(v)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorV:
    b: tuple[int, ...]

    def __post_init__(self):
        if any(x < 0 for x in self.b):
            raise ValueError("entries must be non-negative")

    @property
    def J(self) -> int:
        return len(self.b)

    @property
    def B(self) -> int:
        return sum(self.b)

    def __getitem__(self, j: int) -> int:
        """1-based entry b_j; zero past the end."""
        return self.b[j - 1] if 1 <= j <= len(self.b) else 0

    def degree_bound(self, pools: LambdaSequence) -> int:
        """sum_j b_j lambda_j, the largest degree a member can have."""
        return sum(bj * pools.bounds(j)[1] for j, bj in enumerate(self.b, start=1) if bj)

    def __str__(self):
        return "(" + ",".join(map(str, self.b)) + ")"


def _check_pools(v: VectorV, pools: LambdaSequence):
    for j, bj in enumerate(v.b, start=1):
        if bj and bj > pools.pool_size(j):
            raise PoolTooSmall(f"b_{j} = {bj} but |E_{j}| = {pools.pool_size(j)}")


def family_size(v: VectorV, pools: LambdaSequence) -> int:
    _check_pools(v, pools)
    return math.prod(comb(pools.pool_size(j), bj) for j, bj in enumerate(v.b, start=1) if bj)


def enumerate_Av(v: VectorV, pools: LambdaSequence) -> Iterator[Poly]:
    """Each member of A(v) once, as a product of distinct pool primes."""
    _check_pools(v, pools)
    one = pools.field.one
    choices = [itertools.combinations(pools.primes(j), bj)
               for j, bj in enumerate(v.b, start=1) if bj]
    for pick in itertools.product(*choices):
        H = one
        for group in pick:
            for P in group:
                H = H * P
        yield H


@dataclass(frozen=True)
class AvSums:
    W: Fraction
    tau: Fraction
    L: Fraction
    inv_norm: Fraction     # sum of 1/|H|
    members: int
    classes: int
    tau_is_power: bool     # tau(H) = 2^B for every member
    max_degree: int

    def triple(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.W, self.tau, self.L


def _degree_classes(pools: LambdaSequence, j: int, size: int) -> list[tuple[tuple[int, ...], int]]:
    """Multisets of ``size`` degrees from pool j, with the number of prime choices for each."""
    out = []
    for ds in itertools.combinations_with_replacement(pools.degrees(j), size):
        ways = 1
        for d, grp in itertools.groupby(ds):
            ways *= comb(pools.count(d), len(list(grp)))
            if not ways:
                break
        if ways:
            out.append((ds, ways))
    return out


def _profile(degrees: tuple[int, ...]) -> tuple[int, int, int]:
    """(tau, W, L) of a squarefree monic whose prime factors have these degrees."""
    tau_d = [1]
    for d in degrees:
        nxt = tau_d + [0] * d
        for t, c in enumerate(tau_d):
            nxt[t + d] += c
        tau_d = nxt
    return sum(tau_d), sum(c * c for c in tau_d), sum(1 for c in tau_d if c)


def sum_stats_over_Av(v: VectorV, pools: LambdaSequence, table: SPFTable | None = None,
                      budget: int = CLASS_BUDGET) -> AvSums:
    """Exact sums of W/|H|, tau/|H| and L/|H| over A(v), class by class."""
    _check_pools(v, pools)
    per_pool = []
    n_classes = 1
    for j, bj in enumerate(v.b, start=1):
        if bj:
            cl = _degree_classes(pools, j, bj)
            per_pool.append(cl)
            n_classes *= len(cl)
            if n_classes > budget:
                raise BudgetExceeded(f"more than {budget} degree classes")
    q = pools.field.q
    sW = sT = sL = sN = Fraction(0)
    members = classes = 0
    ok = True
    max_deg = 0
    for pick in itertools.product(*per_pool):
        degrees = tuple(d for ds, _ in pick for d in ds)
        ways = math.prod(w for _, w in pick)
        tau, W, L = _profile(degrees)
        ok &= tau == 2 ** len(degrees)
        deg = sum(degrees)
        weight = Fraction(ways, q ** deg)
        sW += W * weight
        sT += tau * weight
        sL += L * weight
        sN += weight
        members += ways
        classes += 1
        max_deg = max(max_deg, deg)
    return AvSums(sW, sT, sL, sN, members, classes, ok, max_deg)


def sum_stats_explicit(v: VectorV, pools: LambdaSequence, table: SPFTable,
                       budget: int = MEMBER_BUDGET) -> AvSums:
    """Same sums by listing every member and factoring it through the table."""
    size = family_size(v, pools)
    if size > budget:
        raise BudgetExceeded(f"|A(v)| = {size} > {budget}")
    sW = sT = sL = sN = Fraction(0)
    ok = True
    max_deg = 0
    degree_sets = set()
    for H in enumerate_Av(v, pools):
        st = divisor_stats(H, table)
        w = Fraction(1, H.norm)
        sW += st.W * w
        sT += st.tau * w
        sL += st.L * w
        sN += w
        ok &= st.tau == 2 ** v.B
        max_deg = max(max_deg, H.degree)
        degree_sets.add(tuple(sorted(P.degree for P, _ in factorize_any(H, table))))
    return AvSums(sW, sT, sL, sN, size, len(degree_sets), ok, max_deg)


def w_shape_constant(v: VectorV, sums: AvSums) -> float:
    """sum W/|H| divided by (2 ln 2)^B / (b_1!...b_J!) * sum_j 2^(b_1+...+b_j - j)."""
    shape = 0.0
    run = 0
    for j, bj in enumerate(v.b, start=1):
        run += bj
        shape += 2.0 ** (run - j)
    shape *= (2 * math.log(2)) ** v.B / math.prod(factorial(x) for x in v.b)
    return float(sums.W) / shape


# ---------------------------------------------------------------------------
# the vector family and the combinatorial sum
# ---------------------------------------------------------------------------

def f_of_v(v: VectorV, N: int) -> Fraction:
    """sum over h = N..J of 2^(N - 1 - h + b_N + ... + b_h)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if any(v[j] for j in range(1, N)):
        raise ValueError(f"entries before position {N} must vanish")
    total = Fraction(0)
    run = 0
    for h in range(N, v.J + 1):
        run += v[h]
        total += Fraction(2) ** (N - 1 - h + run)
    return total


def b_set(N: int, k: int) -> Iterator[VectorV]:
    """Vectors of length J = N + k - 1, zero before N, summing to k, b_j <= N min(j, J-j+1)."""
    if N < 1 or k < 1:
        raise ValueError("N and k must be >= 1")
    J = N + k - 1
    caps = [N * min(j, J - j + 1) for j in range(N, J + 1)]

    def rec(i: int, rest: int) -> Iterator[tuple[int, ...]]:
        if i == len(caps):
            if rest == 0:
                yield ()
            return
        room = sum(caps[i + 1:])
        for x in range(max(0, rest - room), min(caps[i], rest) + 1):
            for tail in rec(i + 1, rest - x):
                yield (x,) + tail

    for tail in rec(0, k):
        yield VectorV((0,) * (N - 1) + tail)


def ford_sum(N: int, k: int, budget: int = 1 << 22) -> tuple[Fraction, Fraction]:
    """(sum over B of 1/(b_N!...b_J! f(v)), k^(k-1)/k!)."""
    total = Fraction(0)
    for i, v in enumerate(b_set(N, k)):
        if i >= budget:
            raise BudgetExceeded(f"more than {budget} vectors")
        total += 1 / (math.prod(factorial(x) for x in v.b) * f_of_v(v, N))
    return total, Fraction(k ** (k - 1), factorial(k))


def ford_parameters(eta: Fraction, b: int, K: int) -> tuple[int, int]:
    """(N, k): least N >= 1 with N 2^(K+1-N) <= eta, and k = floor(log2 b - 2N)."""
    eta = Fraction(eta)
    if eta <= 0 or b < 1:
        raise ValueError("need eta > 0 and b >= 1")
    N = 1
    while N * Fraction(2) ** (K + 1 - N) > eta:
        N += 1
    return N, b.bit_length() - 1 - 2 * N


# ---------------------------------------------------------------------------
# the L-sum and the Cauchy-Schwarz pipeline
# ---------------------------------------------------------------------------

def lsum(field: FieldSpec, bound: int, M: Poly, table: SPFTable) -> Fraction:
    """sum of L(H)/|H| over monic H with deg H <= bound and (H, M) = 1."""
    if bound < 0:
        return Fraction(0)
    table.check(field, bound)
    q = field.q
    total = Fraction(1)
    for d in range(1, bound + 1):
        st = table.stats(d, M)
        total += Fraction(int(st.L[st.coprime].sum()), q ** d)
    return total


def cs_pipeline_report(field: FieldSpec, M: Poly, N: int, k: int, pools: LambdaSequence,
                       table: SPFTable, member_budget: int = MEMBER_BUDGET) -> list[Report]:
    """Check the Cauchy-Schwarz lower bound family by family, then in aggregate.

    Per vector: tau = 2^B on every member; sum L/|H| >= (sum tau/|H|)^2/(sum W/|H|);
    member degrees within sum b_j lambda_j and that within N 2^(K+J+2).  When the
    pools fit in the table, the class sums are matched against explicit ones
    and the families are checked pairwise disjoint by their member sets.
    Finally the summed lower bounds are compared with the L-sum over the
    largest degree window, if the table reaches it.
    """
    if pools.field != field or pools.M != M:
        raise FieldMismatch("pools were built for another field or modulus")
    out: list[Report] = []
    K = pools.K_int
    aggregate = Fraction(0)
    window = 0
    member_sets: list[set[int]] | None = []
    with timed() as sw:
        for v in b_set(N, k):
            params = {"q": field.q, "N": N, "k": k, "v": str(v)}
            s = sum_stats_over_Av(v, pools, table)
            out.append(Report.check("cs.tau", params, s.tau, 2 ** v.B * s.inv_norm, "="))
            if not s.tau_is_power:
                out[-1].passed = False
            rhs = s.tau * s.tau / s.W
            r = Report.check("cs.per_v", params, s.L, rhs, ">=")
            r.params["equality"] = "yes" if s.L == rhs else "no"
            out.append(r)
            bound = v.degree_bound(pools)
            out.append(Report.check("cs.degree", params, s.max_degree, bound, "<="))
            out.append(Report.check("cs.degree_chain", dict(params, K=K), bound,
                                    N * 2 ** (K + v.J + 2), "<="))
            aggregate += rhs
            window = max(window, bound)
            if member_sets is not None:
                try:
                    ex = sum_stats_explicit(v, pools, table, member_budget)
                    members = {H.code() for H in enumerate_Av(v, pools)}
                except (DegreeExceedsTable, BudgetExceeded):
                    member_sets = None
                else:
                    out.append(Report.check("cs.explicit_W", params, ex.W, s.W, "="))
                    out.append(Report.check("cs.explicit_L", params, ex.L, s.L, "="))
                    member_sets.append(members)
        params = {"q": field.q, "N": N, "k": k}
        if member_sets is not None:
            overlap = sum(len(a & b) for a, b in itertools.combinations(member_sets, 2))
            out.append(Report.check("cs.disjoint", params, overlap, 0, "="))
        if window <= table.max_deg:
            out.append(Report.check("cs.aggregate", dict(params, window=window), aggregate,
                                    lsum(field, window, M, table), "<="))
    for r in out:
        r.wall_time_ms = sw.ms
    return out

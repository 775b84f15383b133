import math
import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffmt.errors import BudgetExceeded, FieldMismatch, NotCoprime, SieveFileError
from ffmt.gfpoly import enumerate_monics, field_from_q, poly_parse, residues, unit_residues
from ffmt.mtable import (
    DELTA,
    APSpec,
    HitSet,
    cauchy_schwarz_family,
    disjoint_classes_check,
    divisor_stats,
    h_ap_count,
    h_count,
    h_count_scan,
    h_divisor_ap_count,
    h_two_ap_count,
    m_table_count,
    mark_product_set,
    product_set,
    product_set_count,
    scaling_ratio,
)

import oracle


def P(s, F):
    return poly_parse(s, F)


def brute_products(omega1, omega2, p):
    return {oracle.mul(a.coeffs, b.coeffs, p) for a in omega1.members() for b in omega2.members()}


# --- the worked example ----------------------------------------------------

def test_worked_product_example(F2):
    omega1 = APSpec(3, F2.one, F2.T)
    omega2 = APSpec(3, P("T+1", F2), P("T^2", F2))
    assert product_set_count(omega1, omega2) == 7
    rows = [P(s, F2) for s in ("T^3+1", "T^3+T+1", "T^3+T^2+1", "T^3+T^2+T+1")]
    cols = [P(s, F2) for s in ("T^3+T+1", "T^3+T^2+T+1")]
    assert sorted(omega1.members(), key=lambda G: G.code()) == rows
    assert sorted(omega2.members(), key=lambda G: G.code()) == cols
    repeated = P("T^6+T^5+T^3+1", F2)
    assert sum(G1 * G2 == repeated for G1 in rows for G2 in cols) == 2
    hits = product_set(omega1, omega2)
    assert all(G1 * G2 in hits for G1 in rows for G2 in cols)
    assert h_two_ap_count(F2, 6, 3, F2.one, F2.T, P("T+1", F2), P("T^2", F2)) == 7
    assert m_table_count(F2, 3, F2.one, F2.T, P("T+1", F2), P("T^2", F2)) == 7


def test_spot_counts(F2, T2):
    assert h_count(F2, 4, 2) == 9
    assert h_count_scan(F2, 4, 2, T2) == 9
    assert m_table_count(F2, 2) == 9
    assert h_divisor_ap_count(F2, 4, 2, F2.one, F2.T) == 7


def test_h_divisor_ap_listing(F2):
    hits = product_set(APSpec(2, F2.one, F2.T), APSpec.full(F2, 2))
    want = {P(s, F2) for s in ("T^4+1", "T^4+T^3+T^2+T", "T^4+T^3+T+1", "T^4+T^2",
                                "T^4+T", "T^4+T^2+1", "T^4+T^3+T^2")}
    assert {G for G in enumerate_monics(F2, 4) if G in hits} == want


def test_singleton_family_is_injective(F3):
    G = P("T^2+2", F3)
    single = APSpec(2, G, P("T^3", F3))
    assert single.size() == 1
    other = APSpec(3, F3.one, F3.T)
    assert product_set_count(other, single) == other.size()


def test_trivial_degrees(F3):
    for n in range(0, 5):
        assert h_count(F3, n, 0) == 3 ** n
        assert h_count(F3, n, n) == 3 ** n
    with pytest.raises(ValueError):
        h_count(F3, 3, 4)


# --- agreement with the brute-force oracle ---------------------------------

@pytest.mark.parametrize("q,n_max", [(2, 8), (3, 5), (5, 3)])
def test_h_count_matches_oracle(q, n_max):
    F = field_from_q(q)
    for n in range(1, n_max + 1):
        for b in range(1, n):
            assert h_count(F, n, b) == oracle.h_count(q, n, b), (q, n, b)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_marking_matches_scan(tables, q):
    F, table = field_from_q(q), tables(q)
    top = min(table.max_deg, {2: 14, 3: 8, 4: 7}[q])
    for n in range(1, top + 1):
        for b in range(0, n // 2 + 1):
            assert h_count(F, n, b) == h_count_scan(F, n, b, table), (n, b)


def test_ap_variants_against_oracle(F3):
    M = P("T^2+1", F3)
    for A in unit_residues(M):
        got = h_ap_count(F3, 4, 2, A, M)
        prods = {oracle.mul(g, h, 3) for g in oracle.monics(3, 2) for h in oracle.monics(3, 2)}
        want = sum(1 for f in prods if oracle.mod(f, M.coeffs, 3) == A.coeffs)
        assert got == want


def test_two_ap_matches_brute_force(F3):
    om1 = APSpec(2, P("T+2", F3), P("T", F3))
    om2 = APSpec(3, P("2*T+1", F3), P("T^2+T+2", F3))
    assert h_two_ap_count(F3, 5, 2, om1.A, om1.M, om2.A, om2.M) == len(brute_products(om1, om2, 3))
    # swapping the two families gives the same set
    assert h_two_ap_count(F3, 5, 3, om2.A, om2.M, om1.A, om1.M) == len(brute_products(om1, om2, 3))


def test_one_modulus_reduces_to_h(F2):
    for n in range(2, 9):
        for b in range(1, n):
            plain = h_count(F2, n, b)
            assert h_two_ap_count(F2, n, b, F2.one, F2.one, F2.one, F2.one) == plain
            assert h_divisor_ap_count(F2, n, b, F2.one, F2.one) == plain


def test_m_table_ap_is_subset(F2):
    full = m_table_count(F2, 4)
    for M in (P("T", F2), P("T^2+T+1", F2)):
        for A in unit_residues(M):
            assert m_table_count(F2, 4, A, M) <= full


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 8), st.integers(0, 8), st.integers(1, 3))
def test_random_ap_families_match_oracle(b1, b2, r1, r2, mdeg):
    F = field_from_q(3)
    M1 = F.T ** mdeg
    M2 = P("T+1", F) ** min(mdeg, 2)
    A1 = next(iter(enumerate_monics(F, 1))) if r1 % 2 else F.one
    A2 = F.poly([r2 % 3, 1]) if r2 % 3 else F.one
    om1, om2 = APSpec(b1, A1, M1), APSpec(b2, A2, M2)
    want = brute_products(om1, om2, 3)
    assert product_set_count(om1, om2) == len(want)
    assert om1.size() == sum(1 for G in enumerate_monics(F, b1) if om1.contains(G))


# --- sharding, budgets, hit sets -------------------------------------------

def test_sharded_count_agrees(F2):
    for n, b in ((10, 5), (12, 4), (11, 3)):
        whole = h_count(F2, n, b)
        assert h_count(F2, n, b, budget=2 ** (n - 3)) == whole
    assert h_ap_count(F2, 10, 4, F2.one, F2.T, budget=64) == h_ap_count(F2, 10, 4, F2.one, F2.T)


def test_threads_give_same_bits(F2):
    a = mark_product_set(APSpec.full(F2, 4), APSpec.full(F2, 6), threads=1)
    b = mark_product_set(APSpec.full(F2, 4), APSpec.full(F2, 6), threads=3)
    assert (a.bits == b.bits).all()


def test_budget_errors(F2):
    with pytest.raises(BudgetExceeded):
        product_set(APSpec.full(F2, 5), APSpec.full(F2, 5), budget=100)
    with pytest.raises(BudgetExceeded):
        h_count(F2, 30, 15, budget=10)


def test_hitset_export_roundtrip(tmp_path, F2):
    hits = product_set(APSpec.full(F2, 3), APSpec.full(F2, 4))
    path = tmp_path / "h.ffhs"
    hits.export(path)
    raw = path.read_bytes()
    assert raw[:4] == b"FFHS"
    assert int.from_bytes(raw[4:12], "little") == 2 and int.from_bytes(raw[12:20], "little") == 7
    back = HitSet.load(path, F2)
    assert (back.bits == hits.bits).all() and back.n == 7


def test_hitset_load_errors(tmp_path, F2, F3):
    bad = tmp_path / "bad"
    bad.write_bytes(b"nope")
    with pytest.raises(SieveFileError):
        HitSet.load(bad, F2)
    good = tmp_path / "good"
    product_set(APSpec.full(F2, 2), APSpec.full(F2, 2)).export(good)
    with pytest.raises(FieldMismatch):
        HitSet.load(good, F3)
    good.write_bytes(good.read_bytes()[:20])
    with pytest.raises(SieveFileError):
        HitSet.load(good, F2)


def test_partial_hitset_cannot_export(tmp_path, F2):
    part = mark_product_set(APSpec.full(F2, 2), APSpec.full(F2, 2), lo=0, hi=8)
    with pytest.raises(ValueError):
        part.export(tmp_path / "x")


def test_restrict_partitions(F2):
    hits = product_set(APSpec.full(F2, 3), APSpec.full(F2, 5))
    M = P("T^3+T+1", F2)
    assert sum(hits.restrict(A, M).count() for A in residues(M)) == hits.count()


# --- disjoint residue classes ----------------------------------------------

def test_disjoint_classes(F2):
    for M in (P("T", F2), P("T^2+1", F2), P("T^3+T+1", F2)):
        for A in unit_residues(M):
            disjoint, total, bound = disjoint_classes_check(F2, 8, 3, A, M)
            assert disjoint and total <= bound


def test_disjoint_requires_coprime(F2):
    with pytest.raises(NotCoprime):
        disjoint_classes_check(F2, 6, 2, F2.T, P("T^2", F2))


# --- divisor statistics ----------------------------------------------------

def test_divisor_stats_examples(F2, T2):
    ds = divisor_stats(P("T^3+T", F2), T2)
    assert (ds.tau, ds.L, ds.tau_d, ds.W) == (6, 4, (1, 2, 2, 1), 10)
    assert ds.degset == frozenset({0, 1, 2, 3})
    ds = divisor_stats(P("T^4+T+1", F2), T2)
    assert (ds.L, ds.tau, ds.W) == (2, 2, 2)
    ds = divisor_stats(F2.one, T2)
    assert (ds.L, ds.tau, ds.W) == (1, 1, 1)


@pytest.mark.parametrize("q", [2, 3])
def test_divisor_stats_against_oracle(tables, q):
    F, table = field_from_q(q), tables(q)
    rng = random.Random(q)
    for _ in range(60):
        d = rng.randint(1, 7 if q == 2 else 5)
        f = tuple(rng.randrange(q) for _ in range(d)) + (1,)
        ds = divisor_stats(F.poly(f), table)
        assert list(ds.tau_d) == oracle.divisor_degrees(f, q)


def test_cauchy_schwarz_random_families(F2, T2):
    rng = random.Random(7)
    pool = [G for d in range(1, 9) for G in enumerate_monics(F2, d)]
    for _ in range(25):
        fam = rng.sample(pool, rng.randint(1, 40))
        lhs, rhs = cauchy_schwarz_family(fam, T2)
        assert lhs <= rhs


# --- delta and the scaling ratio -------------------------------------------

def test_delta_digits():
    assert f"{DELTA:.5f}" == "0.08607"
    mpmath.mp.dps = 30
    exact = 1 - (1 + mpmath.log(mpmath.log(2))) / mpmath.log(2)
    assert abs(DELTA - float(exact)) < 1e-15


def test_scaling_ratio_normalizations():
    nat, logq = scaling_ratio(2, 10, 5, 400)
    head = 400 * 5 ** DELTA / 1024
    assert math.isclose(nat, head * (1 + math.log(5)) ** 1.5)
    assert math.isclose(logq, head * (1 + math.log2(5)) ** 1.5)
    # log 1 = 0 in every base
    nat, logq = scaling_ratio(3, 4, 1, 10)
    assert nat == logq and math.isclose(nat, 10 / 81)
    with pytest.raises(ValueError):
        scaling_ratio(2, 4, 0, 1)

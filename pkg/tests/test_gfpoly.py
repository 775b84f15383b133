import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffmt.errors import (
    CoefficientOutOfRange,
    DivisionByZero,
    FieldMismatch,
    FieldTooLarge,
    NotIrreducible,
    NotMonic,
    NotPrime,
    PolySyntaxError,
)
from ffmt.gfpoly import (
    NEG_INF,
    Poly,
    enumerate_monics,
    field_create,
    field_from_q,
    monic_decode,
    monic_encode,
    poly_divrem,
    poly_format,
    poly_gcd,
    poly_lcm,
    poly_mul,
    poly_parse,
    poly_powmod,
    poly_xgcd,
)

from oracle import mul as oracle_mul

QS = (2, 3, 4, 5, 7, 8, 9, 16)


def P(s, F):
    return poly_parse(s, F)


# -- fields ------------------------------------------------------------------

def test_prime_field():
    F = field_create(2, 1)
    assert (F.p, F.e, F.q, F.reduction) == (2, 1, 2, None)


def test_f4_default_reduction():
    F = field_create(2, 2)
    assert F.reduction == (1, 1, 1)  # T^2+T+1


def test_default_reduction_is_least_irreducible():
    # over F_3 the monic quadratics by index: T^2, T^2+1, T^2+2, T^2+T, T^2+T+1, T^2+T+2, ...
    # T^2+1 is irreducible (-1 is not a square mod 3)
    assert field_create(3, 2).reduction == (1, 0, 1)
    assert field_create(2, 3).reduction == (1, 1, 0, 1)


def test_field_errors():
    with pytest.raises(NotPrime):
        field_create(4, 1)
    with pytest.raises(FieldTooLarge):
        field_create(2, 17)
    with pytest.raises(NotIrreducible):
        field_create(2, 2, (1, 0, 1))  # T^2+1 = (T+1)^2
    with pytest.raises(NotPrime):
        field_from_q(6)


def test_fields_are_cached():
    assert field_create(3, 2) is field_from_q(9)


@pytest.mark.parametrize("q", QS)
def test_field_axioms_exhaustive(q):
    F = field_from_q(q)
    els = range(q)
    for a in els:
        assert F.add(a, 0) == a and F.mul(a, 1) == a
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
    sample = random.Random(q)
    for _ in range(2000):
        a, b, c = (sample.randrange(q) for _ in range(3))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(a, b) == F.mul(b, a)


def test_inverse_of_zero():
    with pytest.raises(DivisionByZero):
        field_from_q(4).inv(0)


@pytest.mark.parametrize("q", (4, 8, 9))
def test_mul_table_matches_scalar(q):
    F = field_from_q(q)
    t = F.mul_table
    assert all(int(t[a, b]) == F.mul(a, b) for a in range(q) for b in range(q))


# -- ring arithmetic ---------------------------------------------------------

def test_worked_example_products(F2):
    assert P("T^3+T+1", F2) * P("T^3+T^2+T+1", F2) == P("T^6+T^5+T^3+1", F2)
    assert P("T^3+1", F2) * P("T^3+T+1", F2) == P("T^6+T^4+T+1", F2)


def test_identity_and_zero(F2):
    a = P("T^4+T+1", F2)
    assert a * F2.one == a
    assert (a * F2.zero).is_zero()
    assert F2.zero.degree is NEG_INF


def test_zero_degree_marker():
    assert NEG_INF < 0 and NEG_INF < -10**9
    with pytest.raises(TypeError):
        NEG_INF + 1


def test_divrem(F3):
    a, b = P("T^5+2*T^2+1", F3), P("T^2+T+2", F3)
    q, r = poly_divrem(a, b)
    assert q * b + r == a and r.degree < b.degree
    with pytest.raises(DivisionByZero):
        poly_divrem(a, F3.zero)
    with pytest.raises(DivisionByZero):
        poly_lcm(a, F3.zero)


def test_field_mismatch(F2, F3):
    with pytest.raises(FieldMismatch):
        poly_mul(F2.T, F3.T)


def test_gcd_lcm_xgcd(F2):
    a = P("T^3+T", F2)         # T (T+1)^2
    b = P("T^2+1", F2)         # (T+1)^2
    assert poly_gcd(a, b) == b
    assert poly_lcm(a, b) == a
    g, s, t = poly_xgcd(P("T^3+T+1", F2), P("T^2+1", F2))
    assert g == F2.one and s * P("T^3+T+1", F2) + t * P("T^2+1", F2) == g


def test_powmod(F2):
    M = P("T^2+T+1", F2)
    assert poly_powmod(F2.T, 2, M) == P("T+1", F2)
    assert poly_powmod(P("T+1", F2), 2, M) == F2.T
    assert poly_powmod(F2.T, 3, M) == F2.one


def test_matches_oracle_multiplication():
    rng = random.Random(5)
    for p in (2, 3, 5, 7):
        F = field_from_q(p)
        for _ in range(200):
            a = [rng.randrange(p) for _ in range(rng.randrange(1, 9))]
            b = [rng.randrange(p) for _ in range(rng.randrange(1, 9))]
            assert (Poly(F, a) * Poly(F, b)).coeffs == oracle_mul(tuple(a), tuple(b), p) or \
                not any(a) or not any(b)


def _rand_poly(rng, F, maxdeg=6):
    return Poly(F, [rng.randrange(F.q) for _ in range(rng.randrange(0, maxdeg + 1))])


@pytest.mark.parametrize("q", (2, 3, 4, 5))
def test_commutative_associative_random(q):
    F = field_from_q(q)
    rng = random.Random(1000 + q)
    for _ in range(10_000):
        a, b, c = (_rand_poly(rng, F, 4) for _ in range(3))
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)


@st.composite
def monic_pairs(draw):
    q = draw(st.sampled_from((2, 3, 4, 5, 9)))
    F = field_from_q(q)
    polys = []
    for _ in range(2):
        d = draw(st.integers(0, 6))
        low = draw(st.lists(st.integers(0, q - 1), min_size=d, max_size=d))
        polys.append(Poly(F, low + [1]))
    return polys


@given(monic_pairs())
@settings(max_examples=300, deadline=None)
def test_degree_and_norm_multiplicative(pair):
    f, g = pair
    h = f * g
    assert h.degree == f.degree + g.degree
    assert h.norm == f.norm * g.norm
    assert h.is_monic()


@given(monic_pairs())
@settings(max_examples=300, deadline=None)
def test_gcd_lcm_properties(pair):
    f, g = pair
    d = poly_gcd(f, g)
    assert d.is_monic()
    assert (f % d).is_zero() and (g % d).is_zero()
    assert poly_lcm(f, g) * d == (f * g).monic()


# -- text form ---------------------------------------------------------------

def test_parse_examples(F2, F3):
    assert P("T^3+T+1", F2).coeffs == (1, 1, 0, 1)
    assert P("[1,1,0,1]", F2) == P("T^3+T+1", F2)
    with pytest.raises(CoefficientOutOfRange):
        P("T^2+5", F3)
    with pytest.raises(PolySyntaxError):
        P("T^^2", F3)
    with pytest.raises(PolySyntaxError):
        P("", F3)


def test_format(F3):
    assert poly_format(P("2*T^3+T+2", F3)) == "2*T^3+T+2"
    assert poly_format(F3.zero) == "0"
    F9 = field_from_q(9)
    assert poly_format(Poly(F9, (5, 0, 1))) == "[5,0,1]"


@given(st.sampled_from((2, 3, 5, 7, 4, 9)), st.lists(st.integers(0, 100), max_size=8))
@settings(max_examples=300, deadline=None)
def test_parse_format_roundtrip(q, raw):
    F = field_from_q(q)
    f = Poly(F, [c % q for c in raw])
    if f.is_zero():
        return
    assert poly_parse(poly_format(f), F) == f


def test_parse_reordered_terms(F3):
    assert P("1+T+2*T^3", F3) == P("2*T^3+T+1", F3)


# -- monic indexing ----------------------------------------------------------

def test_encode_examples(F2, F3):
    assert tuple(monic_encode(P("T^2", F2))) == (2, 0)
    assert tuple(monic_encode(P("T^2+T+1", F2))) == (2, 3)
    assert tuple(monic_encode(P("T+2", F3))) == (1, 2)
    with pytest.raises(NotMonic):
        monic_encode(P("2*T+1", F3))


@pytest.mark.parametrize("q", (2, 3, 4, 5))
def test_encode_decode_bijection(q):
    F = field_from_q(q)
    for d in range(7):
        if q ** d > 20_000:
            break
        seen = set()
        for i, f in enumerate(enumerate_monics(F, d)):
            mi = monic_encode(f)
            assert mi == (d, i)
            assert monic_decode(F, mi) == f
            seen.add(f.coeffs)
        assert len(seen) == q ** d


def test_enumerate_examples(F2, F3):
    assert list(enumerate_monics(F2, 0)) == [F2.one]
    assert list(enumerate_monics(F2, 1)) == [F2.T, P("T+1", F2)]
    assert len(list(enumerate_monics(F3, 2))) == 9

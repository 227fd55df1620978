"""Semiring tables are pinned by hand-computed oracles; laws are property-tested."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mgl.semiring import (
    HI,
    LO,
    N01W,
    NAT_EXACT,
    NAT_LEQ,
    OMEGA,
    RAT,
    SEC,
    SEMIRINGS,
    GradeError,
    boxast,
    get_semiring,
    grade_add,
    grade_leq,
    grade_mul,
    vec_add,
    vec_leq,
    vec_scale,
    zero_vec,
)

# ------------------------------------------------------------- frozen tables

N01W_ADD = {
    (0, 0): 0, (0, 1): 1, (0, OMEGA): OMEGA,
    (1, 0): 1, (1, 1): OMEGA, (1, OMEGA): OMEGA,
    (OMEGA, 0): OMEGA, (OMEGA, 1): OMEGA, (OMEGA, OMEGA): OMEGA,
}

N01W_MUL = {
    (0, 0): 0, (0, 1): 0, (0, OMEGA): 0,
    (1, 0): 0, (1, 1): 1, (1, OMEGA): OMEGA,
    (OMEGA, 0): 0, (OMEGA, 1): OMEGA, (OMEGA, OMEGA): OMEGA,
}

N01W_LEQ = {
    (0, 0): True, (0, 1): False, (0, OMEGA): True,
    (1, 0): False, (1, 1): True, (1, OMEGA): True,
    (OMEGA, 0): False, (OMEGA, 1): False, (OMEGA, OMEGA): True,
}


def test_n01w_tables():
    for (a, b), want in N01W_ADD.items():
        assert N01W.add(a, b) == want, (a, "+", b)
    for (a, b), want in N01W_MUL.items():
        assert N01W.mul(a, b) == want, (a, "*", b)
    for (a, b), want in N01W_LEQ.items():
        assert N01W.leq(a, b) is want, (a, "<=", b)


def test_sec_tables():
    assert SEC.zero == HI and SEC.one == LO
    assert SEC.add(HI, HI) == HI
    assert SEC.add(HI, LO) == LO
    assert SEC.add(LO, HI) == LO
    assert SEC.add(LO, LO) == LO
    assert SEC.mul(LO, LO) == LO
    assert SEC.mul(LO, HI) == HI
    assert SEC.mul(HI, LO) == HI
    assert SEC.mul(HI, HI) == HI
    assert SEC.leq(LO, HI) and not SEC.leq(HI, LO)
    assert SEC.leq(LO, LO) and SEC.leq(HI, HI)


def test_nat_orders_differ():
    assert NAT_LEQ.leq(2, 3)
    assert not NAT_EXACT.leq(2, 3)
    assert NAT_EXACT.leq(3, 3)


def test_parse_and_show_round_trip():
    assert NAT_EXACT.parse("7") == 7
    assert N01W.parse("w") == OMEGA and N01W.show(OMEGA) == "w"
    assert SEC.parse("Hi") == HI
    assert RAT.parse("5/3") == Fraction(5, 3)
    assert RAT.show(Fraction(5, 3)) == "5/3"
    assert RAT.show(Fraction(4, 2)) == "2"
    with pytest.raises(GradeError):
        NAT_LEQ.parse("w")
    with pytest.raises(GradeError):
        N01W.parse("2")
    with pytest.raises(GradeError):
        RAT.parse("-1/2")
    with pytest.raises(GradeError):
        get_semiring("bool")


# ------------------------------------------------------------ boxast oracles


def test_boxast_hand_oracles():
    assert boxast(NAT_EXACT, (2, 3), (1, 1), 2) == (5, 5)
    assert boxast(N01W, (1, 1), (1,), 2) == (OMEGA,)
    assert boxast(NAT_LEQ, (), (1, 0), 0) == (0, 0)
    assert boxast(SEC, (LO, HI), (LO,), 2) == (LO,)
    assert boxast(RAT, (Fraction(1, 2), Fraction(1, 3)), (Fraction(2), Fraction(6)), 2) == (
        Fraction(5, 3),
        Fraction(5),
    )
    with pytest.raises(GradeError):
        boxast(NAT_LEQ, (1, 2), (1,), 3)


def test_boxast_identities():
    rng = random.Random(7)
    for sr in SEMIRINGS.values():
        for _ in range(50):
            d2 = tuple(sr.sample(rng) for _ in range(rng.randrange(0, 4)))
            r1, r2 = sr.sample(rng), sr.sample(rng)
            # (r1, r2) applied to two copies equals scaling by r1 + r2
            assert boxast(sr, (r1, r2), d2, 2) == vec_scale(sr, sr.add(r1, r2), d2)
            # the unit grade recovers the provider vector
            assert boxast(sr, (sr.one,), d2, 1) == d2
            assert boxast(sr, (), d2, 0) == zero_vec(sr, len(d2))


# ----------------------------------------------------------------- law suite


def _grades(sr):
    rng = random.Random(hash(sr.id) & 0xFFFF)
    return st.sampled_from([sr.sample(rng) for _ in range(40)] + [sr.zero, sr.one])


@pytest.mark.parametrize("sr", list(SEMIRINGS.values()), ids=lambda s: s.id)
def test_semiring_laws(sr):
    @given(_grades(sr), _grades(sr), _grades(sr))
    def laws(a, b, c):
        add, mul, leq = sr.add, sr.mul, sr.leq
        assert add(a, b) == add(b, a)
        assert add(add(a, b), c) == add(a, add(b, c))
        assert add(sr.zero, a) == a
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert mul(sr.one, a) == a and mul(a, sr.one) == a
        assert mul(sr.zero, a) == sr.zero and mul(a, sr.zero) == sr.zero
        assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
        assert mul(add(a, b), c) == add(mul(a, c), mul(b, c))
        assert leq(a, a)
        if leq(a, b):
            assert leq(add(a, c), add(b, c))
            assert leq(mul(a, c), mul(b, c))
            assert leq(mul(c, a), mul(c, b))
            if leq(b, c):
                assert leq(a, c)

    laws()


@pytest.mark.parametrize("sr", list(SEMIRINGS.values()), ids=lambda s: s.id)
def test_raised_respects_order(sr):
    rng = random.Random(3)
    for _ in range(200):
        g = sr.sample(rng)
        assert sr.leq(g, sr.raised(g, rng))


def test_vector_ops():
    sr = NAT_LEQ
    assert vec_add(sr, (1, 2), (3, 4)) == (4, 6)
    assert vec_scale(sr, 2, (1, 0, 3)) == (2, 0, 6)
    assert vec_leq(sr, (1, 2), (1, 3)) and not vec_leq(sr, (2, 2), (1, 3))
    assert grade_add(sr, 1, 1) == 2 and grade_mul(sr, 2, 3) == 6 and grade_leq(sr, 0, 5)
    with pytest.raises(GradeError):
        vec_add(sr, (1,), (1, 2))
    with pytest.raises(GradeError):
        vec_leq(sr, (1,), ())

"""Preordered semirings of grades, grade vectors, and the row product.

A semiring instance packages the carrier operations (0, 1, +, *) together
with a preorder ``leq`` that is monotone for both operations.  Grades are
plain Python values: ints for the two natural-number instances, ``Fraction``
for ``rat``, and interned strings for the two finite instances.

The five built-in instances:

==========  =======================  ==========================================
id          carrier                  order
==========  =======================  ==========================================
nat-exact   naturals                 discrete (r <= s iff r == s)
nat-leq     naturals                 usual <=
n01w        {0, 1, w}                reflexive plus 0 <= w and 1 <= w
sec         {Lo, Hi} (1=Lo, 0=Hi)    Lo <= Hi
rat         nonnegative fractions    usual <=
==========  =======================  ==========================================

``n01w`` saturates: any sum or product that would leave {0, 1} collapses to
``w``, except that multiplication by 0 annihilates (0*w = w*0 = 0).  ``sec``
is the two-point security lattice: * is "both public" (both-Lo -> Lo, else
Hi), + is "either public" (both-Hi -> Hi, else Lo).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

Grade = Any
GradeVec = tuple

OMEGA = "w"
LO = "Lo"
HI = "Hi"


class GradeError(ValueError):
    """A grade literal failed to parse or an unknown semiring was requested."""


@dataclass(frozen=True)
class Semiring:
    id: str
    zero: Grade
    one: Grade
    add: Callable[[Grade, Grade], Grade]
    mul: Callable[[Grade, Grade], Grade]
    leq: Callable[[Grade, Grade], bool]
    parse: Callable[[str], Grade]
    show: Callable[[Grade], str]
    # test/generator support: draw a grade, and draw some g' with g <= g'
    sample: Callable[[Any], Grade] = field(repr=False, default=None)
    raised: Callable[[Grade, Any], Grade] = field(repr=False, default=None)

    def __str__(self) -> str:
        return self.id


# ---------------------------------------------------------------- naturals


def _parse_nat(s: str) -> int:
    if not s.isdigit():
        raise GradeError(f"expected a natural number, got {s!r}")
    return int(s)


def _sample_nat(rng) -> int:
    return rng.choice((0, 0, 1, 1, 1, 2, 2, 3, 4, 5))


NAT_EXACT = Semiring(
    id="nat-exact",
    zero=0,
    one=1,
    add=lambda a, b: a + b,
    mul=lambda a, b: a * b,
    leq=lambda a, b: a == b,
    parse=_parse_nat,
    show=str,
    sample=_sample_nat,
    raised=lambda g, rng: g,
)

NAT_LEQ = Semiring(
    id="nat-leq",
    zero=0,
    one=1,
    add=lambda a, b: a + b,
    mul=lambda a, b: a * b,
    leq=lambda a, b: a <= b,
    parse=_parse_nat,
    show=str,
    sample=_sample_nat,
    raised=lambda g, rng: g + rng.choice((0, 1, 2)),
)


# ---------------------------------------------------------------- {0, 1, w}


def _n01w_add(a: Grade, b: Grade) -> Grade:
    if a == 0:
        return b
    if b == 0:
        return a
    return OMEGA  # 1+1, 1+w, w+1, w+w all saturate


def _n01w_mul(a: Grade, b: Grade) -> Grade:
    if a == 0 or b == 0:
        return 0  # annihilation, including 0*w
    if a == 1:
        return b
    if b == 1:
        return a
    return OMEGA


def _n01w_leq(a: Grade, b: Grade) -> bool:
    return a == b or b == OMEGA


def _parse_n01w(s: str) -> Grade:
    if s == "0":
        return 0
    if s == "1":
        return 1
    if s == OMEGA:
        return OMEGA
    raise GradeError(f"expected 0, 1 or w, got {s!r}")


N01W = Semiring(
    id="n01w",
    zero=0,
    one=1,
    add=_n01w_add,
    mul=_n01w_mul,
    leq=_n01w_leq,
    parse=_parse_n01w,
    show=lambda g: OMEGA if g == OMEGA else str(g),
    sample=lambda rng: rng.choice((0, 1, OMEGA)),
    raised=lambda g, rng: g if g == OMEGA else rng.choice((g, OMEGA)),
)


# ---------------------------------------------------------------- security


def _parse_sec(s: str) -> Grade:
    if s in (LO, HI):
        return s
    raise GradeError(f"expected Lo or Hi, got {s!r}")


SEC = Semiring(
    id="sec",
    zero=HI,
    one=LO,
    add=lambda a, b: HI if (a == HI and b == HI) else LO,
    mul=lambda a, b: LO if (a == LO and b == LO) else HI,
    leq=lambda a, b: a == b or (a == LO and b == HI),
    parse=_parse_sec,
    show=lambda g: g,
    sample=lambda rng: rng.choice((LO, HI)),
    raised=lambda g, rng: rng.choice((LO, HI)) if g == LO else HI,
)


# ---------------------------------------------------------------- rationals


def _parse_rat(s: str) -> Fraction:
    try:
        if "/" in s:
            p, q = s.split("/", 1)
            f = Fraction(int(p), int(q))
        else:
            f = Fraction(int(s), 1)
    except (ValueError, ZeroDivisionError) as e:
        raise GradeError(f"bad rational grade {s!r}: {e}") from None
    if f < 0:
        raise GradeError(f"grades must be nonnegative, got {s!r}")
    return f


RAT = Semiring(
    id="rat",
    zero=Fraction(0),
    one=Fraction(1),
    add=lambda a, b: a + b,
    mul=lambda a, b: a * b,
    leq=lambda a, b: a <= b,
    parse=_parse_rat,
    show=lambda g: str(g),
    sample=lambda rng: Fraction(rng.randrange(0, 13), rng.randrange(1, 7)),
    raised=lambda g, rng: g + Fraction(rng.randrange(0, 7), rng.randrange(1, 5)),
)


SEMIRINGS = {sr.id: sr for sr in (NAT_EXACT, NAT_LEQ, N01W, SEC, RAT)}


def get_semiring(name: str) -> Semiring:
    try:
        return SEMIRINGS[name]
    except KeyError:
        known = ", ".join(sorted(SEMIRINGS))
        raise GradeError(f"unknown semiring {name!r} (known: {known})") from None


# ---------------------------------------------------------------- operations

def grade_add(sr: Semiring, a: Grade, b: Grade) -> Grade:
    return sr.add(a, b)


def grade_mul(sr: Semiring, a: Grade, b: Grade) -> Grade:
    return sr.mul(a, b)


def grade_leq(sr: Semiring, a: Grade, b: Grade) -> bool:
    return sr.leq(a, b)


def zero_vec(sr: Semiring, n: int) -> GradeVec:
    return (sr.zero,) * n


def vec_add(sr: Semiring, u: GradeVec, v: GradeVec) -> GradeVec:
    if len(u) != len(v):
        raise GradeError(f"vector length mismatch: {len(u)} vs {len(v)}")
    return tuple(sr.add(a, b) for a, b in zip(u, v))


def vec_scale(sr: Semiring, r: Grade, v: GradeVec) -> GradeVec:
    return tuple(sr.mul(r, a) for a in v)


def vec_leq(sr: Semiring, u: GradeVec, v: GradeVec) -> bool:
    if len(u) != len(v):
        raise GradeError(f"vector length mismatch: {len(u)} vs {len(v)}")
    return all(sr.leq(a, b) for a, b in zip(u, v))


def boxast(sr: Semiring, delta: GradeVec, delta2: GradeVec, n: int) -> GradeVec:
    """Row product: sum_k delta[k] * delta2, the grade bookkeeping of multicut.

    ``delta`` lists the grades of the n discharged occurrences; the result has
    the length of ``delta2`` (one entry per provider hypothesis).  For n = 0
    this is the zero vector over ``delta2``.
    """
    if len(delta) != n:
        raise GradeError(f"boxast: expected {n} occurrence grades, got {len(delta)}")
    acc = zero_vec(sr, len(delta2))
    for r in delta:
        acc = vec_add(sr, acc, vec_scale(sr, r, delta2))
    return acc

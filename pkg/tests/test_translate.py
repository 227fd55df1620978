"""Translations between the sequent and tree systems."""
from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgl.nd_checker import NDDeriv, check_nd, gen_nd_derivation
from mgl.parser import parse_term
from mgl.sc_checker import SCDeriv, check_sc, gen_sc_derivation
from mgl.semiring import SEMIRINGS
from mgl.syntax import (
    GAtom,
    GrdTy,
    JUnit,
    LAtom,
    LinTy,
    alpha_eq,
    same_sequent,
)
from mgl.translate import TranslationError, nd_to_sc, rename_nd, sc_to_nd
from tests.helpers import promotion_sc_deriv

NAT = SEMIRINGS["nat-exact"]
NATLEQ = SEMIRINGS["nat-leq"]

X = GAtom("X")
Q = GAtom("Q")
A = LAtom("A")


def d(rule, *children, params=()):
    return SCDeriv(rule, params, tuple(children))


def nd(system, rule, *children, params=()):
    return NDDeriv(system, rule, params, tuple(children))


def sshape(deriv):
    return (deriv.rule,) + tuple(sshape(c) for c in deriv.children)


def nshape(deriv):
    return (deriv.system, deriv.rule) + tuple(nshape(c) for c in deriv.children)


def to_nd(sr, deriv):
    """Translate, then assert the conclusion is preserved on the nose."""
    j0 = check_sc(deriv, sr)
    out = sc_to_nd(sr, deriv)
    j1 = check_nd(out, sr)
    assert same_sequent(j0, j1)
    assert alpha_eq(j0.term, j1.term)
    return out, j1


def to_sc(sr, deriv):
    j0 = check_nd(deriv, sr)
    out = nd_to_sc(sr, deriv)
    j1 = check_sc(out, sr)
    assert same_sequent(j0, j1)
    assert alpha_eq(j0.term, j1.term)
    return out, j1


# -- right rules and structural rules map one-to-one ----------------------------


def test_promotion_translates_rule_by_rule():
    out, j = to_nd(NATLEQ, promotion_sc_deriv())
    assert nshape(out) == (
        "MT", "Grd_I",
        ("GT", "sub", ("GT", "cont", ("GT", "><I", ("GT", "Id"), ("GT", "Id")))),
    )
    assert j.gctx[0].grade == 6


def test_promotion_round_trips_to_original_rules():
    deriv = promotion_sc_deriv()
    out, _ = to_nd(NATLEQ, deriv)
    back, _ = to_sc(NATLEQ, out)
    assert sshape(back) == sshape(deriv)
    assert same_sequent(check_sc(back, NATLEQ), check_sc(deriv, NATLEQ))


def test_identity_axioms_translate_to_leaves():
    out, _ = to_nd(NAT, d("id_GS", params=("a", X)))
    assert nshape(out) == ("GT", "Id")
    out, _ = to_nd(NAT, d("id_MS", params=("u", A)))
    assert nshape(out) == ("MT", "Id")


# -- left rules become eliminations ----------------------------------------------


def test_unit_left_becomes_weakened_elimination():
    deriv = d("unitJ_L", d("id_GS", params=("a", X)), params=(0, "u", 0))
    out, j = to_nd(NAT, deriv)
    assert nshape(out) == ("GT", "unitJ_E", ("GT", "Id"), ("GT", "weak", ("GT", "Id")))
    assert out.params == (0,)
    assert j.gctx[0].name == "u" and j.gctx[0].grade == 0


def test_unit_left_at_higher_grade_inserts_a_raise():
    # the hypothesis enters at 0 via weakening and is then raised to 2
    deriv = d("unitJ_L", d("id_GS", params=("a", X)), params=(0, "u", 2))
    out, j = to_nd(NATLEQ, deriv)
    assert nshape(out) == (
        "GT", "unitJ_E", ("GT", "Id"), ("GT", "sub", ("GT", "weak", ("GT", "Id"))),
    )
    assert j.gctx[0].grade == 2
    assert alpha_eq(j.term, parse_term("let unitJ = u in a", NATLEQ))


def test_tensor_left_becomes_elimination_on_an_axiom():
    pair = d("><L", d("><R", d("id_GS", params=("x", X)), d("id_GS", params=("y", X))), params=(0, "z"))
    out, j = to_nd(NAT, pair)
    assert out.system == "GT" and out.rule == "><E"
    assert nshape(out.children[0]) == ("GT", "Id")
    assert [h.name for h in j.gctx] == ["z"]


def test_lolli_left_becomes_application():
    fn = d("id_MS", params=("f", parse_ltype_cached("Q -o Q")))
    arg = d("id_MS", params=("u", parse_ltype_cached("Q")))
    cont = d("id_MS", params=("v", parse_ltype_cached("Q")))
    deriv = d("-oL", arg, cont, params=(0, "f"))
    out, j = to_sc_from_sc(NAT, deriv)
    assert any(n.rule == "-oE" for n in walk_nd(out))
    assert alpha_eq(j.term, parse_term("f u", NAT))


def walk_nd(deriv):
    yield deriv
    for c in deriv.children:
        yield from walk_nd(c)


_LTYPE_CACHE = {}


def parse_ltype_cached(text):
    if text not in _LTYPE_CACHE:
        from mgl.parser import parse_ltype

        _LTYPE_CACHE[text] = parse_ltype(text, NAT)
    return _LTYPE_CACHE[text]


def to_sc_from_sc(sr, deriv):
    """Round helper for left-rule fixtures: translate to the tree system only."""
    return to_nd(sr, deriv)


# -- eliminations become cuts against left rules ---------------------------------


def test_application_becomes_cut_against_lolli_left():
    fn = nd("MT", "Id", params=("f", parse_ltype_cached("Q -o Q")))
    arg = nd("MT", "Id", params=("u", parse_ltype_cached("Q")))
    out, j = to_sc(NAT, nd("MT", "-oE", fn, arg))
    assert sshape(out) == ("cut_MS", ("id_MS",), ("-oL", ("id_MS",), ("id_MS",)))
    assert alpha_eq(j.term, parse_term("f u", NAT))


def test_unit_elimination_becomes_cut_and_unit_left():
    body = nd("GT", "sub", nd("GT", "weak", nd("GT", "Id", params=("a", X)), params=(0, "j", JUnit())), params=((2, 1),))
    deriv = nd("GT", "unitJ_E", nd("GT", "unitJ_I"), body, params=(0,))
    out, j = to_sc(NATLEQ, deriv)
    # the discharged hypothesis is rebuilt by unitJ_L and both cuts stay at grade J
    assert sshape(out) == (
        "cut_GS", ("unitJ_R",),
        ("unitJ_L", ("cut_GS", ("unitJ_R",), ("sub_GS", ("weak_GS", ("id_GS",))))),
    )
    assert j.gctx[0].name == "a"


def test_linear_elimination_becomes_graded_cut():
    deriv = nd("MT", "Lin_E", nd("GT", "Id", params=("k", LinTy(A))))
    out, j = to_sc(NATLEQ, deriv)
    assert sshape(out) == ("gcut_MS", ("id_GS",), ("Lin_L", ("id_MS",)))
    assert alpha_eq(j.term, parse_term("Unlin k", NATLEQ))


def test_grade_elimination_exact_grade_needs_no_raise():
    body = nd("MT", "Lin_E", nd("GT", "Id", params=("k", LinTy(A))))
    scrut = nd("MT", "Id", params=("s", GrdTy(1, LinTy(A))))
    out, _ = to_sc(NAT, nd("MT", "Grd_E", scrut, body, params=(0,)))
    assert sshape(out) == (
        "cut_MS", ("id_MS",), ("Grd_L", ("gcut_MS", ("id_GS",), ("Lin_L", ("id_MS",)))),
    )


def test_grade_elimination_lenient_grade_inserts_a_raise():
    # body discharges h at grade 0 while the scrutinee carries Grd[3]
    body = nd("MT", "weak", nd("MT", "Id", params=("u", A)), params=(0, "h", X))
    scrut = nd("MT", "Id", params=("s", GrdTy(3, X)))
    deriv = nd("MT", "Grd_E", scrut, body, params=(0,))
    out, j = to_sc(NATLEQ, deriv)
    assert sshape(out) == (
        "ex_MS",
        ("cut_MS", ("id_MS",), ("Grd_L", ("sub_MS", ("weak_MS", ("id_MS",))))),
    )
    assert alpha_eq(j.term, parse_term("let Grd[3] h = s in u", NATLEQ))


# -- multicuts --------------------------------------------------------------------


def test_multicut_multiplicity_two_copies_then_merges():
    prov = d("id_GS", params=("a", X))
    host = d("><R", d("id_GS", params=("b", X)), d("id_GS", params=("c", X)))
    out, j = to_nd(NAT, d("mcut", prov, host, params=(0, 2)))
    assert [h.name for h in j.gctx] == ["a"]
    assert j.gctx[0].grade == 2
    assert alpha_eq(j.term, parse_term("(a,a)", NAT))
    assert sum(1 for n in walk_nd(out) if n.rule == "cont") == 1


def test_multicut_multiplicity_zero_weakens_provider_in():
    host = d("unitJ_L", d("id_GS", params=("h", X)), params=(0, "u", 0))
    cut = d("mcut", d("id_GS", params=("p", X)), host, params=(1, 0))
    out, j = to_nd(NAT, cut)
    assert [h.name for h in j.gctx] == ["u", "p", "h"]
    assert j.gctx[1].grade == 0
    assert any(n.rule == "weak" for n in walk_nd(out))


# -- cuts compile to substitution: the worked example ----------------------------


def test_triangle_cut_translates_with_redex_preserved():
    pm = d("Lin_L", d("id_MS", params=("x", A)), params=("z1",))
    prov = d("Lin_R", d("Grd_R", d("Lin_R", pm), params=(1,)))
    host_in = d("Lin_L", d("id_MS", params=("y", A)), params=("w",))
    host = d("Lin_R", d("Lin_L", d("Grd_L", host_in, params=("g",)), params=("v",)))
    cut = d("cut_GS", prov, host, params=(0,))
    out, j = to_nd(NAT, cut)
    # the cut disappears but its redex survives in the term
    assert alpha_eq(
        j.term,
        parse_term("Lin (let Grd[1] w = Unlin (Lin (Grd[1] (Lin (Unlin z1)))) in Unlin w)", NAT),
    )
    assert not any(n.rule.startswith("cut") for n in walk_nd(out))


# -- the unit-grade gap -----------------------------------------------------------

GAP_CASES = [
    ("nat-exact", 2, True),
    ("nat-exact", 0, False),
    ("nat-leq", 3, False),
    ("n01w", 1, True),
    ("n01w", "w", False),
    ("n01w", 0, False),
    ("sec", "Lo", True),
    ("sec", "Hi", False),
    ("rat", Fraction(5), False),
]


@pytest.mark.parametrize("srid,grade,gaps", GAP_CASES)
def test_unit_left_gap_matrix(srid, grade, gaps):
    """unitJ_L at grade r has a tree counterpart iff 0 <= r in the semiring."""
    sr = SEMIRINGS[srid]
    deriv = d("unitJ_L", d("id_GS", params=("a", Q)), params=(0, "u", grade))
    check_sc(deriv, sr)
    if gaps:
        with pytest.raises(TranslationError) as exc:
            sc_to_nd(sr, deriv)
        assert "not reachable from 0" in str(exc.value)
        assert sr.id in str(exc.value)
    else:
        to_nd(sr, deriv)


def test_gap_never_fires_for_ms_variant_when_order_allows():
    deriv = d("unitJ_L-MS", d("id_MS", params=("v", A)), params=(0, "u", 5))
    to_nd(NATLEQ, deriv)
    with pytest.raises(TranslationError):
        sc_to_nd(NAT, deriv)


# -- renaming ---------------------------------------------------------------------


def test_rename_nd_renames_hypotheses_and_term():
    w = nd("GT", "weak", nd("GT", "Id", params=("a", X)), params=(0, "h", JUnit()))
    r = rename_nd(w, {"a": "b", "absent": "x"})
    assert r.params == (0, "h", JUnit())
    assert r.children[0].params == ("b", X)
    j = check_nd(r, NAT)
    assert [h.name for h in j.gctx] == ["h", "b"]
    assert alpha_eq(j.term, parse_term("b", NAT))


def test_rename_nd_leaves_grade_params_alone():
    w = nd("GT", "weak", nd("GT", "Id", params=("a", X)), params=(0, "h", JUnit()))
    s = nd("GT", "sub", w, params=((2, 1),))
    r = rename_nd(s, {"h": "k"})
    assert r.params == ((2, 1),)
    assert r.children[0].params == (0, "k", JUnit())


# -- ill-formed input is rejected before translation ------------------------------


def test_translation_rechecks_input():
    bad = d("unitJ_R", d("id_GS", params=("a", X)))
    with pytest.raises(Exception):
        sc_to_nd(NAT, bad)
    badnd = nd("GT", "unitJ_I", nd("GT", "Id", params=("a", X)))
    with pytest.raises(Exception):
        nd_to_sc(NAT, badnd)


# -- randomized round trips -------------------------------------------------------


@pytest.mark.parametrize("srid", sorted(SEMIRINGS))
@pytest.mark.parametrize("fragment", ["GS", "MS"])
def test_sequent_to_tree_round_trip(srid, fragment):
    sr = SEMIRINGS[srid]
    for seed in range(40):
        deriv = gen_sc_derivation(sr, seed, 6, fragment)
        j0 = check_sc(deriv, sr)
        out = sc_to_nd(sr, deriv)
        j1 = check_nd(out, sr)
        assert same_sequent(j0, j1) and alpha_eq(j0.term, j1.term)
        back = nd_to_sc(sr, out)
        j2 = check_sc(back, sr)
        assert same_sequent(j0, j2) and alpha_eq(j0.term, j2.term)


@pytest.mark.parametrize("srid", sorted(SEMIRINGS))
@pytest.mark.parametrize("fragment", ["GT", "MT"])
def test_tree_to_sequent_round_trip(srid, fragment):
    sr = SEMIRINGS[srid]
    for seed in range(40):
        deriv = gen_nd_derivation(sr, seed, 6, fragment)
        j0 = check_nd(deriv, sr)
        out = nd_to_sc(sr, deriv)
        j1 = check_sc(out, sr)
        assert same_sequent(j0, j1) and alpha_eq(j0.term, j1.term)
        back = sc_to_nd(sr, out)
        j2 = check_nd(back, sr)
        assert same_sequent(j0, j2) and alpha_eq(j0.term, j2.term)


def test_translated_images_check_strictly():
    # the translation only ever emits grade eliminations at the exact grade
    sr = NATLEQ
    for seed in range(60):
        deriv = gen_sc_derivation(sr, seed, 6, ("GS", "MS")[seed % 2])
        out = sc_to_nd(sr, deriv)
        check_nd(out, sr, strict_grd=True)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), frag=st.sampled_from(["GS", "MS"]))
def test_translation_preserves_judgment_property(seed, frag):
    sr = SEMIRINGS["nat-leq"]
    deriv = gen_sc_derivation(sr, seed, 7, frag)
    j0 = check_sc(deriv, sr)
    out = sc_to_nd(sr, deriv)
    j1 = check_nd(out, sr)
    assert same_sequent(j0, j1)
    assert alpha_eq(j0.term, j1.term)

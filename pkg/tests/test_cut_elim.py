"""Cut elimination: measures, per-family reductions, and global properties."""
from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgl.cut_elim import (
    KernelError,
    check_subformula,
    cut_rank,
    deriv_depth,
    eliminate_cuts,
    formula_rank,
    rename_sc,
)
from mgl.parser import parse_term
from mgl.sc_checker import SCDeriv, check_sc, collect_names, gen_sc_derivation, has_cut
from mgl.semiring import SEMIRINGS
from mgl.syntax import (
    GAtom,
    GrdTy,
    GTen,
    IUnit,
    JUnit,
    LAtom,
    LinTy,
    Lolli,
    LTen,
    alpha_eq,
    same_sequent,
)

NAT = SEMIRINGS["nat-exact"]
NATLEQ = SEMIRINGS["nat-leq"]

X = GAtom("X")
Y = GAtom("Y")
Q = GAtom("Q")
A = LAtom("A")
B = LAtom("B")


def d(rule, *children, params=()):
    return SCDeriv(rule, params, tuple(children))


def norm(sr, deriv):
    j0 = check_sc(deriv, sr)
    out, trace = eliminate_cuts(sr, deriv, trace=True)
    j1 = check_sc(out, sr)
    assert not has_cut(out)
    assert same_sequent(j0, j1)
    assert check_subformula(sr, out)
    for step in trace:
        assert step["cut_rank_after"] <= step["cut_rank_before"]
    return out, j1, trace


def shape(deriv):
    return (deriv.rule,) + tuple(shape(c) for c in deriv.children)


def test_formula_rank():
    assert formula_rank(X) == 0
    assert formula_rank(JUnit()) == 0
    assert formula_rank(IUnit()) == 0
    assert formula_rank(GTen(X, Y)) == 1
    assert formula_rank(Lolli(A, LTen(A, B))) == 2
    assert formula_rank(LinTy(A)) == 1
    assert formula_rank(GrdTy(3, GTen(X, X))) == 2


def test_deriv_depth_counts_from_axioms():
    leaf = d("id_GS", params=("x", X))
    assert deriv_depth(leaf) == 0
    assert deriv_depth(d("Grd_R", leaf, params=(2,))) == 1


def test_cut_rank_zero_iff_cut_free():
    leaf = d("id_GS", params=("x", GTen(X, Y)))
    assert cut_rank(NAT, leaf) == 0
    cut = d("cut_GS", leaf, d("id_GS", params=("h", GTen(X, Y))), params=(0,))
    assert cut_rank(NAT, cut) == 1 + formula_rank(GTen(X, Y))


def test_check_subformula_rejects_cuts():
    host = d("unitJ_L", d("id_GS", params=("a", Q)), params=(0, "u", 3))
    cut = d("cut_GS", d("unitJ_R"), host, params=(0,))
    assert check_sc(cut, NAT)
    assert not check_subformula(NAT, cut)
    out, _ = eliminate_cuts(NAT, cut)
    assert check_subformula(NAT, out)


def test_rename_sc_renames_conclusion_and_term():
    deriv = d("Grd_R", d("id_GS", params=("x", X)), params=(2,))
    renamed = rename_sc(deriv, {"x": "y"})
    j = check_sc(renamed, NAT)
    assert j.gctx[0].name == "y"
    assert alpha_eq(j.term, parse_term("Grd[2] y", NAT))


def test_rename_sc_leaves_grade_params_alone():
    sec = SEMIRINGS["sec"]
    deriv = d("unitJ_L", d("id_GS", params=("a", Q)), params=(0, "Lo", "Lo"))
    check_sc(deriv, sec)
    renamed = rename_sc(deriv, {"Lo": "b"})
    assert renamed.params == (0, "b", "Lo")
    j = check_sc(renamed, sec)
    assert j.gctx[0].name == "b" and j.gctx[0].grade == "Lo"


# -- principal reductions, one per connective ---------------------------------


def test_principal_unit_I():
    prov = d("unitI_R")
    host = d("unitI_L", d("id_MS", params=("w", A)), params=(0, "u"))
    cut = d("cut_MS", prov, host, params=(0,))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("id_MS",)
    assert alpha_eq(j.term, parse_term("w", NAT))


def test_principal_unit_J_at_arbitrary_grade():
    host = d("unitJ_L", d("id_GS", params=("a", Q)), params=(0, "u", 3))
    cut = d("cut_GS", d("unitJ_R"), host, params=(0,))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("id_GS",)
    assert alpha_eq(j.term, parse_term("a", NAT))


def test_principal_linear_tensor():
    prov = d("*R", d("id_MS", params=("a", A)), d("id_MS", params=("b", B)))
    inner = d("*R", d("id_MS", params=("x", A)), d("id_MS", params=("y", B)))
    host = d("*L", inner, params=(0, "z"))
    cut = d("cut_MS", prov, host, params=(0,))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("*R", ("id_MS",), ("id_MS",))
    assert alpha_eq(j.term, parse_term("(a,b)", NAT))


def test_principal_implication_beta_reduces():
    prov = d("-oR", d("id_MS", params=("w", A)))
    host = d(
        "-oL",
        d("id_MS", params=("u", A)),
        d("id_MS", params=("y", A)),
        params=(0, "z"),
    )
    cut = d("cut_MS", prov, host, params=(0,))
    j0 = check_sc(cut, NAT)
    assert alpha_eq(j0.term, parse_term(r"(\w : A . w) u", NAT))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("id_MS",)
    assert alpha_eq(j.term, parse_term("u", NAT))


def test_principal_graded_modality():
    prov = d("Grd_R", d("id_GS", params=("x", X)), params=(2,))
    host = d("Grd_L", d("Grd_R", d("id_GS", params=("y", X)), params=(2,)), params=("z",))
    cut = d("cut_MS", prov, host, params=(0,))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("Grd_R", ("id_GS",))
    assert alpha_eq(j.term, parse_term("Grd[2] x", NAT))


def test_principal_linear_embedding():
    prov = d("Lin_R", d("Lin_L", d("id_MS", params=("x", A)), params=("u",)))
    host = d("Lin_L", d("id_MS", params=("y", A)), params=("z",))
    hostw = d("Lin_R", host)
    cut = d("cut_GS", prov, hostw, params=(0,))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("Lin_R", ("Lin_L", ("id_MS",)))
    assert alpha_eq(j.term, parse_term("Lin (Unlin u)", NAT))


def test_principal_graded_tensor_splits_into_component_cuts():
    prov = d("><R", d("id_GS", params=("x", X)), d("id_GS", params=("y", Y)))
    inner = d("><R", d("id_GS", params=("p", X)), d("id_GS", params=("q", Y)))
    host = d("><L", inner, params=(0, "z"))
    cut = d("cut_GS", prov, host, params=(0,))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("><R", ("id_GS",), ("id_GS",))
    assert alpha_eq(j.term, parse_term("(x,y)", NAT))


# -- the worked normalization example ------------------------------------------


def test_triangle_example_normalizes_to_identity_embedding():
    pm = d("Lin_L", d("id_MS", params=("x", A)), params=("z1",))
    prov = d("Lin_R", d("Grd_R", d("Lin_R", pm), params=(1,)))
    host_in = d("Lin_L", d("id_MS", params=("y", A)), params=("w",))
    host = d("Lin_R", d("Lin_L", d("Grd_L", host_in, params=("g",)), params=("v",)))
    cut = d("cut_GS", prov, host, params=(0,))

    j0 = check_sc(cut, NAT)
    assert j0.gctx[0].name == "z1" and j0.gctx[0].ty == LinTy(A)

    out, j, trace = norm(NAT, cut)
    assert shape(out) == ("Lin_R", ("Lin_L", ("id_MS",)))
    assert alpha_eq(j.term, parse_term("Lin (Unlin z1)", NAT))
    assert len(trace) == 1
    assert trace[0]["cut_rank_after"] == 0


# -- axiom and structural interactions -----------------------------------------


def test_axiom_provider_merges_multiplicity():
    prov = d("id_GS", params=("a", X))
    host = d("><R", d("id_GS", params=("b", X)), d("id_GS", params=("c", X)))
    cut = d("mcut", prov, host, params=(0, 2))
    out, j, _ = norm(NAT, cut)
    assert [h.name for h in j.gctx] == ["a"]
    assert j.gctx[0].grade == 2
    assert alpha_eq(j.term, parse_term("(a,a)", NAT))


def test_axiom_provider_reuses_host_block_name():
    prov = d("id_GS", params=("a", X))
    host = d("><R", d("id_GS", params=("a", X)), d("id_GS", params=("c", X)))
    cut = d("mcut", prov, host, params=(0, 2))
    out, j, _ = norm(NAT, cut)
    assert [h.name for h in j.gctx] == ["a"]
    assert alpha_eq(j.term, parse_term("(a,a)", NAT))


def test_zero_multiplicity_cut_weakens_provider_context_in():
    prov = d("Lin_R", d("Lin_L", d("id_MS", params=("x", A)), params=("u",)))
    host = d("id_GS", params=("h", X))
    cut = d("mcut", prov, host, params=(1, 0))
    out, j, _ = norm(NAT, cut)
    assert [h.name for h in j.gctx] == ["h", "u"]
    assert j.gctx[1].grade == 0
    assert alpha_eq(j.term, parse_term("h", NAT))


def test_exchange_straddling_the_cut_block():
    inner = d(
        "><R",
        d("id_GS", params=("r", X)),
        d("><R", d("id_GS", params=("q", Y)), d("id_GS", params=("p", X))),
    )
    host = d("ex_GS", inner, params=(0,))
    cut = d("mcut", d("id_GS", params=("a", X)), host, params=(1, 2))
    out, j, _ = norm(NAT, cut)
    assert [h.name for h in j.gctx] == ["q", "a"]
    assert j.gctx[1].grade == 2
    assert alpha_eq(j.term, parse_term("(a,(q,a))", NAT))


def test_contraction_on_block_grows_the_cut():
    prov = d("Lin_R", d("Lin_L", d("id_MS", params=("x", A)), params=("u",)))
    inner = d(
        "><R",
        d("id_GS", params=("b", LinTy(A))),
        d("id_GS", params=("c", LinTy(A))),
    )
    host = d("cont_GS", inner, params=(0,))
    cut = d("mcut", prov, host, params=(0, 1))
    out, j, _ = norm(NAT, cut)
    assert [h.name for h in j.gctx] == ["u"]
    assert j.gctx[0].grade == 2
    assert alpha_eq(j.term, parse_term("(Lin (Unlin u), Lin (Unlin u))", NAT))


def test_sub_on_block_raises_after_reduction():
    host = d("sub_GS", d("unitJ_L", d("unitJ_R"), params=(0, "u", 2)), params=((3,),))
    cut = d("cut_GS", d("unitJ_R"), host, params=(0,))
    out, j, _ = norm(NATLEQ, cut)
    assert j.gctx == ()
    assert alpha_eq(j.term, parse_term("unitJ", NATLEQ))


def test_provider_commute_produces_commuted_let():
    p_inner = d("><R", d("id_GS", params=("x", X)), d("id_GS", params=("y", Y)))
    prov = d("><L", p_inner, params=(0, "z"))
    h_inner = d("><R", d("id_GS", params=("p", X)), d("id_GS", params=("q", Y)))
    host = d("><L", h_inner, params=(0, "w"))
    cut = d("cut_GS", prov, host, params=(0,))
    out, j, _ = norm(NAT, cut)
    assert shape(out) == ("><L", ("><R", ("id_GS",), ("id_GS",)))
    assert alpha_eq(j.term, parse_term("let (x,y) = z in (x,y)", NAT))


def test_linear_cut_with_multiplicity_merges_graded_copies():
    prov = d("Lin_R", d("Lin_L", d("id_MS", params=("b", A)), params=("u",)))
    base = d("weak_MS", d("id_MS", params=("w", A)), params=(0, "v1", LinTy(A)))
    raised = d("sub_MS", base, params=((2,),))
    host = d("Lin_L", raised, params=("z",))
    cut = d("gmcut", prov, host, params=(0, 2))
    out, j, _ = norm(NATLEQ, cut)
    assert [h.name for h in j.gctx] == ["u"]
    assert j.gctx[0].grade == 3
    assert alpha_eq(j.term, parse_term("Unlin u", NATLEQ))


def test_trace_steps_describe_each_eliminated_cut():
    prov = d("unitI_R")
    host = d("unitI_L", d("id_MS", params=("w", A)), params=(0, "u"))
    cut = d("cut_MS", prov, host, params=(0,))
    out, trace = eliminate_cuts(NAT, cut, trace=True)
    assert len(trace) == 1
    step = trace[0]
    assert step["path"] == []
    assert step["rule"] == "cut_MS"
    assert step["case"] == "principal"
    assert step["formula"] == "I"
    assert step["cut_rank_before"] == 1 and step["cut_rank_after"] == 0
    assert "term_before" in step and "term_after" in step


def test_eliminate_is_identity_on_cut_free_input():
    leaf = d("Grd_R", d("id_GS", params=("x", X)), params=(2,))
    out, trace = eliminate_cuts(NAT, leaf)
    assert out is leaf and trace == []


# -- randomized sweeps ----------------------------------------------------------


@pytest.mark.parametrize("srname", ["nat-exact", "nat-leq", "n01w", "sec", "rat"])
@pytest.mark.parametrize("fragment", ["GS", "MS"])
def test_generated_derivations_normalize(srname, fragment):
    sr = SEMIRINGS[srname]
    for seed in range(40):
        deriv = gen_sc_derivation(sr, seed, 6, fragment)
        norm(sr, deriv)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    srname=st.sampled_from(["nat-exact", "nat-leq", "n01w", "sec", "rat"]),
    fragment=st.sampled_from(["GS", "MS"]),
)
def test_normalization_preserves_sequent_property(seed, srname, fragment):
    sr = SEMIRINGS[srname]
    deriv = gen_sc_derivation(sr, seed, 7, fragment)
    norm(sr, deriv)


def test_depth_eight_inputs_stay_fast():
    sr = SEMIRINGS["nat-leq"]
    import time

    t0 = time.time()
    done = 0
    seed = 0
    while done < 60:
        deriv = gen_sc_derivation(sr, seed, 8, ("GS", "MS")[seed % 2])
        seed += 1
        if not has_cut(deriv):
            continue
        norm(sr, deriv)
        done += 1
    assert time.time() - t0 < 20.0

"""Named equations between sequent derivations, as directed rewrites.

Each rewrite replaces a small pattern of structural rules with another
derivation of the *same* judgment carrying the *same* proof term (up to
renaming of bound variables).  The patterns cover the interaction of
contraction with weakening and exchange, collapsing and commuting grade
raises, and pulling a raise out of a graded cut.  A rewrite applies at a
single position and fails with :class:`EqError` when the subtree there does
not have the expected shape.

``equiv_oracle`` gives a sound but incomplete equivalence check: both
derivations are cut-eliminated and the normal forms compared.  ``equal`` is
trustworthy; ``unknown`` means nothing.
"""
from __future__ import annotations

from .cut_elim import KernelError, eliminate_cuts, rename_sc
from .sc_checker import CheckError, SCDeriv, check_sc, collect_names
from .semiring import Semiring
from .syntax import alpha_eq, fresh_name, grades_of, same_sequent


class EqError(ValueError):
    """The subtree at the requested position does not match the rule."""


def _need(ok: bool, rule: str, why: str):
    if not ok:
        raise EqError(f"{rule}: expected {why}")


# Fragment pairings: each equation exists once per contraction/exchange/sub
# family, keyed off the rule name found at the matched node.
_CONT = {"cont_GS": ("weak_GS", "ex_GS", "sub_GS"), "cont_MS": ("weak_MS", "gex_MS", "sub_MS")}
_SUB_OF = {"cont_GS": "sub_GS", "cont_MS": "sub_MS", "cut_GS": "sub_GS", "gcut_MS": "sub_MS"}


def _contr_unitL(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in _CONT, "contr-unitL", "a contraction at the node")
    (p,) = node.params
    wrule = _CONT[node.rule][0]
    w = node.children[0]
    _need(w.rule == wrule, "contr-unitL", f"{wrule} under the contraction")
    _need(w.params[0] == p, "contr-unitL", "the weakened copy on the left of the merged pair")
    _, wname, _ = w.params
    inner = w.children[0]
    xname = check_sc(inner, sr).gctx[p].name
    # the contraction kept the weakened-in name, so carry it onto the survivor
    used = collect_names(inner)
    if wname in used:
        inner = rename_sc(inner, {wname: fresh_name(wname, used | {xname})})
    return rename_sc(inner, {xname: wname})


def _contr_unitR(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in _CONT, "contr-unitR", "a contraction at the node")
    (p,) = node.params
    wrule = _CONT[node.rule][0]
    w = node.children[0]
    _need(w.rule == wrule, "contr-unitR", f"{wrule} under the contraction")
    _need(w.params[0] == p + 1, "contr-unitR", "the weakened copy on the right of the merged pair")
    return w.children[0]


def _contr_sym(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in _CONT, "contr-sym", "a contraction at the node")
    (p,) = node.params
    exrule = _CONT[node.rule][1]
    ex = node.children[0]
    _need(ex.rule == exrule and ex.params == (p,), "contr-sym", f"{exrule} at the same position")
    inner = ex.children[0]
    g = check_sc(inner, sr).gctx
    n1, n2 = g[p].name, g[p + 1].name
    return SCDeriv(node.rule, (p,), (rename_sc(inner, {n1: n2, n2: n1}),))


def _contr_assoc(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in _CONT, "contr-assoc", "a contraction at the node")
    (p,) = node.params
    inner = node.children[0]
    _need(inner.rule == node.rule and inner.params == (p,), "contr-assoc",
          "a second contraction at the same position")
    base = inner.children[0]
    return SCDeriv(node.rule, (p,), (SCDeriv(node.rule, (p + 1,), (base,)),))


def _ex_ex(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in ("ex_GS", "ex_MS"), "ex-ex", "an exchange at the node")
    inner = node.children[0]
    _need(inner.rule == node.rule and inner.params == node.params, "ex-ex",
          "the same exchange directly underneath")
    return inner.children[0]


def _gex_gex(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule == "gex_MS", "gex-gex", "a graded exchange at the node")
    inner = node.children[0]
    _need(inner.rule == "gex_MS" and inner.params == node.params, "gex-gex",
          "the same exchange directly underneath")
    return inner.children[0]


def _sub_refl(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in ("sub_GS", "sub_MS"), "sub-refl", "a grade raise at the node")
    (g,) = node.params
    premise = grades_of(check_sc(node.children[0], sr).gctx)
    _need(tuple(g) == premise, "sub-refl", "target grades equal to the premise grades")
    return node.children[0]


def _sub_trans(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in ("sub_GS", "sub_MS"), "sub-trans", "a grade raise at the node")
    inner = node.children[0]
    _need(inner.rule == node.rule, "sub-trans", "a second raise directly underneath")
    return SCDeriv(node.rule, node.params, inner.children)


def _contr_mono(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in _CONT, "contr-mono", "a contraction at the node")
    (p,) = node.params
    subrule = _CONT[node.rule][2]
    sub = node.children[0]
    _need(sub.rule == subrule, "contr-mono", f"{subrule} under the contraction")
    (g,) = sub.params
    merged = g[:p] + (sr.add(g[p], g[p + 1]),) + g[p + 2:]
    contracted = SCDeriv(node.rule, (p,), sub.children)
    return SCDeriv(subrule, (merged,), (contracted,))


def _sub_narrow_at(rule: str, g, premise, p: int):
    """The raise may only touch position p; everything else must be unchanged."""
    _need(len(g) == len(premise), rule, "a raise over the full context")
    for i, (a, b) in enumerate(zip(g, premise)):
        if i != p:
            _need(a == b, rule, f"the raise to leave position {i} alone")


def _sub_unitL(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in ("sub_GS", "sub_MS"), "sub-unitL", "a grade raise at the node")
    left = node.children[0]
    lrule = "unitJ_L" if node.rule == "sub_GS" else "unitJ_L-MS"
    _need(left.rule == lrule, "sub-unitL", f"{lrule} under the raise")
    p, x, _r = left.params
    (g,) = node.params
    _sub_narrow_at("sub-unitL", g, grades_of(check_sc(left, sr).gctx), p)
    return SCDeriv(lrule, (p, x, g[p]), left.children)


def _sub_tensorL(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in ("sub_GS", "sub_MS"), "sub-tensorL", "a grade raise at the node")
    left = node.children[0]
    lrule = "><L" if node.rule == "sub_GS" else "><L-MS"
    _need(left.rule == lrule, "sub-tensorL", f"{lrule} under the raise")
    p, z = left.params
    (g,) = node.params
    _sub_narrow_at("sub-tensorL", g, grades_of(check_sc(left, sr).gctx), p)
    base = left.children[0]
    s = g[p]
    gb = grades_of(check_sc(base, sr).gctx)
    raised = gb[:p] + (s, s) + gb[p + 2:]
    return SCDeriv(lrule, (p, z), (SCDeriv(node.rule, (raised,), (base,)),))


def _mult_mono(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in ("cut_GS", "gcut_MS"), "mult-mono", "a graded cut at the node")
    (p,) = node.params
    prov, host = node.children
    _need(prov.rule == "sub_GS", "mult-mono", "a raise on the provider")
    hsub = _SUB_OF[node.rule]
    _need(host.rule == hsub, "mult-mono", "a raise on the host")
    (gh,) = host.params
    _sub_narrow_at("mult-mono", gh, grades_of(check_sc(host.children[0], sr).gctx), p)
    target = grades_of(check_sc(node, sr).gctx)
    inner = SCDeriv(node.rule, (p,), (prov.children[0], host.children[0]))
    return SCDeriv(hsub, (target,), (inner,))


# Rules whose graded context is untouched (ex_MS permutes the linear side
# only) or permuted/extended in a way a raise slides through.
_COMM = {"ex_GS", "ex_MS", "gex_MS", "weak_GS", "weak_MS"}


def _sub_comm_conv(sr: Semiring, node: SCDeriv) -> SCDeriv:
    _need(node.rule in ("sub_GS", "sub_MS"), "sub-comm-conv", "a grade raise at the node")
    below = node.children[0]
    _need(below.rule in _COMM, "sub-comm-conv",
          "an exchange or weakening under the raise")
    (g,) = node.params
    p = below.params[0]
    if below.rule in ("ex_GS", "gex_MS"):
        g2 = g[:p] + (g[p + 1], g[p]) + g[p + 2:]
    elif below.rule == "ex_MS":
        g2 = g
    else:  # weakening: the inserted slot stays at 0 and drops out of the raise
        _need(g[p] == sr.zero, "sub-comm-conv", "the weakened slot to stay at 0")
        g2 = g[:p] + g[p + 1:]
    pushed = SCDeriv(node.rule, (g2,), below.children)
    return SCDeriv(below.rule, below.params, (pushed,))


EQ_RULES = {
    "contr-unitL": _contr_unitL,
    "contr-unitR": _contr_unitR,
    "contr-sym": _contr_sym,
    "contr-assoc": _contr_assoc,
    "ex-ex": _ex_ex,
    "gex-gex": _gex_gex,
    "sub-refl": _sub_refl,
    "sub-trans": _sub_trans,
    "contr-mono": _contr_mono,
    "sub-unitL": _sub_unitL,
    "sub-tensorL": _sub_tensorL,
    "mult-mono": _mult_mono,
    "sub-comm-conv": _sub_comm_conv,
}


def _subtree(d: SCDeriv, path) -> SCDeriv:
    node = d
    for i in path:
        if not (0 <= i < len(node.children)):
            raise EqError(f"no child {i} under rule {node.rule}")
        node = node.children[i]
    return node


def _rebuild(d: SCDeriv, path, new: SCDeriv) -> SCDeriv:
    if not path:
        return new
    i = path[0]
    kids = d.children[:i] + (_rebuild(d.children[i], path[1:], new),) + d.children[i + 1:]
    return SCDeriv(d.rule, d.params, kids)


def apply_eq_rule(sr: Semiring, name: str, d: SCDeriv, path=()) -> SCDeriv:
    """Rewrite the subtree of ``d`` at ``path`` with the named equation.

    The result proves the same judgment with the same term; both facts are
    re-verified and a violation raises :class:`~mgl.cut_elim.KernelError`.
    """
    if name not in EQ_RULES:
        raise EqError(f"unknown equation {name!r}")
    j0 = check_sc(d, sr)
    node = _subtree(d, tuple(path))
    new = EQ_RULES[name](sr, node)
    out = _rebuild(d, tuple(path), new)
    try:
        j1 = check_sc(out, sr)
        jn0, jn1 = check_sc(node, sr), check_sc(new, sr)
    except CheckError as e:
        raise KernelError(f"rewritten derivation is ill-formed: {e}") from e
    if not (same_sequent(jn0, jn1) and alpha_eq(jn0.term, jn1.term)):
        raise KernelError(f"{name} changed the subderivation's judgment")
    if not (same_sequent(j0, j1) and alpha_eq(j0.term, j1.term)):
        raise KernelError(f"{name} changed the derivation's judgment")
    return out


def equiv_oracle(sr: Semiring, d1: SCDeriv, d2: SCDeriv) -> str:
    """``"equal"`` if the cut-free normal forms carry alpha-equal terms.

    Sound, not complete: ``"unknown"`` does not separate the derivations.
    """
    j1 = check_sc(d1, sr)
    j2 = check_sc(d2, sr)
    if not same_sequent(j1, j2):
        raise EqError("the derivations do not prove the same sequent")
    n1, _ = eliminate_cuts(sr, d1)
    n2, _ = eliminate_cuts(sr, d2)
    t1 = check_sc(n1, sr).term
    t2 = check_sc(n2, sr).term
    return "equal" if alpha_eq(t1, t2) else "unknown"

"""Sequent-calculus derivations (GS and MS) and their checker.

A derivation stores only the rule name, its parameters, and subderivations;
the conclusion judgment is *recomputed* bottom-up, so checking never searches
for context splits: two-premise rules concatenate the premises' contexts and
positional parameters say where discharged hypotheses live.

Grade arithmetic follows the active semiring.  ``sub_GS``/``sub_MS`` raise
grades (premise grades must be pointwise <= the target).  Cuts scale the
provider context by the grade of the discharged hypothesis; the multicuts
``mcut``/``gmcut`` discharge n adjacent occurrences at once and n = 0 is
permitted (the provider context enters scaled to nothing but weakened in).
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .semiring import Semiring, boxast, vec_leq
from .syntax import (
    GH,
    LH,
    App,
    GAtom,
    GrdTm,
    GrdTy,
    GSJudgment,
    GTen,
    GType,
    IUnit,
    JUnit,
    LAtom,
    Lam,
    LetGrd,
    LetPair,
    LetUnit,
    LinTm,
    LinTy,
    Lolli,
    LTen,
    LType,
    MSJudgment,
    Pair,
    Unlin,
    UnitI,
    UnitJ,
    Var,
    fresh_name,
    grades_of,
    hyp_names,
    is_gtype,
    is_ltype,
    multi_subst,
    show_gtype,
    show_ltype,
    subst,
)


class CheckError(Exception):
    """A derivation failed to check.

    ``path`` is the route from the root to the offending node: a tuple of
    child indices.  ``rule`` is the rule at that node.
    """

    def __init__(self, path: tuple[int, ...], rule: str, msg: str):
        self.path = path
        self.rule = rule
        self.msg = msg
        where = ".".join(str(i) for i in path) if path else "root"
        super().__init__(f"at {where} ({rule}): {msg}")


@dataclass(frozen=True)
class SCDeriv:
    """One sequent-calculus derivation node.

    ``rule`` names the rule, ``params`` holds its side data (positions,
    hypothesis names, grades, types — see RULE_SIGNATURES), and ``children``
    are the premise derivations in rule order.  For the cut rules the
    children are ordered (provider, host): the host owns the hypothesis
    being discharged.
    """

    rule: str
    params: tuple = ()
    children: tuple["SCDeriv", ...] = ()


@dataclass(frozen=True)
class RuleSig:
    """Arity/parameter shape of a rule, shared with the parser and printer.

    ``params`` is a tuple of parameter kinds drawn from
    {"int", "name", "grade", "gtype", "ltype", "grades"}; "grades" is a
    variable-length run of grade literals and must come last.  ``arity`` is
    the number of premises and ``system`` tells which judgment form the
    conclusion has ("GS" or "MS").
    """

    params: tuple[str, ...]
    arity: int
    system: str


SC_RULES: dict[str, RuleSig] = {
    # GS rules
    "id_GS": RuleSig(("name", "gtype"), 0, "GS"),
    "unitJ_R": RuleSig((), 0, "GS"),
    "unitJ_L": RuleSig(("int", "name", "grade"), 1, "GS"),
    "><R": RuleSig((), 2, "GS"),
    "><L": RuleSig(("int", "name"), 1, "GS"),
    "Lin_R": RuleSig((), 1, "GS"),
    "cut_GS": RuleSig(("int",), 2, "GS"),
    "weak_GS": RuleSig(("int", "name", "gtype"), 1, "GS"),
    "cont_GS": RuleSig(("int",), 1, "GS"),
    "ex_GS": RuleSig(("int",), 1, "GS"),
    "sub_GS": RuleSig(("grades",), 1, "GS"),
    "mcut": RuleSig(("int", "int"), 2, "GS"),
    # MS rules
    "id_MS": RuleSig(("name", "ltype"), 0, "MS"),
    "sub_MS": RuleSig(("grades",), 1, "MS"),
    "unitI_R": RuleSig((), 0, "MS"),
    "unitI_L": RuleSig(("int", "name"), 1, "MS"),
    "*R": RuleSig((), 2, "MS"),
    "*L": RuleSig(("int", "name"), 1, "MS"),
    "-oR": RuleSig((), 1, "MS"),
    "-oL": RuleSig(("int", "name"), 2, "MS"),
    "unitJ_L-MS": RuleSig(("int", "name", "grade"), 1, "MS"),
    "><L-MS": RuleSig(("int", "name"), 1, "MS"),
    "Grd_R": RuleSig(("grade",), 1, "MS"),
    "Lin_L": RuleSig(("name",), 1, "MS"),
    "Grd_L": RuleSig(("name",), 1, "MS"),
    "cut_MS": RuleSig(("int",), 2, "MS"),
    "gcut_MS": RuleSig(("int",), 2, "MS"),
    "weak_MS": RuleSig(("int", "name", "gtype"), 1, "MS"),
    "cont_MS": RuleSig(("int",), 1, "MS"),
    "ex_MS": RuleSig(("int",), 1, "MS"),
    "gex_MS": RuleSig(("int",), 1, "MS"),
    "gmcut": RuleSig(("int", "int"), 2, "MS"),
}

CUT_RULES = frozenset({"cut_GS", "cut_MS", "gcut_MS", "mcut", "gmcut"})


def _all_names(j) -> tuple[str, ...]:
    return tuple(hyp_names(j))


def _require(cond: bool, path, rule, msg: str) -> None:
    if not cond:
        raise CheckError(path, rule, msg)


def _fresh_against(path, rule, name: str, taken) -> None:
    if name in taken:
        raise CheckError(path, rule, f"hypothesis name {name!r} already in scope")


def _disjoint(path, rule, a, b) -> None:
    clash = set(a) & set(b)
    if clash:
        raise CheckError(
            path, rule, f"premise contexts share hypothesis names: {sorted(clash)}"
        )


def _expect_gs(j, path, rule, which: str) -> GSJudgment:
    if not isinstance(j, GSJudgment):
        raise CheckError(path, rule, f"{which} premise must be a GS sequent")
    return j


def _expect_ms(j, path, rule, which: str) -> MSJudgment:
    if not isinstance(j, MSJudgment):
        raise CheckError(path, rule, f"{which} premise must be an MS sequent")
    return j


def _scale_gctx(sr: Semiring, r, gctx) -> tuple[GH, ...]:
    return tuple(GH(h.name, sr.mul(r, h.grade), h.ty) for h in gctx)


def check_sc(d: SCDeriv, sr: Semiring):
    """Check ``d`` and return its conclusion judgment.

    Shared subtrees are checked once (derivations may be DAGs after
    rewriting).  Raises CheckError with the path to the first bad node.
    """
    memo: dict[int, object] = {}
    work: list[tuple[SCDeriv, tuple[int, ...], bool]] = [(d, (), False)]
    while work:
        node, path, ready = work.pop()
        if id(node) in memo:
            continue
        if not isinstance(node, SCDeriv):
            raise CheckError(path, "?", f"not a sequent-calculus derivation: {node!r}")
        if ready:
            memo[id(node)] = _conclude(node, path, [memo[id(c)] for c in node.children], sr)
        else:
            sig = SC_RULES.get(node.rule)
            if sig is None:
                raise CheckError(path, node.rule, "unknown rule")
            if len(node.children) != sig.arity:
                raise CheckError(
                    path,
                    node.rule,
                    f"expected {sig.arity} premise(s), got {len(node.children)}",
                )
            work.append((node, path, True))
            for i in range(len(node.children) - 1, -1, -1):
                work.append((node.children[i], path + (i,), False))
    return memo[id(d)]


def _conclude(node: SCDeriv, path, js: list, sr: Semiring):
    rule = node.rule
    p = node.params

    if rule == "id_GS":
        name, ty = p
        _require(is_gtype(ty), path, rule, "identity needs a graded type")
        return GSJudgment((GH(name, sr.one, ty),), Var(name), ty)

    if rule == "unitJ_R":
        return GSJudgment((), UnitJ(), JUnit())

    if rule == "unitJ_L":
        pos, name, r = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos <= len(j.gctx), path, rule, f"position {pos} out of range")
        _fresh_against(path, rule, name, _all_names(j))
        gctx = j.gctx[:pos] + (GH(name, r, JUnit()),) + j.gctx[pos:]
        return GSJudgment(gctx, LetUnit("J", Var(name), j.term), j.ty)

    if rule == "><R":
        j1 = _expect_gs(js[0], path, rule, "first")
        j2 = _expect_gs(js[1], path, rule, "second")
        _disjoint(path, rule, _all_names(j1), _all_names(j2))
        return GSJudgment(
            j1.gctx + j2.gctx, Pair(j1.term, j2.term), GTen(j1.ty, j2.ty)
        )

    if rule == "><L":
        pos, z = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = j.gctx[pos], j.gctx[pos + 1]
        _require(
            h1.grade == h2.grade,
            path,
            rule,
            f"pair components must share a grade: {sr.show(h1.grade)} vs {sr.show(h2.grade)}",
        )
        others = set(_all_names(j)) - {h1.name, h2.name}
        _fresh_against(path, rule, z, others)
        entry = GH(z, h1.grade, GTen(h1.ty, h2.ty))
        gctx = j.gctx[:pos] + (entry,) + j.gctx[pos + 2 :]
        return GSJudgment(gctx, LetPair(h1.name, h2.name, Var(z), j.term), j.ty)

    if rule == "Lin_R":
        j = _expect_ms(js[0], path, rule, "only")
        _require(len(j.lctx) == 0, path, rule, "premise must have an empty linear context")
        return GSJudgment(j.gctx, LinTm(j.term), LinTy(j.ty))

    if rule == "cut_GS":
        (pos,) = p
        prov = _expect_gs(js[0], path, rule, "provider")
        host = _expect_gs(js[1], path, rule, "host")
        _require(0 <= pos < len(host.gctx), path, rule, f"position {pos} out of range")
        h = host.gctx[pos]
        _require(
            h.ty == prov.ty,
            path,
            rule,
            f"cut hypothesis has type {show_gtype(sr, h.ty)} but provider proves {show_gtype(sr, prov.ty)}",
        )
        rest = set(_all_names(host)) - {h.name}
        _disjoint(path, rule, _all_names(prov), rest)
        mid = _scale_gctx(sr, h.grade, prov.gctx)
        gctx = host.gctx[:pos] + mid + host.gctx[pos + 1 :]
        return GSJudgment(gctx, subst(host.term, h.name, prov.term), host.ty)

    if rule == "weak_GS":
        pos, name, ty = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos <= len(j.gctx), path, rule, f"position {pos} out of range")
        _require(is_gtype(ty), path, rule, "weakening needs a graded type")
        _fresh_against(path, rule, name, _all_names(j))
        gctx = j.gctx[:pos] + (GH(name, sr.zero, ty),) + j.gctx[pos:]
        return GSJudgment(gctx, j.term, j.ty)

    if rule == "cont_GS":
        (pos,) = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = j.gctx[pos], j.gctx[pos + 1]
        _require(
            h1.ty == h2.ty,
            path,
            rule,
            f"contracted hypotheses must share a type: {show_gtype(sr, h1.ty)} vs {show_gtype(sr, h2.ty)}",
        )
        entry = GH(h1.name, sr.add(h1.grade, h2.grade), h1.ty)
        gctx = j.gctx[:pos] + (entry,) + j.gctx[pos + 2 :]
        return GSJudgment(gctx, subst(j.term, h2.name, Var(h1.name)), j.ty)

    if rule == "ex_GS":
        (pos,) = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        gctx = (
            j.gctx[:pos] + (j.gctx[pos + 1], j.gctx[pos]) + j.gctx[pos + 2 :]
        )
        return GSJudgment(gctx, j.term, j.ty)

    if rule == "sub_GS":
        (grades,) = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(
            len(grades) == len(j.gctx),
            path,
            rule,
            f"expected {len(j.gctx)} grades, got {len(grades)}",
        )
        old = grades_of(j.gctx)
        _require(
            vec_leq(sr, old, tuple(grades)),
            path,
            rule,
            "grades may only be raised: "
            + " ".join(sr.show(g) for g in old)
            + " </= "
            + " ".join(sr.show(g) for g in grades),
        )
        gctx = tuple(GH(h.name, g, h.ty) for h, g in zip(j.gctx, grades))
        return GSJudgment(gctx, j.term, j.ty)

    if rule == "mcut":
        pos, n = p
        prov = _expect_gs(js[0], path, rule, "provider")
        host = _expect_gs(js[1], path, rule, "host")
        _require(n >= 0, path, rule, f"occurrence count {n} must be nonnegative")
        _require(0 <= pos and pos + n <= len(host.gctx), path, rule, f"block {pos}..{pos+n} out of range")
        block = host.gctx[pos : pos + n]
        for h in block:
            _require(
                h.ty == prov.ty,
                path,
                rule,
                f"cut hypothesis {h.name} has type {show_gtype(sr, h.ty)} but provider proves {show_gtype(sr, prov.ty)}",
            )
        rest = set(_all_names(host)) - {h.name for h in block}
        _disjoint(path, rule, _all_names(prov), rest)
        delta = grades_of(block)
        mid_grades = boxast(sr, delta, grades_of(prov.gctx), n)
        mid = tuple(GH(h.name, g, h.ty) for h, g in zip(prov.gctx, mid_grades))
        gctx = host.gctx[:pos] + mid + host.gctx[pos + n :]
        term = multi_subst(host.term, [h.name for h in block], prov.term)
        return GSJudgment(gctx, term, host.ty)

    if rule == "id_MS":
        name, ty = p
        _require(is_ltype(ty), path, rule, "identity needs a linear type")
        return MSJudgment((), (LH(name, ty),), Var(name), ty)

    if rule == "sub_MS":
        (grades,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(
            len(grades) == len(j.gctx),
            path,
            rule,
            f"expected {len(j.gctx)} grades, got {len(grades)}",
        )
        old = grades_of(j.gctx)
        _require(
            vec_leq(sr, old, tuple(grades)),
            path,
            rule,
            "grades may only be raised: "
            + " ".join(sr.show(g) for g in old)
            + " </= "
            + " ".join(sr.show(g) for g in grades),
        )
        gctx = tuple(GH(h.name, g, h.ty) for h, g in zip(j.gctx, grades))
        return MSJudgment(gctx, j.lctx, j.term, j.ty)

    if rule == "unitI_R":
        return MSJudgment((), (), UnitI(), IUnit())

    if rule == "unitI_L":
        pos, name = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos <= len(j.lctx), path, rule, f"position {pos} out of range")
        _fresh_against(path, rule, name, _all_names(j))
        lctx = j.lctx[:pos] + (LH(name, IUnit()),) + j.lctx[pos:]
        return MSJudgment(j.gctx, lctx, LetUnit("I", Var(name), j.term), j.ty)

    if rule == "*R":
        j1 = _expect_ms(js[0], path, rule, "first")
        j2 = _expect_ms(js[1], path, rule, "second")
        _disjoint(path, rule, _all_names(j1), _all_names(j2))
        return MSJudgment(
            j1.gctx + j2.gctx,
            j1.lctx + j2.lctx,
            Pair(j1.term, j2.term),
            LTen(j1.ty, j2.ty),
        )

    if rule == "*L":
        pos, z = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.lctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = j.lctx[pos], j.lctx[pos + 1]
        others = set(_all_names(j)) - {h1.name, h2.name}
        _fresh_against(path, rule, z, others)
        entry = LH(z, LTen(h1.ty, h2.ty))
        lctx = j.lctx[:pos] + (entry,) + j.lctx[pos + 2 :]
        return MSJudgment(j.gctx, lctx, LetPair(h1.name, h2.name, Var(z), j.term), j.ty)

    if rule == "-oR":
        j = _expect_ms(js[0], path, rule, "only")
        _require(len(j.lctx) > 0, path, rule, "no linear hypothesis to abstract")
        h = j.lctx[-1]
        return MSJudgment(
            j.gctx, j.lctx[:-1], Lam(h.name, h.ty, j.term), Lolli(h.ty, j.ty)
        )

    if rule == "-oL":
        pos, z = p
        arg = _expect_ms(js[0], path, rule, "argument")
        cont = _expect_ms(js[1], path, rule, "continuation")
        _require(0 <= pos < len(cont.lctx), path, rule, f"position {pos} out of range")
        h = cont.lctx[pos]
        rest = set(_all_names(cont)) - {h.name}
        _disjoint(path, rule, _all_names(arg), rest)
        _fresh_against(path, rule, z, set(_all_names(arg)) | rest)
        lctx = (
            cont.lctx[:pos]
            + (LH(z, Lolli(arg.ty, h.ty)),)
            + arg.lctx
            + cont.lctx[pos + 1 :]
        )
        term = subst(cont.term, h.name, App(Var(z), arg.term))
        return MSJudgment(arg.gctx + cont.gctx, lctx, term, cont.ty)

    if rule == "unitJ_L-MS":
        pos, name, r = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos <= len(j.gctx), path, rule, f"position {pos} out of range")
        _fresh_against(path, rule, name, _all_names(j))
        gctx = j.gctx[:pos] + (GH(name, r, JUnit()),) + j.gctx[pos:]
        return MSJudgment(gctx, j.lctx, LetUnit("J", Var(name), j.term), j.ty)

    if rule == "><L-MS":
        pos, z = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = j.gctx[pos], j.gctx[pos + 1]
        _require(
            h1.grade == h2.grade,
            path,
            rule,
            f"pair components must share a grade: {sr.show(h1.grade)} vs {sr.show(h2.grade)}",
        )
        others = set(_all_names(j)) - {h1.name, h2.name}
        _fresh_against(path, rule, z, others)
        entry = GH(z, h1.grade, GTen(h1.ty, h2.ty))
        gctx = j.gctx[:pos] + (entry,) + j.gctx[pos + 2 :]
        return MSJudgment(gctx, j.lctx, LetPair(h1.name, h2.name, Var(z), j.term), j.ty)

    if rule == "Grd_R":
        (r,) = p
        j = _expect_gs(js[0], path, rule, "only")
        return MSJudgment(
            _scale_gctx(sr, r, j.gctx), (), GrdTm(r, j.term), GrdTy(r, j.ty)
        )

    if rule == "Lin_L":
        (z,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(len(j.lctx) > 0, path, rule, "no linear hypothesis in front position")
        h = j.lctx[0]
        others = set(_all_names(j)) - {h.name}
        _fresh_against(path, rule, z, others)
        gctx = j.gctx + (GH(z, sr.one, LinTy(h.ty)),)
        term = subst(j.term, h.name, Unlin(Var(z)))
        return MSJudgment(gctx, j.lctx[1:], term, j.ty)

    if rule == "Grd_L":
        (z,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(len(j.gctx) > 0, path, rule, "no graded hypothesis in last position")
        h = j.gctx[-1]
        others = set(_all_names(j)) - {h.name}
        _fresh_against(path, rule, z, others)
        lctx = (LH(z, GrdTy(h.grade, h.ty)),) + j.lctx
        term = LetGrd(h.grade, h.name, Var(z), j.term)
        return MSJudgment(j.gctx[:-1], lctx, term, j.ty)

    if rule == "cut_MS":
        (pos,) = p
        prov = _expect_ms(js[0], path, rule, "provider")
        host = _expect_ms(js[1], path, rule, "host")
        _require(0 <= pos < len(host.lctx), path, rule, f"position {pos} out of range")
        h = host.lctx[pos]
        _require(
            h.ty == prov.ty,
            path,
            rule,
            f"cut hypothesis has type {show_ltype(sr, h.ty)} but provider proves {show_ltype(sr, prov.ty)}",
        )
        rest = set(_all_names(host)) - {h.name}
        _disjoint(path, rule, _all_names(prov), rest)
        lctx = host.lctx[:pos] + prov.lctx + host.lctx[pos + 1 :]
        return MSJudgment(
            host.gctx + prov.gctx,
            lctx,
            subst(host.term, h.name, prov.term),
            host.ty,
        )

    if rule == "gcut_MS":
        (pos,) = p
        prov = _expect_gs(js[0], path, rule, "provider")
        host = _expect_ms(js[1], path, rule, "host")
        _require(0 <= pos < len(host.gctx), path, rule, f"position {pos} out of range")
        h = host.gctx[pos]
        _require(
            h.ty == prov.ty,
            path,
            rule,
            f"cut hypothesis has type {show_gtype(sr, h.ty)} but provider proves {show_gtype(sr, prov.ty)}",
        )
        rest = set(_all_names(host)) - {h.name}
        _disjoint(path, rule, _all_names(prov), rest)
        mid = _scale_gctx(sr, h.grade, prov.gctx)
        gctx = host.gctx[:pos] + mid + host.gctx[pos + 1 :]
        return MSJudgment(gctx, host.lctx, subst(host.term, h.name, prov.term), host.ty)

    if rule == "weak_MS":
        pos, name, ty = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos <= len(j.gctx), path, rule, f"position {pos} out of range")
        _require(is_gtype(ty), path, rule, "weakening needs a graded type")
        _fresh_against(path, rule, name, _all_names(j))
        gctx = j.gctx[:pos] + (GH(name, sr.zero, ty),) + j.gctx[pos:]
        return MSJudgment(gctx, j.lctx, j.term, j.ty)

    if rule == "cont_MS":
        (pos,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = j.gctx[pos], j.gctx[pos + 1]
        _require(
            h1.ty == h2.ty,
            path,
            rule,
            f"contracted hypotheses must share a type: {show_gtype(sr, h1.ty)} vs {show_gtype(sr, h2.ty)}",
        )
        entry = GH(h1.name, sr.add(h1.grade, h2.grade), h1.ty)
        gctx = j.gctx[:pos] + (entry,) + j.gctx[pos + 2 :]
        return MSJudgment(gctx, j.lctx, subst(j.term, h2.name, Var(h1.name)), j.ty)

    if rule == "ex_MS":
        (pos,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.lctx), path, rule, f"positions {pos},{pos+1} out of range")
        lctx = j.lctx[:pos] + (j.lctx[pos + 1], j.lctx[pos]) + j.lctx[pos + 2 :]
        return MSJudgment(j.gctx, lctx, j.term, j.ty)

    if rule == "gex_MS":
        (pos,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        gctx = j.gctx[:pos] + (j.gctx[pos + 1], j.gctx[pos]) + j.gctx[pos + 2 :]
        return MSJudgment(gctx, j.lctx, j.term, j.ty)

    if rule == "gmcut":
        pos, n = p
        prov = _expect_gs(js[0], path, rule, "provider")
        host = _expect_ms(js[1], path, rule, "host")
        _require(n >= 0, path, rule, f"occurrence count {n} must be nonnegative")
        _require(0 <= pos and pos + n <= len(host.gctx), path, rule, f"block {pos}..{pos+n} out of range")
        block = host.gctx[pos : pos + n]
        for h in block:
            _require(
                h.ty == prov.ty,
                path,
                rule,
                f"cut hypothesis {h.name} has type {show_gtype(sr, h.ty)} but provider proves {show_gtype(sr, prov.ty)}",
            )
        rest = set(_all_names(host)) - {h.name for h in block}
        _disjoint(path, rule, _all_names(prov), rest)
        delta = grades_of(block)
        mid_grades = boxast(sr, delta, grades_of(prov.gctx), n)
        mid = tuple(GH(h.name, g, h.ty) for h, g in zip(prov.gctx, mid_grades))
        gctx = host.gctx[:pos] + mid + host.gctx[pos + n :]
        term = multi_subst(host.term, [h.name for h in block], prov.term)
        return MSJudgment(gctx, host.lctx, term, host.ty)

    raise CheckError(path, rule, "unknown rule")


def collect_names(d: SCDeriv) -> set[str]:
    """Every hypothesis/binder name mentioned anywhere in the derivation."""
    names: set[str] = set()
    seen: set[int] = set()
    stack = [d]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        for q in node.params:
            if isinstance(q, str):
                names.add(q)
        stack.extend(node.children)
    return names


def has_cut(d: SCDeriv) -> bool:
    seen: set[int] = set()
    stack = [d]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.rule in CUT_RULES:
            return True
        stack.extend(node.children)
    return False


# ---------------------------------------------------------------------------
# Derived-rule builders
# ---------------------------------------------------------------------------


def derive_box_intro(sr: Semiring, r, d: SCDeriv) -> SCDeriv:
    """Box a derivation: from delta ; |- t : A build r*delta ; |- Grd[r] (Lin t) : Grd_r (Lin A).

    ``d`` must be an MS derivation with an empty linear context; it is
    promoted to Lin and the result graded by r.
    """
    return SCDeriv("Grd_R", (r,), (SCDeriv("Lin_R", (), (d,)),))


def derive_box_elim(sr: Semiring, d_box: SCDeriv, d_host: SCDeriv, pos: int) -> SCDeriv:
    """Use a derivation of Grd_r X to discharge a graded hypothesis.

    ``d_host`` must be an MS derivation whose graded context has, at ``pos``,
    a hypothesis x @ r : X; ``d_box`` proves Grd_r X in MS.  Rebinds the
    boxed value through Grd_L and cuts it in place.
    """
    host_j = check_sc(d_host, sr)
    box_j = check_sc(d_box, sr)
    avoid = set(_all_names(host_j)) | set(_all_names(box_j)) | collect_names(d_host)
    z = fresh_name("z", avoid)
    moved = d_host
    for i in range(pos, len(host_j.gctx) - 1):
        moved = SCDeriv("gex_MS", (i,), (moved,))
    opened = SCDeriv("Grd_L", (z,), (moved,))
    # Grd_L put z in linear front position, so the cut lands at 0.
    return SCDeriv("cut_MS", (0,), (d_box, opened))


def derive_gimpl_right(sr: Semiring, d: SCDeriv) -> SCDeriv:
    """Internalise the last graded hypothesis as a graded-function conclusion.

    From delta, x @ r : X ; Gamma |- t : A build
    delta ; Gamma |- \\z . let Grd[r] x = z in t : Grd_r X -o A.
    """
    j = check_sc(d, sr)
    avoid = set(_all_names(j)) | collect_names(d)
    z = fresh_name("z", avoid)
    opened = SCDeriv("Grd_L", (z,), (d,))
    # Grd_L leaves z as the *first* linear hypothesis; the function rule
    # abstracts the *last*, so walk it to the end.
    moved = opened
    for i in range(len(j.lctx)):
        moved = SCDeriv("ex_MS", (i,), (moved,))
    return SCDeriv("-oR", (), (moved,))


def derive_gimpl_left(
    sr: Semiring, r, d_arg: SCDeriv, d_host: SCDeriv, pos: int, z: str
) -> SCDeriv:
    """Apply a graded-function hypothesis to a graded argument.

    ``d_arg`` is a GS derivation of X; ``d_host`` an MS derivation with a
    linear hypothesis y : B at ``pos``.  Produces a derivation whose linear
    context has z : Grd_r X -o B in place of y.
    """
    boxed = SCDeriv("Grd_R", (r,), (d_arg,))
    return SCDeriv("-oL", (pos, z), (boxed, d_host))


def derive_grd_tensor_dist(sr: Semiring, r, x_ty: GType, y_ty: GType) -> SCDeriv:
    """The distribution of a grade over a graded pair, as a closed function.

    Concludes ; |- \\z . let Grd[r] w = z in let (x, y) = w in
    (Grd[r] x, Grd[r] y) : Grd_r (X >< Y) -o Grd_r X * Grd_r Y.
    """
    gx = SCDeriv("Grd_R", (r,), (SCDeriv("id_GS", ("x", x_ty)), ))
    gy = SCDeriv("Grd_R", (r,), (SCDeriv("id_GS", ("y", y_ty)), ))
    pair = SCDeriv("*R", (), (gx, gy))
    split = SCDeriv("><L-MS", (0, "w"), (pair,))
    opened = SCDeriv("Grd_L", ("z",), (split,))
    return SCDeriv("-oR", (), (opened,))


# ---------------------------------------------------------------------------
# Random derivation generator
# ---------------------------------------------------------------------------


def gen_sc_derivation(
    sr: Semiring, seed: int, max_depth: int, fragment: str = "GS"
) -> SCDeriv:
    """Generate a random well-formed derivation (checks under ``sr``).

    ``fragment`` selects the root judgment form ("GS" or "MS").  The
    generator is cut-heavy by design: at depth 6 well over a third of
    generated trees contain at least one cut.  Deterministic in ``seed``.
    """
    rng = random.Random(seed)
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"v{counter[0]}"

    def safe_grade():
        # A grade r with 0 <= r, so the hypothesis could also have been
        # weakened in; keeps generated derivations inside the fragment
        # every transformation in the package supports.
        for _ in range(4):
            r = sr.sample(rng)
            if sr.leq(sr.zero, r):
                return r
        return sr.zero

    def rand_gtype(depth: int) -> GType:
        if depth <= 0:
            return rng.choice([GAtom("P"), GAtom("Q"), JUnit()])
        k = rng.randrange(6)
        if k == 0:
            return GTen(rand_gtype(depth - 1), rand_gtype(depth - 1))
        if k == 1:
            return LinTy(rand_ltype(depth - 1))
        return rng.choice([GAtom("P"), GAtom("Q"), JUnit()])

    def rand_ltype(depth: int) -> LType:
        if depth <= 0:
            return rng.choice([LAtom("E"), LAtom("F"), IUnit()])
        k = rng.randrange(8)
        if k == 0:
            return LTen(rand_ltype(depth - 1), rand_ltype(depth - 1))
        if k == 1:
            return Lolli(rand_ltype(depth - 1), rand_ltype(depth - 1))
        if k == 2:
            return GrdTy(safe_grade(), rand_gtype(depth - 1))
        return rng.choice([LAtom("E"), LAtom("F"), IUnit()])

    def gs_axiom() -> SCDeriv:
        if rng.random() < 0.25:
            return SCDeriv("unitJ_R")
        return SCDeriv("id_GS", (fresh(), rand_gtype(1)))

    def ms_axiom() -> SCDeriv:
        if rng.random() < 0.25:
            return SCDeriv("unitI_R")
        return SCDeriv("id_MS", (fresh(), rand_ltype(1)))

    def gs_of_type(ty: GType, budget: int) -> SCDeriv:
        if budget <= 0 or rng.random() < 0.4:
            return SCDeriv("id_GS", (fresh(), ty))
        if isinstance(ty, JUnit):
            return SCDeriv("unitJ_R")
        if isinstance(ty, GTen):
            return SCDeriv(
                "><R",
                (),
                (gs_of_type(ty.left, budget - 1), gs_of_type(ty.right, budget - 1)),
            )
        if isinstance(ty, LinTy):
            return SCDeriv("Lin_R", (), (ms_empty_of_type(ty.inner, budget - 1),))
        return SCDeriv("id_GS", (fresh(), ty))

    def ms_empty_of_type(ty: LType, budget: int) -> SCDeriv:
        # An MS derivation of ty with empty linear context: rebind an
        # identity hypothesis through Lin_L (always available), or build
        # the type's introduction when the budget allows.
        if budget > 0 and isinstance(ty, IUnit) and rng.random() < 0.5:
            return SCDeriv("unitI_R")
        if budget > 0 and isinstance(ty, GrdTy) and rng.random() < 0.5:
            return SCDeriv("Grd_R", (ty.grade,), (gs_of_type(ty.inner, budget - 1),))
        return SCDeriv("Lin_L", (fresh(),), (SCDeriv("id_MS", (fresh(), ty)),))

    def gen_gs(budget: int) -> SCDeriv:
        if budget <= 0:
            return gs_axiom()
        choices = [
            ("axiom", 1.0),
            ("unitJ_L", 1.0),
            ("><R", 2.0),
            ("><L", 1.0),
            ("Lin_R", 1.0),
            ("cut_GS", 3.0),
            ("weak_GS", 1.0),
            ("cont_GS", 0.7),
            ("ex_GS", 0.7),
            ("sub_GS", 0.7),
            ("mcut", 0.6),
        ]
        rule = _pick(rng, choices)
        if rule == "axiom":
            return gs_axiom()
        if rule == "unitJ_L":
            child = gen_gs(budget - 1)
            j = check_sc(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            return SCDeriv("unitJ_L", (pos, fresh(), safe_grade()), (child,))
        if rule == "><R":
            return SCDeriv("><R", (), (gen_gs(budget - 1), gen_gs(budget - 1)))
        if rule == "><L":
            child = gen_gs(budget - 2)
            j = check_sc(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            t1, t2 = rand_gtype(1), rand_gtype(1)
            w1 = SCDeriv("weak_GS", (pos, fresh(), t1), (child,))
            w2 = SCDeriv("weak_GS", (pos + 1, fresh(), t2), (w1,))
            return SCDeriv("><L", (pos, fresh()), (w2,))
        if rule == "Lin_R":
            return SCDeriv("Lin_R", (), (gen_ms_empty(budget - 1),))
        if rule == "cut_GS":
            host = gen_gs(budget - 1)
            j = check_sc(host, sr)
            if not j.gctx:
                return host
            pos = rng.randrange(len(j.gctx))
            prov = gs_of_type(j.gctx[pos].ty, min(budget - 1, 2))
            return SCDeriv("cut_GS", (pos,), (prov, host))
        if rule == "weak_GS":
            child = gen_gs(budget - 1)
            j = check_sc(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            return SCDeriv("weak_GS", (pos, fresh(), rand_gtype(1)), (child,))
        if rule == "cont_GS":
            child = gen_gs(budget - 1)
            j = check_sc(child, sr)
            if not j.gctx:
                return child
            pos = rng.randrange(len(j.gctx))
            dup = SCDeriv("weak_GS", (pos + 1, fresh(), j.gctx[pos].ty), (child,))
            return SCDeriv("cont_GS", (pos,), (dup,))
        if rule == "ex_GS":
            child = gen_gs(budget - 1)
            j = check_sc(child, sr)
            if len(j.gctx) < 2:
                return child
            pos = rng.randrange(len(j.gctx) - 1)
            return SCDeriv("ex_GS", (pos,), (child,))
        if rule == "sub_GS":
            child = gen_gs(budget - 1)
            j = check_sc(child, sr)
            grades = tuple(sr.raised(h.grade, rng) for h in j.gctx)
            return SCDeriv("sub_GS", (grades,), (child,))
        if rule == "mcut":
            host = gen_gs(budget - 2)
            j = check_sc(host, sr)
            n = rng.randrange(3)
            ty = rand_gtype(1)
            pos = rng.randrange(len(j.gctx) + 1)
            for k in range(n):
                host = SCDeriv("weak_GS", (pos + k, fresh(), ty), (host,))
            prov = gs_of_type(ty, 1)
            return SCDeriv("mcut", (pos, n), (prov, host))
        raise AssertionError(rule)

    def gen_ms_empty(budget: int) -> SCDeriv:
        d = gen_ms(budget)
        j = check_sc(d, sr)
        for _ in range(len(j.lctx)):
            d = SCDeriv("Lin_L", (fresh(),), (d,))
        return d

    def gen_ms(budget: int) -> SCDeriv:
        if budget <= 0:
            return ms_axiom()
        choices = [
            ("axiom", 1.0),
            ("unitI_L", 0.8),
            ("*R", 2.0),
            ("*L", 1.0),
            ("-oR", 1.2),
            ("-oL", 1.0),
            ("unitJ_L-MS", 0.8),
            ("><L-MS", 0.8),
            ("Grd_R", 1.2),
            ("Lin_L", 1.0),
            ("Grd_L", 1.0),
            ("cut_MS", 1.6),
            ("gcut_MS", 1.6),
            ("weak_MS", 0.8),
            ("cont_MS", 0.6),
            ("ex_MS", 0.6),
            ("gex_MS", 0.6),
            ("sub_MS", 0.6),
            ("gmcut", 0.6),
        ]
        rule = _pick(rng, choices)
        if rule == "axiom":
            return ms_axiom()
        if rule == "unitI_L":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            pos = rng.randrange(len(j.lctx) + 1)
            return SCDeriv("unitI_L", (pos, fresh()), (child,))
        if rule == "*R":
            return SCDeriv("*R", (), (gen_ms(budget - 1), gen_ms(budget - 1)))
        if rule == "*L":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            if len(j.lctx) < 2:
                return child
            pos = rng.randrange(len(j.lctx) - 1)
            return SCDeriv("*L", (pos, fresh()), (child,))
        if rule == "-oR":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            if not j.lctx:
                child = SCDeriv("unitI_L", (0, fresh()), (child,))
            return SCDeriv("-oR", (), (child,))
        if rule == "-oL":
            cont = gen_ms(budget - 1)
            j = check_sc(cont, sr)
            if not j.lctx:
                return cont
            pos = rng.randrange(len(j.lctx))
            arg = gen_ms(min(budget - 1, 2))
            return SCDeriv("-oL", (pos, fresh()), (arg, cont))
        if rule == "unitJ_L-MS":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            return SCDeriv("unitJ_L-MS", (pos, fresh(), safe_grade()), (child,))
        if rule == "><L-MS":
            child = gen_ms(budget - 2)
            j = check_sc(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            t1, t2 = rand_gtype(1), rand_gtype(1)
            w1 = SCDeriv("weak_MS", (pos, fresh(), t1), (child,))
            w2 = SCDeriv("weak_MS", (pos + 1, fresh(), t2), (w1,))
            return SCDeriv("><L-MS", (pos, fresh()), (w2,))
        if rule == "Grd_R":
            return SCDeriv("Grd_R", (safe_grade(),), (gen_gs(budget - 1),))
        if rule == "Lin_L":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            if not j.lctx:
                return child
            return SCDeriv("Lin_L", (fresh(),), (child,))
        if rule == "Grd_L":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            if not j.gctx:
                return child
            return SCDeriv("Grd_L", (fresh(),), (child,))
        if rule == "cut_MS":
            host = gen_ms(budget - 1)
            j = check_sc(host, sr)
            if not j.lctx:
                return host
            pos = rng.randrange(len(j.lctx))
            prov = ms_of_type(j.lctx[pos].ty, min(budget - 1, 2))
            return SCDeriv("cut_MS", (pos,), (prov, host))
        if rule == "gcut_MS":
            host = gen_ms(budget - 1)
            j = check_sc(host, sr)
            if not j.gctx:
                return host
            pos = rng.randrange(len(j.gctx))
            prov = gs_of_type(j.gctx[pos].ty, min(budget - 1, 2))
            return SCDeriv("gcut_MS", (pos,), (prov, host))
        if rule == "weak_MS":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            return SCDeriv("weak_MS", (pos, fresh(), rand_gtype(1)), (child,))
        if rule == "cont_MS":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            if not j.gctx:
                return child
            pos = rng.randrange(len(j.gctx))
            dup = SCDeriv("weak_MS", (pos + 1, fresh(), j.gctx[pos].ty), (child,))
            return SCDeriv("cont_MS", (pos,), (dup,))
        if rule == "ex_MS":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            if len(j.lctx) < 2:
                return child
            pos = rng.randrange(len(j.lctx) - 1)
            return SCDeriv("ex_MS", (pos,), (child,))
        if rule == "gex_MS":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            if len(j.gctx) < 2:
                return child
            pos = rng.randrange(len(j.gctx) - 1)
            return SCDeriv("gex_MS", (pos,), (child,))
        if rule == "sub_MS":
            child = gen_ms(budget - 1)
            j = check_sc(child, sr)
            grades = tuple(sr.raised(h.grade, rng) for h in j.gctx)
            return SCDeriv("sub_MS", (grades,), (child,))
        if rule == "gmcut":
            host = gen_ms(budget - 2)
            j = check_sc(host, sr)
            n = rng.randrange(3)
            ty = rand_gtype(1)
            pos = rng.randrange(len(j.gctx) + 1)
            for k in range(n):
                host = SCDeriv("weak_MS", (pos + k, fresh(), ty), (host,))
            prov = gs_of_type(ty, 1)
            return SCDeriv("gmcut", (pos, n), (prov, host))
        raise AssertionError(rule)

    def ms_of_type(ty: LType, budget: int) -> SCDeriv:
        if budget <= 0 or rng.random() < 0.4:
            return SCDeriv("id_MS", (fresh(), ty))
        if isinstance(ty, IUnit):
            return SCDeriv("unitI_R")
        if isinstance(ty, LTen):
            return SCDeriv(
                "*R",
                (),
                (ms_of_type(ty.left, budget - 1), ms_of_type(ty.right, budget - 1)),
            )
        if isinstance(ty, GrdTy):
            return SCDeriv("Grd_R", (ty.grade,), (gs_of_type(ty.inner, budget - 1),))
        return SCDeriv("id_MS", (fresh(), ty))

    if fragment == "GS":
        return gen_gs(max_depth)
    if fragment == "MS":
        return gen_ms(max_depth)
    raise ValueError(f"unknown fragment {fragment!r} (want 'GS' or 'MS')")


def _pick(rng: random.Random, choices: list[tuple[str, float]]) -> str:
    total = sum(w for _, w in choices)
    x = rng.random() * total
    for name, w in choices:
        x -= w
        if x <= 0:
            return name
    return choices[-1][0]

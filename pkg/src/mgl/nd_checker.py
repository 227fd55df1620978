"""Natural-deduction derivations (GT and MT), checking, and elaboration.

Mirrors the sequent-calculus checker: a derivation is (system, rule, params,
children) and the conclusion judgment is recomputed bottom-up.  The two
systems share rule names where the rules agree (Id, weak, cont, ex), so every
node carries its system tag and the rule table is keyed by both.

Eliminators take the scrutinee derivation first and the body second.  Graded
eliminators splice the scrutinee's context into the body's context at the
position of the discharged hypothesis, scaled by that hypothesis's grade
(except Grd_E, whose scaling already happened at the introduction).

``elaborate_nd`` goes the other way: given a goal judgment it reconstructs a
derivation for the goal's term, inferring how often each graded hypothesis is
used and repairing the result (weakening in unused hypotheses, reordering,
and a final grade raise) to conclude the goal exactly.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .semiring import Semiring, vec_leq
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
    Term,
    Unlin,
    UnitI,
    UnitJ,
    Var,
    alpha_eq,
    free_vars,
    fresh_name,
    same_sequent,
    subst,
    grades_of,
    hyp_names,
    is_gtype,
    is_ltype,
    show_gtype,
    show_ltype,
    show_type,
)
from .sc_checker import CheckError, RuleSig


@dataclass(frozen=True)
class NDDeriv:
    """One natural-deduction node; ``system`` is "GT" or "MT"."""

    system: str
    rule: str
    params: tuple = ()
    children: tuple["NDDeriv", ...] = ()


ND_RULES: dict[tuple[str, str], RuleSig] = {
    ("GT", "Id"): RuleSig(("name", "gtype"), 0, "GT"),
    ("GT", "unitJ_I"): RuleSig((), 0, "GT"),
    ("GT", "unitJ_E"): RuleSig(("int",), 2, "GT"),
    ("GT", "><I"): RuleSig((), 2, "GT"),
    ("GT", "><E"): RuleSig(("int",), 2, "GT"),
    ("GT", "Lin_I"): RuleSig((), 1, "GT"),
    ("GT", "weak"): RuleSig(("int", "name", "gtype"), 1, "GT"),
    ("GT", "cont"): RuleSig(("int",), 1, "GT"),
    ("GT", "ex"): RuleSig(("int",), 1, "GT"),
    ("GT", "sub"): RuleSig(("grades",), 1, "GT"),
    ("MT", "Id"): RuleSig(("name", "ltype"), 0, "MT"),
    ("MT", "GSub"): RuleSig(("grades",), 1, "MT"),
    ("MT", "unitI_I"): RuleSig((), 0, "MT"),
    ("MT", "unitI_E"): RuleSig(("int",), 2, "MT"),
    ("MT", "*I"): RuleSig((), 2, "MT"),
    ("MT", "*E"): RuleSig(("int",), 2, "MT"),
    ("MT", "-oI"): RuleSig((), 1, "MT"),
    ("MT", "-oE"): RuleSig((), 2, "MT"),
    ("MT", "Grd_I"): RuleSig(("grade",), 1, "MT"),
    ("MT", "Lin_E"): RuleSig((), 1, "MT"),
    ("MT", "Grd_E"): RuleSig(("int",), 2, "MT"),
    ("MT", "unitJ_E-MS"): RuleSig(("int",), 2, "MT"),
    ("MT", "><E-MS"): RuleSig(("int",), 2, "MT"),
    ("MT", "weak"): RuleSig(("int", "name", "gtype"), 1, "MT"),
    ("MT", "cont"): RuleSig(("int",), 1, "MT"),
    ("MT", "ex"): RuleSig(("int",), 1, "MT"),
    ("MT", "gex"): RuleSig(("int",), 1, "MT"),
}


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
        raise CheckError(path, rule, f"{which} premise must be a graded judgment")
    return j


def _expect_ms(j, path, rule, which: str) -> MSJudgment:
    if not isinstance(j, MSJudgment):
        raise CheckError(path, rule, f"{which} premise must be a mixed judgment")
    return j


def _scale_gctx(sr: Semiring, r, gctx) -> tuple[GH, ...]:
    return tuple(GH(h.name, sr.mul(r, h.grade), h.ty) for h in gctx)


def check_nd(d: NDDeriv, sr: Semiring, strict_grd: bool = False):
    """Check ``d`` and return its conclusion judgment.

    With ``strict_grd`` the graded eliminator requires the discharged
    hypothesis's grade to equal the modality's grade instead of merely
    sitting below it.
    """
    memo: dict[int, object] = {}
    work: list[tuple[NDDeriv, tuple[int, ...], bool]] = [(d, (), False)]
    while work:
        node, path, ready = work.pop()
        if id(node) in memo:
            continue
        if not isinstance(node, NDDeriv):
            raise CheckError(path, "?", f"not a natural-deduction derivation: {node!r}")
        if ready:
            memo[id(node)] = _nd_conclude(
                node, path, [memo[id(c)] for c in node.children], sr, strict_grd
            )
        else:
            sig = ND_RULES.get((node.system, node.rule))
            if sig is None:
                raise CheckError(path, node.rule, f"unknown {node.system} rule")
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


def _nd_conclude(node: NDDeriv, path, js: list, sr: Semiring, strict: bool):
    rule = node.rule
    p = node.params

    if node.system == "GT":
        return _gt_conclude(node, path, js, sr)

    if rule == "Id":
        name, ty = p
        _require(is_ltype(ty), path, rule, "identity needs a linear type")
        return MSJudgment((), (LH(name, ty),), Var(name), ty)

    if rule == "GSub":
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

    if rule == "unitI_I":
        return MSJudgment((), (), UnitI(), IUnit())

    if rule == "unitI_E":
        (pos,) = p
        scrut = _expect_ms(js[0], path, rule, "scrutinee")
        body = _expect_ms(js[1], path, rule, "body")
        _require(isinstance(scrut.ty, IUnit), path, rule, "scrutinee must prove I")
        _require(0 <= pos <= len(body.lctx), path, rule, f"position {pos} out of range")
        _disjoint(path, rule, _all_names(scrut), _all_names(body))
        lctx = body.lctx[:pos] + scrut.lctx + body.lctx[pos:]
        return MSJudgment(
            body.gctx + scrut.gctx,
            lctx,
            LetUnit("I", scrut.term, body.term),
            body.ty,
        )

    if rule == "*I":
        j1 = _expect_ms(js[0], path, rule, "first")
        j2 = _expect_ms(js[1], path, rule, "second")
        _disjoint(path, rule, _all_names(j1), _all_names(j2))
        return MSJudgment(
            j1.gctx + j2.gctx,
            j1.lctx + j2.lctx,
            Pair(j1.term, j2.term),
            LTen(j1.ty, j2.ty),
        )

    if rule == "*E":
        (pos,) = p
        scrut = _expect_ms(js[0], path, rule, "scrutinee")
        body = _expect_ms(js[1], path, rule, "body")
        _require(isinstance(scrut.ty, LTen), path, rule, "scrutinee must prove a * pair")
        _require(0 <= pos and pos + 1 < len(body.lctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = body.lctx[pos], body.lctx[pos + 1]
        _require(
            h1.ty == scrut.ty.left and h2.ty == scrut.ty.right,
            path,
            rule,
            "bound hypotheses do not match the scrutinee's components",
        )
        rest = set(_all_names(body)) - {h1.name, h2.name}
        _disjoint(path, rule, _all_names(scrut), rest)
        lctx = body.lctx[:pos] + scrut.lctx + body.lctx[pos + 2 :]
        return MSJudgment(
            body.gctx + scrut.gctx,
            lctx,
            LetPair(h1.name, h2.name, scrut.term, body.term),
            body.ty,
        )

    if rule == "-oI":
        j = _expect_ms(js[0], path, rule, "only")
        _require(len(j.lctx) > 0, path, rule, "no linear hypothesis to abstract")
        h = j.lctx[-1]
        return MSJudgment(
            j.gctx, j.lctx[:-1], Lam(h.name, h.ty, j.term), Lolli(h.ty, j.ty)
        )

    if rule == "-oE":
        fn = _expect_ms(js[0], path, rule, "function")
        arg = _expect_ms(js[1], path, rule, "argument")
        _require(
            isinstance(fn.ty, Lolli),
            path,
            rule,
            f"function premise has type {show_ltype(sr, fn.ty)}, not a -o type",
        )
        _require(
            fn.ty.left == arg.ty,
            path,
            rule,
            f"argument proves {show_ltype(sr, arg.ty)} but the function wants {show_ltype(sr, fn.ty.left)}",
        )
        _disjoint(path, rule, _all_names(fn), _all_names(arg))
        return MSJudgment(
            fn.gctx + arg.gctx,
            fn.lctx + arg.lctx,
            App(fn.term, arg.term),
            fn.ty.right,
        )

    if rule == "Grd_I":
        (r,) = p
        j = _expect_gs(js[0], path, rule, "only")
        return MSJudgment(
            _scale_gctx(sr, r, j.gctx), (), GrdTm(r, j.term), GrdTy(r, j.ty)
        )

    if rule == "Lin_E":
        j = _expect_gs(js[0], path, rule, "only")
        _require(
            isinstance(j.ty, LinTy),
            path,
            rule,
            f"premise has type {show_gtype(sr, j.ty)}, not a Lin type",
        )
        return MSJudgment(j.gctx, (), Unlin(j.term), j.ty.inner)

    if rule == "Grd_E":
        (pos,) = p
        scrut = _expect_ms(js[0], path, rule, "scrutinee")
        body = _expect_ms(js[1], path, rule, "body")
        _require(
            isinstance(scrut.ty, GrdTy),
            path,
            rule,
            f"scrutinee has type {show_ltype(sr, scrut.ty)}, not a Grd type",
        )
        _require(0 <= pos < len(body.gctx), path, rule, f"position {pos} out of range")
        h = body.gctx[pos]
        _require(h.ty == scrut.ty.inner, path, rule, "bound hypothesis does not match the scrutinee")
        r = scrut.ty.grade
        if strict:
            _require(
                h.grade == r,
                path,
                rule,
                f"hypothesis grade {sr.show(h.grade)} must equal the modality grade {sr.show(r)}",
            )
        else:
            _require(
                sr.leq(h.grade, r),
                path,
                rule,
                f"hypothesis grade {sr.show(h.grade)} exceeds the modality grade {sr.show(r)}",
            )
        rest = set(_all_names(body)) - {h.name}
        _disjoint(path, rule, _all_names(scrut), rest)
        gctx = body.gctx[:pos] + scrut.gctx + body.gctx[pos + 1 :]
        return MSJudgment(
            gctx,
            body.lctx + scrut.lctx,
            LetGrd(r, h.name, scrut.term, body.term),
            body.ty,
        )

    if rule == "unitJ_E-MS":
        (pos,) = p
        scrut = _expect_gs(js[0], path, rule, "scrutinee")
        body = _expect_ms(js[1], path, rule, "body")
        _require(isinstance(scrut.ty, JUnit), path, rule, "scrutinee must prove J")
        _require(0 <= pos < len(body.gctx), path, rule, f"position {pos} out of range")
        h = body.gctx[pos]
        _require(isinstance(h.ty, JUnit), path, rule, "discharged hypothesis must have type J")
        _require(
            h.name not in free_vars(body.term),
            path,
            rule,
            f"discharged hypothesis {h.name} occurs in the body term",
        )
        rest = set(_all_names(body)) - {h.name}
        _disjoint(path, rule, _all_names(scrut), rest)
        mid = _scale_gctx(sr, h.grade, scrut.gctx)
        gctx = body.gctx[:pos] + mid + body.gctx[pos + 1 :]
        return MSJudgment(
            gctx, body.lctx, LetUnit("J", scrut.term, body.term), body.ty
        )

    if rule == "><E-MS":
        (pos,) = p
        scrut = _expect_gs(js[0], path, rule, "scrutinee")
        body = _expect_ms(js[1], path, rule, "body")
        _require(isinstance(scrut.ty, GTen), path, rule, "scrutinee must prove a >< pair")
        _require(0 <= pos and pos + 1 < len(body.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = body.gctx[pos], body.gctx[pos + 1]
        _require(
            h1.grade == h2.grade,
            path,
            rule,
            f"bound hypotheses must share a grade: {sr.show(h1.grade)} vs {sr.show(h2.grade)}",
        )
        _require(
            h1.ty == scrut.ty.left and h2.ty == scrut.ty.right,
            path,
            rule,
            "bound hypotheses do not match the scrutinee's components",
        )
        rest = set(_all_names(body)) - {h1.name, h2.name}
        _disjoint(path, rule, _all_names(scrut), rest)
        mid = _scale_gctx(sr, h1.grade, scrut.gctx)
        gctx = body.gctx[:pos] + mid + body.gctx[pos + 2 :]
        return MSJudgment(
            gctx,
            body.lctx,
            LetPair(h1.name, h2.name, scrut.term, body.term),
            body.ty,
        )

    if rule == "weak":
        pos, name, ty = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos <= len(j.gctx), path, rule, f"position {pos} out of range")
        _require(is_gtype(ty), path, rule, "weakening needs a graded type")
        _fresh_against(path, rule, name, _all_names(j))
        gctx = j.gctx[:pos] + (GH(name, sr.zero, ty),) + j.gctx[pos:]
        return MSJudgment(gctx, j.lctx, j.term, j.ty)

    if rule == "cont":
        (pos,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = j.gctx[pos], j.gctx[pos + 1]
        _require(h1.ty == h2.ty, path, rule, "contracted hypotheses must share a type")
        entry = GH(h1.name, sr.add(h1.grade, h2.grade), h1.ty)
        gctx = j.gctx[:pos] + (entry,) + j.gctx[pos + 2 :]
        return MSJudgment(gctx, j.lctx, subst(j.term, h2.name, Var(h1.name)), j.ty)

    if rule == "ex":
        (pos,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.lctx), path, rule, f"positions {pos},{pos+1} out of range")
        lctx = j.lctx[:pos] + (j.lctx[pos + 1], j.lctx[pos]) + j.lctx[pos + 2 :]
        return MSJudgment(j.gctx, lctx, j.term, j.ty)

    if rule == "gex":
        (pos,) = p
        j = _expect_ms(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        gctx = j.gctx[:pos] + (j.gctx[pos + 1], j.gctx[pos]) + j.gctx[pos + 2 :]
        return MSJudgment(gctx, j.lctx, j.term, j.ty)

    raise CheckError(path, rule, f"unknown MT rule")


def _gt_conclude(node: NDDeriv, path, js: list, sr: Semiring):
    rule = node.rule
    p = node.params

    if rule == "Id":
        name, ty = p
        _require(is_gtype(ty), path, rule, "identity needs a graded type")
        return GSJudgment((GH(name, sr.one, ty),), Var(name), ty)

    if rule == "unitJ_I":
        return GSJudgment((), UnitJ(), JUnit())

    if rule == "unitJ_E":
        (pos,) = p
        scrut = _expect_gs(js[0], path, rule, "scrutinee")
        body = _expect_gs(js[1], path, rule, "body")
        _require(isinstance(scrut.ty, JUnit), path, rule, "scrutinee must prove J")
        _require(0 <= pos < len(body.gctx), path, rule, f"position {pos} out of range")
        h = body.gctx[pos]
        _require(isinstance(h.ty, JUnit), path, rule, "discharged hypothesis must have type J")
        _require(
            h.name not in free_vars(body.term),
            path,
            rule,
            f"discharged hypothesis {h.name} occurs in the body term",
        )
        rest = set(_all_names(body)) - {h.name}
        _disjoint(path, rule, _all_names(scrut), rest)
        mid = _scale_gctx(sr, h.grade, scrut.gctx)
        gctx = body.gctx[:pos] + mid + body.gctx[pos + 1 :]
        return GSJudgment(gctx, LetUnit("J", scrut.term, body.term), body.ty)

    if rule == "><I":
        j1 = _expect_gs(js[0], path, rule, "first")
        j2 = _expect_gs(js[1], path, rule, "second")
        _disjoint(path, rule, _all_names(j1), _all_names(j2))
        return GSJudgment(
            j1.gctx + j2.gctx, Pair(j1.term, j2.term), GTen(j1.ty, j2.ty)
        )

    if rule == "><E":
        (pos,) = p
        scrut = _expect_gs(js[0], path, rule, "scrutinee")
        body = _expect_gs(js[1], path, rule, "body")
        _require(isinstance(scrut.ty, GTen), path, rule, "scrutinee must prove a >< pair")
        _require(0 <= pos and pos + 1 < len(body.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = body.gctx[pos], body.gctx[pos + 1]
        _require(
            h1.grade == h2.grade,
            path,
            rule,
            f"bound hypotheses must share a grade: {sr.show(h1.grade)} vs {sr.show(h2.grade)}",
        )
        _require(
            h1.ty == scrut.ty.left and h2.ty == scrut.ty.right,
            path,
            rule,
            "bound hypotheses do not match the scrutinee's components",
        )
        rest = set(_all_names(body)) - {h1.name, h2.name}
        _disjoint(path, rule, _all_names(scrut), rest)
        mid = _scale_gctx(sr, h1.grade, scrut.gctx)
        gctx = body.gctx[:pos] + mid + body.gctx[pos + 2 :]
        return GSJudgment(
            gctx, LetPair(h1.name, h2.name, scrut.term, body.term), body.ty
        )

    if rule == "Lin_I":
        j = _expect_ms(js[0], path, rule, "only")
        _require(len(j.lctx) == 0, path, rule, "premise must have an empty linear context")
        return GSJudgment(j.gctx, LinTm(j.term), LinTy(j.ty))

    if rule == "weak":
        pos, name, ty = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos <= len(j.gctx), path, rule, f"position {pos} out of range")
        _require(is_gtype(ty), path, rule, "weakening needs a graded type")
        _fresh_against(path, rule, name, _all_names(j))
        gctx = j.gctx[:pos] + (GH(name, sr.zero, ty),) + j.gctx[pos:]
        return GSJudgment(gctx, j.term, j.ty)

    if rule == "cont":
        (pos,) = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        h1, h2 = j.gctx[pos], j.gctx[pos + 1]
        _require(h1.ty == h2.ty, path, rule, "contracted hypotheses must share a type")
        entry = GH(h1.name, sr.add(h1.grade, h2.grade), h1.ty)
        gctx = j.gctx[:pos] + (entry,) + j.gctx[pos + 2 :]
        return GSJudgment(gctx, subst(j.term, h2.name, Var(h1.name)), j.ty)

    if rule == "ex":
        (pos,) = p
        j = _expect_gs(js[0], path, rule, "only")
        _require(0 <= pos and pos + 1 < len(j.gctx), path, rule, f"positions {pos},{pos+1} out of range")
        gctx = j.gctx[:pos] + (j.gctx[pos + 1], j.gctx[pos]) + j.gctx[pos + 2 :]
        return GSJudgment(gctx, j.term, j.ty)

    if rule == "sub":
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

    raise CheckError(path, rule, f"unknown GT rule")


def nd_has_rule(d: NDDeriv, names) -> bool:
    stack = [d]
    seen: set[int] = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.rule in names:
            return True
        stack.extend(node.children)
    return False


def collect_nd_names(d: NDDeriv) -> set[str]:
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


# ---------------------------------------------------------------------------
# Random derivation generator (test support)
# ---------------------------------------------------------------------------


def gen_nd_derivation(
    sr: Semiring, seed: int, max_depth: int, fragment: str = "GT"
) -> NDDeriv:
    """Generate a random well-formed natural-deduction derivation."""
    rng = random.Random(seed)
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"n{counter[0]}"

    def safe_grade():
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

    def gt_axiom() -> NDDeriv:
        if rng.random() < 0.25:
            return NDDeriv("GT", "unitJ_I")
        return NDDeriv("GT", "Id", (fresh(), rand_gtype(1)))

    def mt_axiom() -> NDDeriv:
        k = rng.randrange(3)
        if k == 0:
            return NDDeriv("MT", "unitI_I")
        if k == 1:
            return NDDeriv(
                "MT", "Lin_E", (), (NDDeriv("GT", "Id", (fresh(), LinTy(rand_ltype(1)))),)
            )
        return NDDeriv("MT", "Id", (fresh(), rand_ltype(1)))

    def mt_no_linear(budget: int) -> NDDeriv:
        # An MT derivation with empty linear context: abstract every linear
        # hypothesis away.
        d = gen_mt(budget)
        j = check_nd(d, sr)
        for _ in range(len(j.lctx)):
            d = NDDeriv("MT", "-oI", (), (d,))
        return d

    def gen_gt(budget: int) -> NDDeriv:
        if budget <= 0:
            return gt_axiom()
        choices = [
            ("axiom", 1.0),
            ("><I", 2.0),
            ("><E", 1.5),
            ("unitJ_E", 1.2),
            ("Lin_I", 1.0),
            ("weak", 0.8),
            ("cont", 0.7),
            ("ex", 0.7),
            ("sub", 0.7),
        ]
        rule = _pick(rng, choices)
        if rule == "axiom":
            return gt_axiom()
        if rule == "><I":
            return NDDeriv("GT", "><I", (), (gen_gt(budget - 1), gen_gt(budget - 1)))
        if rule == "><E":
            scrut = gen_gt(budget - 2)
            js = check_nd(scrut, sr)
            if not isinstance(js.ty, GTen):
                scrut = NDDeriv("GT", "><I", (), (scrut, gt_axiom()))
                js = check_nd(scrut, sr)
            body = gen_gt(budget - 2)
            jb = check_nd(body, sr)
            pos = len(jb.gctx)
            x, y = fresh(), fresh()
            body = NDDeriv("GT", "weak", (pos, x, js.ty.left), (body,))
            body = NDDeriv("GT", "weak", (pos + 1, y, js.ty.right), (body,))
            return NDDeriv("GT", "><E", (pos,), (scrut, body))
        if rule == "unitJ_E":
            scrut = gen_gt(budget - 2)
            js = check_nd(scrut, sr)
            if not isinstance(js.ty, JUnit):
                scrut = NDDeriv("GT", "unitJ_I")
            body = gen_gt(budget - 2)
            jb = check_nd(body, sr)
            pos = len(jb.gctx)
            body = NDDeriv("GT", "weak", (pos, fresh(), JUnit()), (body,))
            return NDDeriv("GT", "unitJ_E", (pos,), (scrut, body))
        if rule == "Lin_I":
            return NDDeriv("GT", "Lin_I", (), (mt_no_linear(budget - 1),))
        if rule == "weak":
            child = gen_gt(budget - 1)
            j = check_nd(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            return NDDeriv("GT", "weak", (pos, fresh(), rand_gtype(1)), (child,))
        if rule == "cont":
            child = gen_gt(budget - 1)
            j = check_nd(child, sr)
            if not j.gctx:
                return child
            pos = rng.randrange(len(j.gctx))
            dup = NDDeriv("GT", "weak", (pos + 1, fresh(), j.gctx[pos].ty), (child,))
            return NDDeriv("GT", "cont", (pos,), (dup,))
        if rule == "ex":
            child = gen_gt(budget - 1)
            j = check_nd(child, sr)
            if len(j.gctx) < 2:
                return child
            pos = rng.randrange(len(j.gctx) - 1)
            return NDDeriv("GT", "ex", (pos,), (child,))
        if rule == "sub":
            child = gen_gt(budget - 1)
            j = check_nd(child, sr)
            grades = tuple(sr.raised(h.grade, rng) for h in j.gctx)
            return NDDeriv("GT", "sub", (grades,), (child,))
        raise AssertionError(rule)

    def gen_mt(budget: int) -> NDDeriv:
        if budget <= 0:
            return mt_axiom()
        choices = [
            ("axiom", 1.0),
            ("*I", 2.0),
            ("*E", 1.2),
            ("unitI_E", 1.0),
            ("-oI", 1.2),
            ("-oE", 1.2),
            ("Grd_I", 1.2),
            ("Lin_E", 1.0),
            ("Grd_E", 1.2),
            ("unitJ_E-MS", 0.9),
            ("><E-MS", 0.9),
            ("weak", 0.7),
            ("cont", 0.6),
            ("ex", 0.6),
            ("gex", 0.6),
            ("GSub", 0.6),
        ]
        rule = _pick(rng, choices)
        if rule == "axiom":
            return mt_axiom()
        if rule == "*I":
            return NDDeriv("MT", "*I", (), (gen_mt(budget - 1), gen_mt(budget - 1)))
        if rule == "*E":
            scrut = gen_mt(budget - 2)
            js = check_nd(scrut, sr)
            if not isinstance(js.ty, LTen):
                scrut = NDDeriv("MT", "*I", (), (scrut, mt_axiom()))
                js = check_nd(scrut, sr)
            body = NDDeriv(
                "MT",
                "*I",
                (),
                (
                    NDDeriv("MT", "Id", (fresh(), js.ty.left)),
                    NDDeriv("MT", "Id", (fresh(), js.ty.right)),
                ),
            )
            return NDDeriv("MT", "*E", (0,), (scrut, body))
        if rule == "unitI_E":
            scrut = gen_mt(budget - 2)
            js = check_nd(scrut, sr)
            if not isinstance(js.ty, IUnit):
                scrut = NDDeriv("MT", "unitI_I")
            body = gen_mt(budget - 2)
            jb = check_nd(body, sr)
            pos = rng.randrange(len(jb.lctx) + 1)
            return NDDeriv("MT", "unitI_E", (pos,), (scrut, body))
        if rule == "-oI":
            child = gen_mt(budget - 1)
            j = check_nd(child, sr)
            if not j.lctx:
                child = NDDeriv(
                    "MT", "*I", (), (child, NDDeriv("MT", "Id", (fresh(), rand_ltype(1))))
                )
            return NDDeriv("MT", "-oI", (), (child,))
        if rule == "-oE":
            arg = gen_mt(budget - 1)
            ja = check_nd(arg, sr)
            fn = NDDeriv("MT", "Id", (fresh(), Lolli(ja.ty, rand_ltype(1))))
            return NDDeriv("MT", "-oE", (), (fn, arg))
        if rule == "Grd_I":
            return NDDeriv("MT", "Grd_I", (safe_grade(),), (gen_gt(budget - 1),))
        if rule == "Lin_E":
            child = gen_gt(budget - 1)
            j = check_nd(child, sr)
            if not isinstance(j.ty, LinTy):
                child = NDDeriv("GT", "Lin_I", (), (mt_no_linear(budget - 2),))
            return NDDeriv("MT", "Lin_E", (), (child,))
        if rule == "Grd_E":
            body = gen_mt(budget - 2)
            jb = check_nd(body, sr)
            pos = len(jb.gctx)
            x = fresh()
            inner = rand_gtype(1)
            body = NDDeriv("MT", "weak", (pos, x, inner), (body,))
            scrut = NDDeriv("MT", "Grd_I", (sr.zero,), (gt_of_type(inner, budget - 2),))
            return NDDeriv("MT", "Grd_E", (pos,), (scrut, body))
        if rule == "unitJ_E-MS":
            scrut = gt_of_type(JUnit(), budget - 2)
            body = gen_mt(budget - 2)
            jb = check_nd(body, sr)
            pos = len(jb.gctx)
            body = NDDeriv("MT", "weak", (pos, fresh(), JUnit()), (body,))
            return NDDeriv("MT", "unitJ_E-MS", (pos,), (scrut, body))
        if rule == "><E-MS":
            ty = GTen(rand_gtype(1), rand_gtype(1))
            scrut = gt_of_type(ty, budget - 2)
            body = gen_mt(budget - 2)
            jb = check_nd(body, sr)
            pos = len(jb.gctx)
            body = NDDeriv("MT", "weak", (pos, fresh(), ty.left), (body,))
            body = NDDeriv("MT", "weak", (pos + 1, fresh(), ty.right), (body,))
            return NDDeriv("MT", "><E-MS", (pos,), (scrut, body))
        if rule == "weak":
            child = gen_mt(budget - 1)
            j = check_nd(child, sr)
            pos = rng.randrange(len(j.gctx) + 1)
            return NDDeriv("MT", "weak", (pos, fresh(), rand_gtype(1)), (child,))
        if rule == "cont":
            child = gen_mt(budget - 1)
            j = check_nd(child, sr)
            if not j.gctx:
                return child
            pos = rng.randrange(len(j.gctx))
            dup = NDDeriv("MT", "weak", (pos + 1, fresh(), j.gctx[pos].ty), (child,))
            return NDDeriv("MT", "cont", (pos,), (dup,))
        if rule == "ex":
            child = gen_mt(budget - 1)
            j = check_nd(child, sr)
            if len(j.lctx) < 2:
                return child
            pos = rng.randrange(len(j.lctx) - 1)
            return NDDeriv("MT", "ex", (pos,), (child,))
        if rule == "gex":
            child = gen_mt(budget - 1)
            j = check_nd(child, sr)
            if len(j.gctx) < 2:
                return child
            pos = rng.randrange(len(j.gctx) - 1)
            return NDDeriv("MT", "gex", (pos,), (child,))
        if rule == "GSub":
            child = gen_mt(budget - 1)
            j = check_nd(child, sr)
            grades = tuple(sr.raised(h.grade, rng) for h in j.gctx)
            return NDDeriv("MT", "GSub", (grades,), (child,))
        raise AssertionError(rule)

    def gt_of_type(ty: GType, budget: int) -> NDDeriv:
        if budget <= 0 or rng.random() < 0.4:
            return NDDeriv("GT", "Id", (fresh(), ty))
        if isinstance(ty, JUnit):
            return NDDeriv("GT", "unitJ_I")
        if isinstance(ty, GTen):
            return NDDeriv(
                "GT",
                "><I",
                (),
                (gt_of_type(ty.left, budget - 1), gt_of_type(ty.right, budget - 1)),
            )
        return NDDeriv("GT", "Id", (fresh(), ty))

    if fragment == "GT":
        return gen_gt(max_depth)
    if fragment == "MT":
        return gen_mt(max_depth)
    raise ValueError(f"unknown fragment {fragment!r} (want 'GT' or 'MT')")


def _pick(rng: random.Random, choices: list[tuple[str, float]]) -> str:
    total = sum(w for _, w in choices)
    x = rng.random() * total
    for name, w in choices:
        x -= w
        if x <= 0:
            return name
    return choices[-1][0]


# ---------------------------------------------------------------------------
# Usage inference and elaboration
# ---------------------------------------------------------------------------


class ElabError(ValueError):
    """A goal judgment has no derivation for its term."""


def _uadd(sr: Semiring, u1: dict, u2: dict) -> dict:
    out = dict(u1)
    for k, g in u2.items():
        out[k] = sr.add(out[k], g) if k in out else g
    return out


def _uscale(sr: Semiring, r, u: dict) -> dict:
    return {k: sr.mul(r, g) for k, g in u.items()}


def _lin_join(a: tuple, b: tuple) -> tuple:
    clash = set(a) & set(b)
    if clash:
        raise ElabError(f"linear variable used more than once: {sorted(clash)[0]}")
    return a + b


class _Infer:
    """Bidirectional typing with usage synthesis over a goal's contexts."""

    def __init__(self, sr: Semiring, genv: dict, lenv: dict):
        self.sr = sr
        self.genv = genv
        self.lenv = lenv

    def gt(self, t: Term, want) -> tuple:
        """Type a term in the graded fragment; returns (type, usage)."""
        sr = self.sr
        ty: GType
        if isinstance(t, Var):
            if t.name in self.lenv:
                raise ElabError(
                    f"linear variable {t.name} cannot appear in a graded position"
                )
            if t.name not in self.genv:
                raise ElabError(f"unbound variable {t.name}")
            ty, u = self.genv[t.name], {t.name: sr.one}
        elif isinstance(t, UnitJ):
            ty, u = JUnit(), {}
        elif isinstance(t, Pair):
            wl = want.left if isinstance(want, GTen) else None
            wr = want.right if isinstance(want, GTen) else None
            tl, ul = self.gt(t.fst, wl)
            tr, ur = self.gt(t.snd, wr)
            ty, u = GTen(tl, tr), _uadd(sr, ul, ur)
        elif isinstance(t, LetUnit) and t.kind == "J":
            _, us = self.gt(t.scrut, JUnit())
            tb, ub = self.gt(t.body, want)
            ty, u = tb, _uadd(sr, _uscale(sr, sr.zero, us), ub)
        elif isinstance(t, LetPair):
            ts, us = self.gt(t.scrut, None)
            if not isinstance(ts, GTen):
                raise ElabError(
                    f"pair scrutinee has type {show_gtype(sr, ts)}, not a >< pair"
                )
            inner = _Infer(sr, {**self.genv, t.x: ts.left, t.y: ts.right}, self.lenv)
            tb, ub = inner.gt(t.body, want)
            gx = ub.pop(t.x, sr.zero)
            gy = ub.pop(t.y, sr.zero)
            s = self._joint(gx, gy)
            ty, u = tb, _uadd(sr, _uscale(sr, s, us), ub)
        elif isinstance(t, LinTm):
            wi = want.inner if isinstance(want, LinTy) else None
            tb, ub, lin = self.mt(t.body, wi)
            if lin:
                raise ElabError(
                    f"promoted term uses linear variables: {', '.join(lin)}"
                )
            ty, u = LinTy(tb), ub
        else:
            raise ElabError(
                f"term form {type(t).__name__} is not derivable in the graded fragment"
            )
        if want is not None and ty != want:
            raise ElabError(
                f"expected {show_gtype(sr, want)} but the term has type {show_gtype(sr, ty)}"
            )
        return ty, u

    def mt(self, t: Term, want) -> tuple:
        """Type a term in the mixed fragment; returns (type, usage, linear-uses)."""
        sr = self.sr
        ty: LType
        lin: tuple = ()
        if isinstance(t, Var):
            if t.name in self.lenv:
                ty, u, lin = self.lenv[t.name], {}, (t.name,)
            elif t.name in self.genv:
                raise ElabError(
                    f"graded variable {t.name} cannot conclude a mixed judgment on its own"
                )
            else:
                raise ElabError(f"unbound variable {t.name}")
        elif isinstance(t, UnitI):
            ty, u = IUnit(), {}
        elif isinstance(t, Pair):
            wl = want.left if isinstance(want, LTen) else None
            wr = want.right if isinstance(want, LTen) else None
            tl, ul, lin1 = self.mt(t.fst, wl)
            tr, ur, lin2 = self.mt(t.snd, wr)
            ty, u, lin = LTen(tl, tr), _uadd(sr, ul, ur), _lin_join(lin1, lin2)
        elif isinstance(t, LetUnit) and t.kind == "I":
            _, us, lins = self.mt(t.scrut, IUnit())
            tb, ub, linb = self.mt(t.body, want)
            ty, u, lin = tb, _uadd(sr, us, ub), _lin_join(linb, lins)
        elif isinstance(t, LetUnit) and t.kind == "J":
            _, us = self.gt(t.scrut, JUnit())
            tb, ub, linb = self.mt(t.body, want)
            ty, u, lin = tb, _uadd(sr, _uscale(sr, sr.zero, us), ub), linb
        elif isinstance(t, LetPair):
            ts, graded = self._scrut(t.scrut)
            if graded:
                us = ts[1]
                tys = ts[0]
                if not isinstance(tys, GTen):
                    raise ElabError(
                        f"pair scrutinee has type {show_gtype(sr, tys)}, not a >< pair"
                    )
                inner = _Infer(
                    sr, {**self.genv, t.x: tys.left, t.y: tys.right}, self.lenv
                )
                tb, ub, linb = inner.mt(t.body, want)
                gx = ub.pop(t.x, sr.zero)
                gy = ub.pop(t.y, sr.zero)
                s = self._joint(gx, gy)
                ty, u, lin = tb, _uadd(sr, _uscale(sr, s, us), ub), linb
            else:
                tys, us, lins = ts
                if not isinstance(tys, LTen):
                    raise ElabError(
                        f"pair scrutinee has type {show_ltype(sr, tys)}, not a * pair"
                    )
                inner = _Infer(
                    sr, self.genv, {**self.lenv, t.x: tys.left, t.y: tys.right}
                )
                tb, ub, linb = inner.mt(t.body, want)
                for v in (t.x, t.y):
                    if linb.count(v) != 1:
                        raise ElabError(f"linear variable {v} must be used exactly once")
                linb = tuple(v for v in linb if v not in (t.x, t.y))
                ty, u, lin = tb, _uadd(sr, us, ub), _lin_join(linb, lins)
        elif isinstance(t, LetGrd):
            ts, us, lins = self.mt(t.scrut, None)
            if not isinstance(ts, GrdTy):
                raise ElabError(
                    f"graded-let scrutinee has type {show_ltype(sr, ts)}, not a Grd type"
                )
            if ts.grade != t.grade:
                raise ElabError(
                    f"graded-let annotation {sr.show(t.grade)} does not match the "
                    f"scrutinee's grade {sr.show(ts.grade)}"
                )
            inner = _Infer(sr, {**self.genv, t.x: ts.inner}, self.lenv)
            tb, ub, linb = inner.mt(t.body, want)
            g = ub.pop(t.x, sr.zero)
            if not sr.leq(g, t.grade):
                raise ElabError(
                    f"bound variable {t.x} is used at {sr.show(g)}, above its grade "
                    f"{sr.show(t.grade)}"
                )
            ty, u, lin = tb, _uadd(sr, us, ub), _lin_join(linb, lins)
        elif isinstance(t, Lam):
            dom = t.ann
            if isinstance(want, Lolli):
                if dom is not None and dom != want.left:
                    raise ElabError("lambda annotation disagrees with the expected type")
                dom = want.left
            if dom is None:
                raise ElabError(f"lambda binder {t.x} needs a type annotation")
            inner = _Infer(sr, self.genv, {**self.lenv, t.x: dom})
            wb = want.right if isinstance(want, Lolli) else None
            tb, ub, linb = inner.mt(t.body, wb)
            if linb.count(t.x) != 1:
                raise ElabError(f"linear variable {t.x} must be used exactly once")
            ty, u, lin = Lolli(dom, tb), ub, tuple(v for v in linb if v != t.x)
        elif isinstance(t, App):
            tf, uf, linf = self.mt(t.fn, None)
            if not isinstance(tf, Lolli):
                raise ElabError(
                    f"applied term has type {show_ltype(sr, tf)}, not a -o type"
                )
            _, ua, lina = self.mt(t.arg, tf.left)
            ty, u, lin = tf.right, _uadd(sr, uf, ua), _lin_join(linf, lina)
        elif isinstance(t, GrdTm):
            if isinstance(want, GrdTy) and want.grade != t.grade:
                raise ElabError(
                    f"graded term at {sr.show(t.grade)} where {sr.show(want.grade)} "
                    "is expected"
                )
            wi = want.inner if isinstance(want, GrdTy) else None
            tb, ub = self.gt(t.body, wi)
            ty, u = GrdTy(t.grade, tb), _uscale(sr, t.grade, ub)
        elif isinstance(t, Unlin):
            wb = LinTy(want) if want is not None else None
            tb, ub = self.gt(t.body, wb)
            if not isinstance(tb, LinTy):
                raise ElabError(
                    f"unpromoted term has type {show_gtype(sr, tb)}, not a Lin type"
                )
            ty, u = tb.inner, ub
        else:
            raise ElabError(
                f"term form {type(t).__name__} is not derivable in the mixed fragment"
            )
        if want is not None and ty != want:
            raise ElabError(
                f"expected {show_ltype(sr, want)} but the term has type {show_ltype(sr, ty)}"
            )
        return ty, u, lin

    def _scrut(self, s: Term):
        """Type a pair scrutinee, which may live in either fragment.

        Returns ((type, usage, lin), False) for mixed or ((type, usage), True)
        for graded.
        """
        try:
            return self.mt(s, None), False
        except ElabError:
            pass
        return self.gt(s, None), True

    def _joint(self, gx, gy):
        sr = self.sr
        if gx == gy:
            return gx
        if sr.leq(gx, gy):
            return gy
        if sr.leq(gy, gx):
            return gx
        raise ElabError(
            f"pair components are used at incomparable grades {sr.show(gx)} and "
            f"{sr.show(gy)}"
        )


def infer_usage(sr: Semiring, goal) -> tuple:
    """Infer per-hypothesis usage of the goal's term.

    Returns (usage, linear_uses): ``usage`` maps each graded hypothesis name
    to its inferred grade (unused names map to zero) and ``linear_uses`` is
    the tuple of linear hypotheses consumed, in textual order.  Raises
    ElabError when the term does not type against the goal's contexts.
    """
    genv = {h.name: h.ty for h in goal.gctx}
    if isinstance(goal, GSJudgment):
        inf = _Infer(sr, genv, {})
        _, u = inf.gt(goal.term, goal.ty)
        lin: tuple = ()
    else:
        lenv = {h.name: h.ty for h in goal.lctx}
        inf = _Infer(sr, genv, lenv)
        _, u, lin = inf.mt(goal.term, goal.ty)
    usage = {h.name: u.get(h.name, sr.zero) for h in goal.gctx}
    return usage, lin


def _term_names(t: Term, out: set[str]) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    elif isinstance(t, (Pair, App)):
        a, b = (t.fst, t.snd) if isinstance(t, Pair) else (t.fn, t.arg)
        _term_names(a, out)
        _term_names(b, out)
    elif isinstance(t, LetUnit):
        _term_names(t.scrut, out)
        _term_names(t.body, out)
    elif isinstance(t, LetPair):
        out.add(t.x)
        out.add(t.y)
        _term_names(t.scrut, out)
        _term_names(t.body, out)
    elif isinstance(t, LetGrd):
        out.add(t.x)
        _term_names(t.scrut, out)
        _term_names(t.body, out)
    elif isinstance(t, Lam):
        out.add(t.x)
        _term_names(t.body, out)
    elif isinstance(t, (LinTm, GrdTm, Unlin)):
        _term_names(t.body, out)


class _Elab:
    """Builds a derivation for a goal's term.

    Each graded variable occurrence becomes its own hypothesis copy (the
    first occurrence keeps the variable's name); after every context join the
    copies are contracted back together, leftmost-first, which restores the
    original term.  Eliminators move the hypotheses they discharge to the end
    of the context; unused bound hypotheses are weakened in at grade zero.
    """

    def __init__(self, sr: Semiring, strict: bool, avoid: set[str]):
        self.sr = sr
        self.strict = strict
        self.avoid = avoid
        self.occ: dict[str, list[str]] = {}
        self.copy_of: dict[str, str] = {}
        self.rank: dict[str, int] = {}

    # -- derivation assembly -------------------------------------------------

    def mk(self, system: str, rule: str, params: tuple, children: tuple) -> tuple:
        node = NDDeriv(system, rule, params, tuple(d for d, _ in children))
        j = _nd_conclude(node, (), [j for _, j in children], self.sr, self.strict)
        return node, j

    def gswap(self, dj: tuple, pos: int) -> tuple:
        d, j = dj
        rule = "ex" if isinstance(j, GSJudgment) else "gex"
        sys = "GT" if isinstance(j, GSJudgment) else "MT"
        return self.mk(sys, rule, (pos,), (dj,))

    def gmove(self, dj: tuple, frm: int, to: int) -> tuple:
        while frm < to:
            dj = self.gswap(dj, frm)
            frm += 1
        while frm > to:
            dj = self.gswap(dj, frm - 1)
            frm -= 1
        return dj

    def lmove(self, dj: tuple, frm: int, to: int) -> tuple:
        while frm < to:
            dj = self.mk("MT", "ex", (frm,), (dj,))
            frm += 1
        while frm > to:
            dj = self.mk("MT", "ex", (frm - 1,), (dj,))
            frm -= 1
        return dj

    def merge(self, dj: tuple, keep: int, other: int) -> tuple:
        sys = "GT" if isinstance(dj[1], GSJudgment) else "MT"
        if other < keep:
            dj = self.gmove(dj, other, keep)
            keep -= 1
        else:
            dj = self.gmove(dj, other, keep + 1)
        return self.mk(sys, "cont", (keep,), (dj,))

    def dedupe(self, dj: tuple) -> tuple:
        while True:
            names = [h.name for h in dj[1].gctx]
            groups: dict[str, list[int]] = {}
            for i, n in enumerate(names):
                groups.setdefault(self.copy_of.get(n, n), []).append(i)
            dup = next((g for g in groups.values() if len(g) > 1), None)
            if dup is None:
                return dj
            keep = min(dup, key=lambda i: self.rank.get(names[i], 0))
            other = next(i for i in dup if i != keep)
            dj = self.merge(dj, keep, other)

    def issue(self, name: str) -> str:
        copies = self.occ.setdefault(name, [])
        if copies:
            copy = fresh_name(name, self.avoid)
        else:
            copy = name
        copies.append(copy)
        self.avoid.add(copy)
        self.copy_of[copy] = name
        self.rank[copy] = len(copies) - 1
        return copy

    def enter(self, names: tuple) -> dict:
        saved = {x: self.occ.get(x) for x in names}
        for x in names:
            self.occ[x] = []
        return saved

    def leave(self, saved: dict) -> None:
        for x, old in saved.items():
            if old is None:
                self.occ.pop(x, None)
            else:
                self.occ[x] = old

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self.avoid)
        self.avoid.add(name)
        return name

    # -- bound-variable bookkeeping ------------------------------------------

    def close_graded(self, dj: tuple, name: str, ty: GType) -> tuple:
        """Weaken ``name`` in at grade zero if the body never used it."""
        if any(h.name == name for h in dj[1].gctx):
            return dj
        sys = "GT" if isinstance(dj[1], GSJudgment) else "MT"
        return self.mk(sys, "weak", (len(dj[1].gctx), name, ty), (dj,))

    def equalize(self, dj: tuple, name_x: str, name_y: str) -> tuple:
        """Raise the lower-graded of two hypotheses so their grades agree."""
        sr = self.sr
        gctx = dj[1].gctx
        ix = next(i for i, h in enumerate(gctx) if h.name == name_x)
        iy = next(i for i, h in enumerate(gctx) if h.name == name_y)
        gx, gy = gctx[ix].grade, gctx[iy].grade
        if gx == gy:
            return dj
        target = gy if sr.leq(gx, gy) else gx
        grades = list(grades_of(gctx))
        grades[ix] = target
        grades[iy] = target
        sys = "GT" if isinstance(dj[1], GSJudgment) else "MT"
        rule = "sub" if sys == "GT" else "GSub"
        return self.mk(sys, rule, (tuple(grades),), (dj,))

    def to_end(self, dj: tuple, name_x: str, name_y: str) -> tuple:
        """Move graded ``name_x`` and ``name_y`` to the last two positions."""
        gctx = dj[1].gctx
        iy = next(i for i, h in enumerate(gctx) if h.name == name_y)
        dj = self.gmove(dj, iy, len(gctx) - 1)
        ix = next(i for i, h in enumerate(dj[1].gctx) if h.name == name_x)
        return self.gmove(dj, ix, len(gctx) - 2)

    # -- the two fragments ---------------------------------------------------

    def gt(self, t: Term, want, genv: dict) -> tuple:
        sr = self.sr
        if isinstance(t, Var):
            copy = self.issue(t.name)
            return self.mk("GT", "Id", (copy, genv[t.name]), ())
        if isinstance(t, UnitJ):
            return self.mk("GT", "unitJ_I", (), ())
        if isinstance(t, Pair):
            wl = want.left if isinstance(want, GTen) else None
            wr = want.right if isinstance(want, GTen) else None
            dj1 = self.gt(t.fst, wl, genv)
            dj2 = self.gt(t.snd, wr, genv)
            return self.dedupe(self.mk("GT", "><I", (), (dj1, dj2)))
        if isinstance(t, LetUnit) and t.kind == "J":
            djs = self.gt(t.scrut, JUnit(), genv)
            djb = self.gt(t.body, want, genv)
            djb = self.mk(
                "GT", "weak", (len(djb[1].gctx), self.fresh("u"), JUnit()), (djb,)
            )
            pos = len(djb[1].gctx) - 1
            return self.dedupe(self.mk("GT", "unitJ_E", (pos,), (djs, djb)))
        if isinstance(t, LetPair):
            ts, _ = _Infer(sr, genv, {}).gt(t.scrut, None)
            djs = self.gt(t.scrut, ts, genv)
            saved = self.enter((t.x, t.y))
            djb = self.gt(t.body, want, {**genv, t.x: ts.left, t.y: ts.right})
            djb = self.close_graded(djb, t.x, ts.left)
            djb = self.close_graded(djb, t.y, ts.right)
            djb = self.equalize(djb, t.x, t.y)
            djb = self.to_end(djb, t.x, t.y)
            self.leave(saved)
            pos = len(djb[1].gctx) - 2
            return self.dedupe(self.mk("GT", "><E", (pos,), (djs, djb)))
        if isinstance(t, LinTm):
            wi = want.inner if isinstance(want, LinTy) else None
            djb = self.mt(t.body, wi, genv, {})
            return self.mk("GT", "Lin_I", (), (djb,))
        raise AssertionError(f"unelaborable graded term {t!r}")

    def mt(self, t: Term, want, genv: dict, lenv: dict) -> tuple:
        sr = self.sr
        if isinstance(t, Var):
            return self.mk("MT", "Id", (t.name, lenv[t.name]), ())
        if isinstance(t, UnitI):
            return self.mk("MT", "unitI_I", (), ())
        if isinstance(t, Pair):
            wl = want.left if isinstance(want, LTen) else None
            wr = want.right if isinstance(want, LTen) else None
            dj1 = self.mt(t.fst, wl, genv, lenv)
            dj2 = self.mt(t.snd, wr, genv, lenv)
            return self.dedupe(self.mk("MT", "*I", (), (dj1, dj2)))
        if isinstance(t, LetUnit) and t.kind == "I":
            djs = self.mt(t.scrut, IUnit(), genv, lenv)
            djb = self.mt(t.body, want, genv, lenv)
            pos = len(djb[1].lctx)
            return self.dedupe(self.mk("MT", "unitI_E", (pos,), (djs, djb)))
        if isinstance(t, LetUnit) and t.kind == "J":
            djs = self.gt(t.scrut, JUnit(), genv)
            djb = self.mt(t.body, want, genv, lenv)
            djb = self.mk(
                "MT", "weak", (len(djb[1].gctx), self.fresh("u"), JUnit()), (djb,)
            )
            pos = len(djb[1].gctx) - 1
            return self.dedupe(self.mk("MT", "unitJ_E-MS", (pos,), (djs, djb)))
        if isinstance(t, LetPair):
            scrut, graded = _Infer(sr, genv, lenv)._scrut(t.scrut)
            if graded:
                ts = scrut[0]
                djs = self.gt(t.scrut, ts, genv)
                saved = self.enter((t.x, t.y))
                djb = self.mt(
                    t.body, want, {**genv, t.x: ts.left, t.y: ts.right}, lenv
                )
                djb = self.close_graded(djb, t.x, ts.left)
                djb = self.close_graded(djb, t.y, ts.right)
                djb = self.equalize(djb, t.x, t.y)
                djb = self.to_end(djb, t.x, t.y)
                self.leave(saved)
                pos = len(djb[1].gctx) - 2
                return self.dedupe(self.mk("MT", "><E-MS", (pos,), (djs, djb)))
            ts = scrut[0]
            djs = self.mt(t.scrut, ts, genv, lenv)
            djb = self.mt(
                t.body, want, genv, {**lenv, t.x: ts.left, t.y: ts.right}
            )
            lnames = [h.name for h in djb[1].lctx]
            djb = self.lmove(djb, lnames.index(t.y), len(lnames) - 1)
            lnames = [h.name for h in djb[1].lctx]
            djb = self.lmove(djb, lnames.index(t.x), len(lnames) - 2)
            pos = len(djb[1].lctx) - 2
            return self.dedupe(self.mk("MT", "*E", (pos,), (djs, djb)))
        if isinstance(t, LetGrd):
            ts, _, _ = _Infer(sr, genv, lenv).mt(t.scrut, None)
            djs = self.mt(t.scrut, ts, genv, lenv)
            saved = self.enter((t.x,))
            djb = self.mt(t.body, want, {**genv, t.x: ts.inner}, lenv)
            djb = self.close_graded(djb, t.x, ts.inner)
            if self.strict:
                gctx = djb[1].gctx
                ix = next(i for i, h in enumerate(gctx) if h.name == t.x)
                if gctx[ix].grade != t.grade:
                    grades = list(grades_of(gctx))
                    grades[ix] = t.grade
                    djb = self.mk("MT", "GSub", (tuple(grades),), (djb,))
            gctx = djb[1].gctx
            ix = next(i for i, h in enumerate(gctx) if h.name == t.x)
            djb = self.gmove(djb, ix, len(gctx) - 1)
            self.leave(saved)
            pos = len(djb[1].gctx) - 1
            return self.dedupe(self.mk("MT", "Grd_E", (pos,), (djs, djb)))
        if isinstance(t, Lam):
            dom = t.ann
            if isinstance(want, Lolli):
                dom = want.left
            wb = want.right if isinstance(want, Lolli) else None
            djb = self.mt(t.body, wb, genv, {**lenv, t.x: dom})
            lnames = [h.name for h in djb[1].lctx]
            djb = self.lmove(djb, lnames.index(t.x), len(lnames) - 1)
            return self.mk("MT", "-oI", (), (djb,))
        if isinstance(t, App):
            tf, _, _ = _Infer(sr, genv, lenv).mt(t.fn, None)
            djf = self.mt(t.fn, tf, genv, lenv)
            dja = self.mt(t.arg, tf.left, genv, lenv)
            return self.dedupe(self.mk("MT", "-oE", (), (djf, dja)))
        if isinstance(t, GrdTm):
            wi = want.inner if isinstance(want, GrdTy) else None
            djb = self.gt(t.body, wi, genv)
            return self.mk("MT", "Grd_I", (t.grade,), (djb,))
        if isinstance(t, Unlin):
            wb = LinTy(want) if want is not None else None
            djb = self.gt(t.body, wb, genv)
            return self.mk("MT", "Lin_E", (), (djb,))
        raise AssertionError(f"unelaborable mixed term {t!r}")


def elaborate_nd(sr: Semiring, goal, strict_grd: bool = False) -> NDDeriv:
    """Build a derivation concluding exactly the goal judgment.

    The goal's term is elaborated bottom-up; unused hypotheses are weakened
    in at grade zero and a final grade raise matches the declared grades (so
    the declared grades must sit above the inferred usage).  Raises ElabError
    when the term does not type or the grades are unreachable.
    """
    usage, lin = infer_usage(sr, goal)
    if isinstance(goal, MSJudgment):
        declared = [h.name for h in goal.lctx]
        unused = [x for x in declared if x not in lin]
        if unused:
            raise ElabError(f"linear hypothesis {unused[0]} is never used")
    for h in goal.gctx:
        if not sr.leq(usage[h.name], h.grade):
            raise ElabError(
                f"hypothesis {h.name} is used at {sr.show(usage[h.name])}, which "
                f"does not sit below its declared grade {sr.show(h.grade)}"
            )

    avoid: set[str] = set(hyp_names(goal))
    _term_names(goal.term, avoid)
    elab = _Elab(sr, strict_grd, avoid)
    genv = {h.name: h.ty for h in goal.gctx}
    if isinstance(goal, GSJudgment):
        d, j = elab.gt(goal.term, goal.ty, genv)
        sys = "GT"
    else:
        lenv = {h.name: h.ty for h in goal.lctx}
        d, j = elab.mt(goal.term, goal.ty, genv, lenv)
        sys = "MT"

    dj = (d, j)
    for h in goal.gctx:
        if not any(g.name == h.name for g in dj[1].gctx):
            dj = elab.mk(sys, "weak", (len(dj[1].gctx), h.name, h.ty), (dj,))
    for i, h in enumerate(goal.gctx):
        k = next(k for k, g in enumerate(dj[1].gctx) if g.name == h.name)
        dj = elab.gmove(dj, k, i)
    if grades_of(dj[1].gctx) != grades_of(goal.gctx):
        rule = "sub" if sys == "GT" else "GSub"
        dj = elab.mk(sys, rule, (grades_of(goal.gctx),), (dj,))
    if isinstance(goal, MSJudgment):
        for i, h in enumerate(goal.lctx):
            k = next(k for k, g in enumerate(dj[1].lctx) if g.name == h.name)
            dj = elab.lmove(dj, k, i)

    d, j = dj
    if not (same_sequent(j, goal) and alpha_eq(j.term, goal.term)):
        raise AssertionError(
            "elaboration invariant violation: rebuilt judgment does not match the goal"
        )
    return d

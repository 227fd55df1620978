"""Abstract syntax: types, proof terms, contexts, and judgments.

There are two type universes (graded types and linear types) bridged by the
``Lin``/``Grd[r]`` modalities, and a single unified term language shared by
the sequent-calculus and natural-deduction checkers.  Which typing rule a
term form witnesses (e.g. a ``let (x,y) = z in l`` over a graded versus a
linear pair) is resolved by the checker from the type of the scrutinee, not
by the term constructor.

Terms are immutable; substitution is capture-avoiding and simultaneous
(``subst_map``), with ``subst``/``multi_subst`` as the common special cases.
Alpha-equivalence ignores lambda binder annotations, which are optional
surface syntax.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .semiring import Grade, GradeVec, Semiring

# ------------------------------------------------------------------- types


@dataclass(frozen=True)
class GAtom:
    name: str


@dataclass(frozen=True)
class JUnit:
    pass


@dataclass(frozen=True)
class GTen:
    left: "GType"
    right: "GType"


@dataclass(frozen=True)
class LinTy:
    inner: "LType"


@dataclass(frozen=True)
class LAtom:
    name: str


@dataclass(frozen=True)
class IUnit:
    pass


@dataclass(frozen=True)
class LTen:
    left: "LType"
    right: "LType"


@dataclass(frozen=True)
class Lolli:
    left: "LType"
    right: "LType"


@dataclass(frozen=True)
class GrdTy:
    grade: Grade
    inner: "GType"


GType = Union[GAtom, JUnit, GTen, LinTy]
LType = Union[LAtom, IUnit, LTen, Lolli, GrdTy]


def is_gtype(ty) -> bool:
    return isinstance(ty, (GAtom, JUnit, GTen, LinTy))


def is_ltype(ty) -> bool:
    return isinstance(ty, (LAtom, IUnit, LTen, Lolli, GrdTy))


# ------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class UnitJ:
    pass


@dataclass(frozen=True)
class UnitI:
    pass


@dataclass(frozen=True)
class Pair:
    fst: "Term"
    snd: "Term"


@dataclass(frozen=True)
class LetUnit:
    kind: str  # "J" or "I": which unit the scrutinee eliminates
    scrut: "Term"
    body: "Term"


@dataclass(frozen=True)
class LetPair:
    x: str
    y: str
    scrut: "Term"
    body: "Term"


@dataclass(frozen=True)
class LinTm:
    body: "Term"


@dataclass(frozen=True)
class Lam:
    x: str
    ann: Optional[LType]
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class GrdTm:
    grade: Grade
    body: "Term"


@dataclass(frozen=True)
class LetGrd:
    grade: Grade
    x: str
    scrut: "Term"
    body: "Term"


@dataclass(frozen=True)
class Unlin:
    body: "Term"


Term = Union[
    Var, UnitJ, UnitI, Pair, LetUnit, LetPair, LinTm, Lam, App, GrdTm, LetGrd, Unlin
]


# ------------------------------------------------------- names and binding


def fresh_name(base: str, avoid) -> str:
    """Return ``base`` if unused, else the first ``base<k>`` not in avoid."""
    if base not in avoid:
        return base
    k = 1
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, (UnitJ, UnitI)):
        return frozenset()
    if isinstance(t, Pair):
        return free_vars(t.fst) | free_vars(t.snd)
    if isinstance(t, LetUnit):
        return free_vars(t.scrut) | free_vars(t.body)
    if isinstance(t, LetPair):
        return free_vars(t.scrut) | (free_vars(t.body) - {t.x, t.y})
    if isinstance(t, LinTm):
        return free_vars(t.body)
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.x}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    if isinstance(t, GrdTm):
        return free_vars(t.body)
    if isinstance(t, LetGrd):
        return free_vars(t.scrut) | (free_vars(t.body) - {t.x})
    if isinstance(t, Unlin):
        return free_vars(t.body)
    raise TypeError(f"not a term: {t!r}")


def _rebind(bound: str, body: Term, m: dict) -> tuple:
    """Prepare substitution of ``m`` under a binder ``bound``.

    Returns (new_bound, new_body, m') where ``m'`` is ``m`` restricted to
    names actually free in the body, and the binder has been renamed if it
    would capture a free variable of an incoming replacement.
    """
    fv_body = free_vars(body)
    m2 = {k: v for k, v in m.items() if k != bound and k in fv_body}
    if not m2:
        return bound, body, m2
    incoming = frozenset().union(*(free_vars(v) for v in m2.values()))
    if bound in incoming:
        avoid = incoming | fv_body | set(m2)
        nb = fresh_name(bound, avoid)
        body = subst_map(body, {bound: Var(nb)})
        return nb, body, m2
    return bound, body, m2


def subst_map(t: Term, m: dict) -> Term:
    """Simultaneous capture-avoiding substitution of terms for free names."""
    if not m:
        return t
    if isinstance(t, Var):
        return m.get(t.name, t)
    if isinstance(t, (UnitJ, UnitI)):
        return t
    if isinstance(t, Pair):
        return Pair(subst_map(t.fst, m), subst_map(t.snd, m))
    if isinstance(t, LetUnit):
        return LetUnit(t.kind, subst_map(t.scrut, m), subst_map(t.body, m))
    if isinstance(t, LetPair):
        scrut = subst_map(t.scrut, m)
        fv_body = free_vars(t.body)
        m2 = {k: v for k, v in m.items() if k not in (t.x, t.y) and k in fv_body}
        if not m2:
            return LetPair(t.x, t.y, scrut, t.body)
        incoming = frozenset().union(*(free_vars(v) for v in m2.values()))
        x, y, body = t.x, t.y, t.body
        if x in incoming or y in incoming:
            avoid = incoming | fv_body | set(m2) | {x, y}
            nx = fresh_name(x, avoid) if x in incoming else x
            ny = fresh_name(y, avoid | {nx}) if y in incoming else y
            ren = {}
            if nx != x:
                ren[x] = Var(nx)
            if ny != y:
                ren[y] = Var(ny)
            body = subst_map(body, ren)
            x, y = nx, ny
        return LetPair(x, y, scrut, subst_map(body, m2))
    if isinstance(t, LinTm):
        return LinTm(subst_map(t.body, m))
    if isinstance(t, Lam):
        x, body, m2 = _rebind(t.x, t.body, m)
        return Lam(x, t.ann, subst_map(body, m2))
    if isinstance(t, App):
        return App(subst_map(t.fn, m), subst_map(t.arg, m))
    if isinstance(t, GrdTm):
        return GrdTm(t.grade, subst_map(t.body, m))
    if isinstance(t, LetGrd):
        scrut = subst_map(t.scrut, m)
        x, body, m2 = _rebind(t.x, t.body, m)
        return LetGrd(t.grade, x, scrut, subst_map(body, m2))
    if isinstance(t, Unlin):
        return Unlin(subst_map(t.body, m))
    raise TypeError(f"not a term: {t!r}")


def subst(t: Term, name: str, arg: Term) -> Term:
    return subst_map(t, {name: arg})


def multi_subst(t: Term, names, arg: Term) -> Term:
    return subst_map(t, {n: arg for n in names})


def rename_term(t: Term, mapping: dict) -> Term:
    """Simultaneous renaming of free variables (a substitution by variables)."""
    return subst_map(t, {k: Var(v) for k, v in mapping.items() if k != v})


def alpha_eq(a: Term, b: Term) -> bool:
    """Structural equality up to bound names; Lam annotations are ignored."""
    return _alpha(a, b, {}, {}, [0])


def _alpha(a, b, ma, mb, counter) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        ia, ib = ma.get(a.name), mb.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia is not None and ia == ib
    if isinstance(a, (UnitJ, UnitI)):
        return True
    if isinstance(a, Pair):
        return _alpha(a.fst, b.fst, ma, mb, counter) and _alpha(a.snd, b.snd, ma, mb, counter)
    if isinstance(a, LetUnit):
        return (
            a.kind == b.kind
            and _alpha(a.scrut, b.scrut, ma, mb, counter)
            and _alpha(a.body, b.body, ma, mb, counter)
        )
    if isinstance(a, LetPair):
        if not _alpha(a.scrut, b.scrut, ma, mb, counter):
            return False
        i, j = counter[0], counter[0] + 1
        counter[0] += 2
        return _alpha(
            a.body, b.body, {**ma, a.x: i, a.y: j}, {**mb, b.x: i, b.y: j}, counter
        )
    if isinstance(a, LinTm):
        return _alpha(a.body, b.body, ma, mb, counter)
    if isinstance(a, Lam):
        i = counter[0]
        counter[0] += 1
        return _alpha(a.body, b.body, {**ma, a.x: i}, {**mb, b.x: i}, counter)
    if isinstance(a, App):
        return _alpha(a.fn, b.fn, ma, mb, counter) and _alpha(a.arg, b.arg, ma, mb, counter)
    if isinstance(a, GrdTm):
        return a.grade == b.grade and _alpha(a.body, b.body, ma, mb, counter)
    if isinstance(a, LetGrd):
        if a.grade != b.grade or not _alpha(a.scrut, b.scrut, ma, mb, counter):
            return False
        i = counter[0]
        counter[0] += 1
        return _alpha(a.body, b.body, {**ma, a.x: i}, {**mb, b.x: i}, counter)
    if isinstance(a, Unlin):
        return _alpha(a.body, b.body, ma, mb, counter)
    raise TypeError(f"not a term: {a!r}")


# ----------------------------------------------------- contexts & judgments


@dataclass(frozen=True)
class GH:
    """A graded hypothesis: name at a grade, of a graded type."""

    name: str
    grade: Grade
    ty: GType


@dataclass(frozen=True)
class LH:
    """A linear hypothesis."""

    name: str
    ty: LType


GCtx = tuple
LCtx = tuple


@dataclass(frozen=True)
class GSJudgment:
    """A graded sequent: gctx |- term : ty (ty is a graded type)."""

    gctx: GCtx
    term: Term
    ty: GType


@dataclass(frozen=True)
class MSJudgment:
    """A mixed sequent: gctx ; lctx |- term : ty (ty is a linear type)."""

    gctx: GCtx
    lctx: LCtx
    term: Term
    ty: LType


Judgment = Union[GSJudgment, MSJudgment]


def grades_of(gctx: GCtx) -> GradeVec:
    return tuple(h.grade for h in gctx)


def hyp_names(j: Judgment) -> list:
    names = [h.name for h in j.gctx]
    if isinstance(j, MSJudgment):
        names += [h.name for h in j.lctx]
    return names


def same_sequent(a: Judgment, b: Judgment) -> bool:
    """Contexts and concluded type coincide exactly; the term is ignored."""
    if type(a) is not type(b) or a.gctx != b.gctx or a.ty != b.ty:
        return False
    if isinstance(a, MSJudgment) and a.lctx != b.lctx:
        return False
    return True


def judgment_alpha_eq(a: Judgment, b: Judgment) -> bool:
    return same_sequent(a, b) and alpha_eq(a.term, b.term)


# ------------------------------------------------------------------ display


def show_gtype(sr: Semiring, ty: GType, prec: int = 0) -> str:
    if isinstance(ty, GAtom):
        return ty.name
    if isinstance(ty, JUnit):
        return "J"
    if isinstance(ty, GTen):
        s = f"{show_gtype(sr, ty.left, 1)} >< {show_gtype(sr, ty.right, 2)}"
        return f"({s})" if prec >= 2 else s
    if isinstance(ty, LinTy):
        return f"Lin({show_ltype(sr, ty.inner)})"
    raise TypeError(f"not a graded type: {ty!r}")


def show_ltype(sr: Semiring, ty: LType, prec: int = 0) -> str:
    if isinstance(ty, LAtom):
        return ty.name
    if isinstance(ty, IUnit):
        return "I"
    if isinstance(ty, LTen):
        s = f"{show_ltype(sr, ty.left, 2)} * {show_ltype(sr, ty.right, 3)}"
        return f"({s})" if prec >= 3 else s
    if isinstance(ty, Lolli):
        s = f"{show_ltype(sr, ty.left, 2)} -o {show_ltype(sr, ty.right, 1)}"
        return f"({s})" if prec >= 2 else s
    if isinstance(ty, GrdTy):
        return f"Grd[{sr.show(ty.grade)}]({show_gtype(sr, ty.inner)})"
    raise TypeError(f"not a linear type: {ty!r}")


def show_type(sr: Semiring, ty) -> str:
    return show_gtype(sr, ty) if is_gtype(ty) else show_ltype(sr, ty)


_ATOM, _APP, _LOW = 2, 1, 0


def show_term(sr: Semiring, t: Term, prec: int = _LOW) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, UnitJ):
        return "unitJ"
    if isinstance(t, UnitI):
        return "unitI"
    if isinstance(t, Pair):
        return f"({show_term(sr, t.fst)},{show_term(sr, t.snd)})"
    if isinstance(t, App):
        s = f"{show_term(sr, t.fn, _APP)} {show_term(sr, t.arg, _ATOM)}"
        return f"({s})" if prec > _APP else s
    if isinstance(t, LinTm):
        s = f"Lin {show_term(sr, t.body, _ATOM)}"
        return f"({s})" if prec > _APP else s
    if isinstance(t, Unlin):
        s = f"Unlin {show_term(sr, t.body, _ATOM)}"
        return f"({s})" if prec > _APP else s
    if isinstance(t, GrdTm):
        s = f"Grd[{sr.show(t.grade)}] {show_term(sr, t.body, _ATOM)}"
        return f"({s})" if prec > _APP else s
    if isinstance(t, Lam):
        ann = f" : {show_ltype(sr, t.ann)}" if t.ann is not None else ""
        s = f"\\{t.x}{ann} . {show_term(sr, t.body)}"
        return f"({s})" if prec > _LOW else s
    if isinstance(t, LetUnit):
        s = f"let unit{t.kind} = {show_term(sr, t.scrut, _APP)} in {show_term(sr, t.body)}"
        return f"({s})" if prec > _LOW else s
    if isinstance(t, LetPair):
        s = (
            f"let ({t.x},{t.y}) = {show_term(sr, t.scrut, _APP)}"
            f" in {show_term(sr, t.body)}"
        )
        return f"({s})" if prec > _LOW else s
    if isinstance(t, LetGrd):
        s = (
            f"let Grd[{sr.show(t.grade)}] {t.x} = {show_term(sr, t.scrut, _APP)}"
            f" in {show_term(sr, t.body)}"
        )
        return f"({s})" if prec > _LOW else s
    raise TypeError(f"not a term: {t!r}")


def show_judgment(sr: Semiring, j: Judgment) -> str:
    gpart = " , ".join(
        f"{h.name} @ {sr.show(h.grade)} : {show_gtype(sr, h.ty)}" for h in j.gctx
    )
    if isinstance(j, GSJudgment):
        head = f"GS: {gpart}" if gpart else "GS:"
        return f"{head} |- {show_term(sr, j.term)} : {show_gtype(sr, j.ty)}"
    lpart = " , ".join(f"{h.name} : {show_ltype(sr, h.ty)}" for h in j.lctx)
    head = f"MS: {gpart}" if gpart else "MS:"
    head += f" ; {lpart}" if lpart else " ;"
    return f"{head} |- {show_term(sr, j.term)} : {show_ltype(sr, j.ty)}"

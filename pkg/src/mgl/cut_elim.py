"""Cut elimination for sequent-calculus derivations.

The driver repeatedly picks a cut whose subderivations are already cut-free
(topmost; highest-ranked formula first) and reduces it to a cut-free
derivation of the same sequent.  Proof terms are rewritten along the way:
principal reductions perform the matching beta step and commuting reductions
produce the commuted let/application forms.

Internally a graded cut is generalized from a contiguous block to a set of
context positions, which makes exchange steps transport positions instead of
splitting the cut.  Every recursive reduction strictly decreases the measure
(rank of the cut formula, depth of provider + depth of host) in lexicographic
order; a violation raises KernelError, as does any failure to reproduce the
expected sequent.  Both indicate an internal error, never bad input.
"""
from __future__ import annotations

import sys
import threading

from .sc_checker import CUT_RULES, CheckError, SCDeriv, SC_RULES, check_sc, collect_names
from .semiring import Semiring, boxast
from .syntax import (
    GAtom,
    GH,
    GrdTy,
    GSJudgment,
    GTen,
    IUnit,
    JUnit,
    LAtom,
    LinTy,
    Lolli,
    LTen,
    MSJudgment,
    fresh_name,
    grades_of,
    same_sequent,
    show_term,
    show_type,
)
from .sc_checker import _conclude  # the single source of rule semantics


class KernelError(Exception):
    """An internal invariant of the normalizer failed."""


def formula_rank(ty) -> int:
    """Nesting depth of connectives; atoms and units rank zero."""
    if isinstance(ty, (GAtom, JUnit, LAtom, IUnit)):
        return 0
    if isinstance(ty, (GTen, LTen, Lolli)):
        return 1 + max(formula_rank(ty.left), formula_rank(ty.right))
    if isinstance(ty, LinTy):
        return 1 + formula_rank(ty.inner)
    if isinstance(ty, GrdTy):
        return 1 + formula_rank(ty.inner)
    raise TypeError(f"not a type: {ty!r}")


def deriv_depth(d: SCDeriv) -> int:
    """Height of the derivation; axioms have depth zero."""
    memo: dict[int, int] = {}
    stack: list[tuple[SCDeriv, bool]] = [(d, False)]
    while stack:
        node, ready = stack.pop()
        if id(node) in memo:
            continue
        if ready:
            memo[id(node)] = 1 + max(
                (memo[id(c)] for c in node.children), default=-1
            )
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in node.children)
    return memo[id(d)]


def _judgments(sr: Semiring, d: SCDeriv) -> dict[int, object]:
    """Conclusion judgment of every node, keyed by node identity."""
    memo: dict[int, object] = {}
    stack: list[tuple[SCDeriv, bool]] = [(d, False)]
    while stack:
        node, ready = stack.pop()
        if id(node) in memo:
            continue
        if ready:
            memo[id(node)] = _conclude(
                node, (), [memo[id(c)] for c in node.children], sr
            )
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in node.children)
    return memo


def cut_rank(sr: Semiring, d: SCDeriv) -> int:
    """Zero when cut-free, else one plus the largest cut-formula rank."""
    js = _judgments(sr, d)
    best = -1
    seen: set[int] = set()
    stack = [d]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.rule in CUT_RULES:
            best = max(best, formula_rank(js[id(node.children[0])].ty))
        stack.extend(node.children)
    return best + 1


def _subformulas(ty, out: set) -> None:
    out.add(ty)
    if isinstance(ty, (GTen, LTen, Lolli)):
        _subformulas(ty.left, out)
        _subformulas(ty.right, out)
    elif isinstance(ty, (LinTy, GrdTy)):
        _subformulas(ty.inner, out)


def check_subformula(sr: Semiring, d: SCDeriv) -> bool:
    """Every premise type is a subformula of some conclusion type.

    Holds for cut-free derivations; a cut's provider formula is exactly the
    type that breaks it.
    """
    js = _judgments(sr, d)

    def types_of(j) -> list:
        out = [h.ty for h in j.gctx] + [j.ty]
        if isinstance(j, MSJudgment):
            out.extend(h.ty for h in j.lctx)
        return out

    seen: set[int] = set()
    stack = [d]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        closure: set = set()
        for ty in types_of(js[id(node)]):
            _subformulas(ty, closure)
        for c in node.children:
            if any(ty not in closure for ty in types_of(js[id(c)])):
                return False
            stack.append(c)
    return True


def rename_sc(d: SCDeriv, mapping: dict[str, str]) -> SCDeriv:
    """Rename hypothesis/binder names (name-kind params) throughout."""
    if not mapping:
        return d
    memo: dict[int, SCDeriv] = {}

    def go(node: SCDeriv) -> SCDeriv:
        if id(node) in memo:
            return memo[id(node)]
        sig = SC_RULES[node.rule]
        params = tuple(
            mapping.get(v, v) if kind == "name" else v
            for kind, v in zip(sig.params, node.params)
        )
        out = SCDeriv(node.rule, params, tuple(go(c) for c in node.children))
        memo[id(node)] = out
        return out

    return go(d)


def _lex_less(a: tuple, b: tuple) -> bool:
    return a[0] < b[0] or (a[0] == b[0] and a[1] < b[1])


_GS_RIGHT = {JUnit: "unitJ_R", GTen: "><R", LinTy: "Lin_R"}
_MS_RIGHT = {IUnit: "unitI_R", LTen: "*R", Lolli: "-oR", GrdTy: "Grd_R"}

# provider-side left/structural rules re-applied on the host form
_GS_TO_MS = {
    "unitJ_L": "unitJ_L-MS",
    "><L": "><L-MS",
    "weak_GS": "weak_MS",
    "cont_GS": "cont_MS",
    "ex_GS": "gex_MS",
    "sub_GS": "sub_MS",
}


class _Reducer:
    def __init__(self, sr: Semiring, avoid: set[str]):
        self.sr = sr
        self.used = set(avoid)
        # memo values keep the node alive so its id() cannot be recycled
        self.jmemo: dict[int, tuple[SCDeriv, object]] = {}
        self.dmemo: dict[int, tuple[SCDeriv, int]] = {}

    # -- plumbing --------------------------------------------------------------

    def j(self, d: SCDeriv):
        got = self.jmemo.get(id(d))
        if got is None or got[0] is not d:
            try:
                self.jmemo[id(d)] = (d, check_sc(d, self.sr))
            except CheckError as e:
                raise KernelError(f"rebuilt derivation is ill-formed: {e}") from e
        return self.jmemo[id(d)][1]

    def depth(self, d: SCDeriv) -> int:
        got = self.dmemo.get(id(d))
        if got is None or got[0] is not d:
            self.dmemo[id(d)] = (d, deriv_depth(d))
        return self.dmemo[id(d)][1]

    def mk(self, rule: str, params: tuple, *children: SCDeriv) -> SCDeriv:
        node = SCDeriv(rule, params, children)
        try:
            self.jmemo[id(node)] = (
                node,
                _conclude(node, (), [self.j(c) for c in children], self.sr),
            )
        except KernelError:
            raise
        except Exception as e:
            raise KernelError(f"rebuilt step is ill-formed: {e}") from e
        return node

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self.used)
        self.used.add(name)
        return name

    def freshen(self, d: SCDeriv, names, avoid: set[str]) -> SCDeriv:
        """Rename the listed names inside ``d`` when they clash with avoid."""
        mapping = {}
        for n in names:
            if n in avoid:
                mapping[n] = self.fresh(n)
        return rename_sc(d, mapping)

    def rename_copy(self, d: SCDeriv) -> tuple[SCDeriv, dict[str, str]]:
        mapping = {n: self.fresh(n) for n in sorted(collect_names(d))}
        return rename_sc(d, mapping), mapping

    # -- context surgery -------------------------------------------------------

    def gnames(self, d: SCDeriv) -> list[str]:
        return [h.name for h in self.j(d).gctx]

    def lnames(self, d: SCDeriv) -> list[str]:
        return [h.name for h in self.j(d).lctx]

    def gswap(self, d: SCDeriv, i: int, ms: bool) -> SCDeriv:
        return self.mk("gex_MS" if ms else "ex_GS", (i,), d)

    def gmove(self, d: SCDeriv, frm: int, to: int, ms: bool) -> SCDeriv:
        while frm < to:
            d = self.gswap(d, frm, ms)
            frm += 1
        while frm > to:
            d = self.gswap(d, frm - 1, ms)
            frm -= 1
        return d

    def lmove(self, d: SCDeriv, frm: int, to: int) -> SCDeriv:
        while frm < to:
            d = self.mk("ex_MS", (frm,), d)
            frm += 1
        while frm > to:
            d = self.mk("ex_MS", (frm - 1,), d)
            frm -= 1
        return d

    def merge_pair(self, d: SCDeriv, keep: str, other: str, ms: bool) -> SCDeriv:
        """Contract two graded hypotheses, keeping ``keep``'s name."""
        names = self.gnames(d)
        i, k = names.index(keep), names.index(other)
        if k < i:
            d = self.gmove(d, k, i, ms)
            i -= 1
        else:
            d = self.gmove(d, k, i + 1, ms)
        return self.mk("cont_MS" if ms else "cont_GS", (i,), d)

    def settle(self, d: SCDeriv, target, case: str) -> tuple[SCDeriv, str]:
        """Reorder contexts by name to match the target and verify it."""
        ms = isinstance(target, MSJudgment)
        want = [h.name for h in target.gctx]
        have = self.gnames(d)
        if sorted(want) != sorted(have):
            raise KernelError(
                f"context mismatch after {case}: have {have}, want {want}"
            )
        for i, name in enumerate(want):
            k = self.gnames(d).index(name)
            if k != i:
                d = self.gmove(d, k, i, ms)
        if ms:
            lwant = [h.name for h in target.lctx]
            lhave = self.lnames(d)
            if sorted(lwant) != sorted(lhave):
                raise KernelError(
                    f"linear context mismatch after {case}: have {lhave}, want {lwant}"
                )
            for i, name in enumerate(lwant):
                k = self.lnames(d).index(name)
                if k != i:
                    d = self.lmove(d, k, i)
        if not same_sequent(self.j(d), target):
            raise KernelError(f"sequent not preserved by {case}")
        return d, case

    # -- targets ---------------------------------------------------------------

    def graded_target(self, JP, JH, S: tuple, pos0: int, ms: bool):
        sr = self.sr
        delta = tuple(JH.gctx[s].grade for s in S)
        region_grades = boxast(sr, delta, grades_of(JP.gctx), len(S))
        region = tuple(
            GH(h.name, g, h.ty) for h, g in zip(JP.gctx, region_grades)
        )
        out: list = []
        for i in range(len(JH.gctx) + 1):
            if i == pos0:
                out.extend(region)
            if i < len(JH.gctx) and i not in S:
                out.append(JH.gctx[i])
        gctx = tuple(out)
        if ms:
            return MSJudgment(gctx, JH.lctx, JH.term, JH.ty)
        return GSJudgment(gctx, JH.term, JH.ty)

    def linear_target(self, JP, JH, pos: int):
        return MSJudgment(
            JH.gctx + JP.gctx,
            JH.lctx[:pos] + JP.lctx + JH.lctx[pos + 1 :],
            JH.term,
            JH.ty,
        )

    # -- graded cuts -------------------------------------------------------------

    def reduce_graded(
        self, P: SCDeriv, H: SCDeriv, S: tuple, pos0: int, ms: bool, bound
    ) -> tuple[SCDeriv, str]:
        JP, JH = self.j(P), self.j(H)
        measure = (formula_rank(JP.ty), self.depth(P) + self.depth(H))
        if bound is not None and not _lex_less(measure, bound):
            raise KernelError(
                f"measure did not decrease: {measure} under {bound}"
            )
        target = self.graded_target(JP, JH, S, pos0, ms)

        # 1. no occurrences: weaken the provider's context in
        if not S:
            d = H
            weak = "weak_MS" if ms else "weak_GS"
            for i, h in enumerate(JP.gctx):
                d = self.mk(weak, (pos0 + i, h.name, h.ty), d)
            return self.settle(d, target, "weaken")

        # 2. the host is an axiom on the cut hypothesis
        if H.rule == "id_GS":
            return self.settle(P, target, "axiom-host")

        # 3. the provider is an axiom
        if P.rule == "id_GS":
            return self.axiom_provider_graded(P, H, S, target, ms)

        # 4. the provider ends with a left/structural rule: commute it out
        if P.rule in _GS_TO_MS:
            return self.provider_commute_graded(P, H, S, pos0, ms, measure, target)

        # 5-7. dispatch on the host's last rule
        return self.host_dispatch_graded(P, H, S, pos0, ms, measure, target)

    def axiom_provider_graded(self, P, H, S, target, ms):
        a = self.j(P).gctx[0].name
        if a in collect_names(H):
            H = rename_sc(H, {a: self.fresh(a)})
        names = [self.j(H).gctx[s].name for s in S]
        d = H
        for name in names[1:]:
            d = self.merge_pair(d, names[0], name, ms)
        if names[0] != a:
            d = rename_sc(d, {names[0]: a})
            self.j(d)
        return self.settle(d, target, "axiom-provider")

    def provider_commute_graded(self, P, H, S, pos0, ms, measure, target):
        sr = self.sr
        rule = P.rule
        name_on_host = _GS_TO_MS[rule] if ms else rule
        P1 = P.children[0]
        JP1 = self.j(P1)
        JH = self.j(H)
        avoid = set(h.name for h in JH.gctx) | set(
            h.name for h in (JH.lctx if ms else ())
        ) | set(collect_names(H))
        delta = tuple(JH.gctx[s].grade for s in S)

        if rule == "unitJ_L":
            q, name, r = P.params
            C, _ = self.reduce_graded(P1, H, S, pos0, ms, measure)
            scaled = boxast(sr, delta, (r,), len(S))[0]
            d = self.mk(name_on_host, (pos0 + q, name, scaled), C)
            return self.settle(d, target, "provider-commute")
        if rule == "><L":
            q, z = P.params
            x, y = JP1.gctx[q].name, JP1.gctx[q + 1].name
            P1 = self.freshen(P1, [x, y], avoid)
            C, _ = self.reduce_graded(P1, H, S, pos0, ms, measure)
            d = self.mk(name_on_host, (pos0 + q, z), C)
            return self.settle(d, target, "provider-commute")
        if rule == "weak_GS":
            q, name, ty = P.params
            C, _ = self.reduce_graded(P1, H, S, pos0, ms, measure)
            d = self.mk(name_on_host, (pos0 + q, name, ty), C)
            return self.settle(d, target, "provider-commute")
        if rule == "cont_GS":
            (q,) = P.params
            b = JP1.gctx[q + 1].name
            P1 = self.freshen(P1, [b], avoid)
            C, _ = self.reduce_graded(P1, H, S, pos0, ms, measure)
            d = self.mk(name_on_host, (pos0 + q,), C)
            return self.settle(d, target, "provider-commute")
        if rule == "ex_GS":
            (q,) = P.params
            C, _ = self.reduce_graded(P1, H, S, pos0, ms, measure)
            d = self.mk(name_on_host, (pos0 + q,), C)
            return self.settle(d, target, "provider-commute")
        if rule == "sub_GS":
            C, _ = self.reduce_graded(P1, H, S, pos0, ms, measure)
            d = self.mk(name_on_host, (grades_of(target.gctx),), C)
            return self.settle(d, target, "provider-commute")
        raise KernelError(f"unhandled provider rule {rule}")

    def host_dispatch_graded(self, P, H, S, pos0, ms, measure, target):
        sr = self.sr
        JP, JH = self.j(P), self.j(H)
        rule = H.rule
        Sset = set(S)
        pavoid = set(h.name for h in JP.gctx) | (
            set(h.name for h in JP.lctx) if isinstance(JP, MSJudgment) else set()
        )

        weak_rule = "weak_MS" if ms else "weak_GS"
        cont_rule = "cont_MS" if ms else "cont_GS"
        gex_rule = "gex_MS" if ms else "ex_GS"
        unitJ_rule = "unitJ_L-MS" if ms else "unitJ_L"
        pair_rule = "><L-MS" if ms else "><L"
        pairR_rule = "*R" if ms else "><R"
        sub_rule = "sub_MS" if ms else "sub_GS"

        if rule == weak_rule:
            q, name, ty = H.params
            H1 = H.children[0]
            if q in Sset:
                S1 = tuple(s if s < q else s - 1 for s in S if s != q)
                p1 = pos0 if pos0 <= q else pos0 - 1
                C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
                return self.settle(C, target, "block-weak")
            S1 = tuple(s if s < q else s - 1 for s in S)
            p1 = pos0 if pos0 <= q else pos0 - 1
            C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
            qq = q - len([s for s in S if s < q]) + (
                len(JP.gctx) if pos0 <= q else 0
            )
            d = self.mk(weak_rule, (qq, name, ty), C)
            return self.settle(d, target, "host-commute")

        if rule == cont_rule:
            (q,) = H.params
            H1 = H.children[0]
            if q in Sset:
                S1 = tuple(
                    sorted({s if s < q else s + 1 for s in S if s != q} | {q, q + 1})
                )
                p1 = pos0 if pos0 <= q else pos0 + 1
                C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
                return self.settle(C, target, "block-contract")
            b = self.j(H1).gctx[q + 1].name
            H1 = self.freshen(H1, [b], pavoid)
            S1 = tuple(s if s < q else s + 1 for s in S)
            p1 = pos0 if pos0 <= q else pos0 + 1
            C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
            a = self.j(H1).gctx[q].name
            qq = self.gnames(C).index(a)
            d = self.mk(cont_rule, (qq,), C)
            return self.settle(d, target, "host-commute")

        if rule == gex_rule:
            (q,) = H.params
            H1 = H.children[0]

            def swap(s: int) -> int:
                if s == q:
                    return q + 1
                if s == q + 1:
                    return q
                return s

            S1 = tuple(sorted(swap(s) for s in S))
            p1 = pos0 if pos0 not in (q, q + 1) else min(S1)
            C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
            if q in Sset and q + 1 in Sset:
                return self.settle(C, target, "block-exchange")
            return self.settle(C, target, "host-commute")

        if rule == sub_rule:
            H1 = H.children[0]
            C, _ = self.reduce_graded(P, H1, S, pos0, ms, measure)
            d = self.mk(sub_rule, (grades_of(target.gctx),), C)
            return self.settle(d, target, "block-subsume")

        if rule == unitJ_rule:
            q, name, r = H.params
            H1 = H.children[0]
            if q in Sset:  # principal J cut
                if P.rule != "unitJ_R":
                    raise KernelError(f"expected unitJ_R provider, got {P.rule}")
                S1 = tuple(s if s < q else s - 1 for s in S if s != q)
                p1 = pos0 if pos0 <= q else pos0 - 1
                C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
                return self.settle(C, target, "principal")
            S1 = tuple(s if s < q else s - 1 for s in S)
            p1 = pos0 if pos0 <= q else pos0 - 1
            C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
            qq = q - len([s for s in S if s < q]) + (
                len(JP.gctx) if pos0 <= q else 0
            )
            d = self.mk(unitJ_rule, (qq, name, r), C)
            return self.settle(d, target, "host-commute")

        if rule == pair_rule:
            q, z = H.params
            H1 = H.children[0]
            JH1 = self.j(H1)
            x, y = JH1.gctx[q].name, JH1.gctx[q + 1].name
            if q in Sset:  # principal tensor cut
                if P.rule != "><R":
                    raise KernelError(f"expected ><R provider, got {P.rule}")
                P1, P2 = P.children
                copies: dict[str, str] = {}
                H1 = self.freshen(H1, [x, y], pavoid)
                JH1 = self.j(H1)
                x, y = JH1.gctx[q].name, JH1.gctx[q + 1].name
                S_rest = tuple(s if s < q else s + 1 for s in S if s != q)
                C0 = H1
                if S_rest:
                    Pc, copies = self.rename_copy(P)
                    C0, _ = self.reduce_graded(
                        Pc, H1, S_rest, min(S_rest), ms, measure
                    )
                xi = self.gnames(C0).index(x)
                C1, _ = self.reduce_graded(P1, C0, (xi,), xi, ms, measure)
                yi = self.gnames(C1).index(y)
                C2, _ = self.reduce_graded(P2, C1, (yi,), yi, ms, measure)
                d = C2
                for orig in [h.name for h in JP.gctx]:
                    if orig in copies:
                        d = self.merge_pair(d, orig, copies[orig], ms)
                return self.settle(d, target, "principal")
            H1 = self.freshen(H1, [x, y], pavoid)
            JH1 = self.j(H1)
            x = JH1.gctx[q].name
            S1 = tuple(s if s < q else s + 1 for s in S)
            p1 = pos0 if pos0 <= q else pos0 + 1
            C, _ = self.reduce_graded(P, H1, S1, p1, ms, measure)
            qq = self.gnames(C).index(x)
            d = self.mk(pair_rule, (qq, z), C)
            return self.settle(d, target, "host-commute")

        if rule == pairR_rule:
            H1, H2 = H.children
            len1 = len(self.j(H1).gctx)
            S1 = tuple(s for s in S if s < len1)
            S2 = tuple(s - len1 for s in S if s >= len1)
            if S1 and S2:
                C1, _ = self.reduce_graded(P, H1, S1, min(S1), ms, measure)
                Pc, copies = self.rename_copy(P)
                C2, _ = self.reduce_graded(Pc, H2, S2, min(S2), ms, measure)
                d = self.mk(pairR_rule, (), C1, C2)
                for orig in [h.name for h in JP.gctx]:
                    d = self.merge_pair(d, orig, copies[orig], ms)
                return self.settle(d, target, "host-split")
            if S1:
                C1, _ = self.reduce_graded(P, H1, S1, min(S1), ms, measure)
                d = self.mk(pairR_rule, (), C1, H2)
            else:
                C2, _ = self.reduce_graded(P, H2, S2, min(S2), ms, measure)
                d = self.mk(pairR_rule, (), H1, C2)
            return self.settle(d, target, "host-commute")

        if not ms and rule == "Lin_R":
            C, _ = self.reduce_graded(P, H.children[0], S, pos0, True, measure)
            d = self.mk("Lin_R", (), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "Grd_R":
            (r,) = H.params
            C, _ = self.reduce_graded(P, H.children[0], S, pos0, False, measure)
            d = self.mk("Grd_R", (r,), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "Lin_L":
            (z,) = H.params
            H1 = H.children[0]
            zpos = len(JH.gctx) - 1
            w = self.j(H1).lctx[0].name
            H1 = self.freshen(H1, [w], pavoid)
            if zpos in Sset:  # principal Lin cut
                if P.rule != "Lin_R":
                    raise KernelError(f"expected Lin_R provider, got {P.rule}")
                PM = P.children[0]
                S_rest = tuple(s for s in S if s != zpos)
                copies: dict[str, str] = {}
                C0 = H1
                if S_rest:
                    Pc, copies = self.rename_copy(P)
                    C0, _ = self.reduce_graded(
                        Pc, H1, S_rest, min(S_rest), True, measure
                    )
                C, _ = self.reduce_linear(PM, C0, 0, measure)
                d = C
                for orig in [h.name for h in JP.gctx]:
                    if orig in copies:
                        d = self.merge_pair(d, orig, copies[orig], True)
                return self.settle(d, target, "principal")
            C, _ = self.reduce_graded(P, H1, S, pos0, True, measure)
            d = self.mk("Lin_L", (z,), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "Grd_L":
            (z,) = H.params
            H1 = H.children[0]
            x = self.j(H1).gctx[-1].name
            H1 = self.freshen(H1, [x], pavoid)
            x = self.j(H1).gctx[-1].name
            C, _ = self.reduce_graded(P, H1, S, pos0, True, measure)
            xi = self.gnames(C).index(x)
            C = self.gmove(C, xi, len(self.gnames(C)) - 1, True)
            d = self.mk("Grd_L", (z,), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "unitI_L":
            q, name = H.params
            C, _ = self.reduce_graded(P, H.children[0], S, pos0, True, measure)
            d = self.mk("unitI_L", (q, name), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "*L":
            q, z = H.params
            H1 = H.children[0]
            x, y = self.j(H1).lctx[q].name, self.j(H1).lctx[q + 1].name
            H1 = self.freshen(H1, [x, y], pavoid)
            C, _ = self.reduce_graded(P, H1, S, pos0, True, measure)
            d = self.mk("*L", (q, z), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "-oR":
            H1 = H.children[0]
            w = self.j(H1).lctx[-1].name
            H1 = self.freshen(H1, [w], pavoid)
            C, _ = self.reduce_graded(P, H1, S, pos0, True, measure)
            d = self.mk("-oR", (), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "ex_MS":
            (q,) = H.params
            C, _ = self.reduce_graded(P, H.children[0], S, pos0, True, measure)
            d = self.mk("ex_MS", (q,), C)
            return self.settle(d, target, "host-commute")

        if ms and rule == "-oL":
            q, z = H.params
            ARG, CONT = H.children
            la = len(self.j(ARG).gctx)
            S1 = tuple(s for s in S if s < la)
            S2 = tuple(s - la for s in S if s >= la)
            y = self.j(CONT).lctx[q].name
            CONT = self.freshen(CONT, [y], pavoid)
            copies: dict[str, str] = {}
            C1, C2 = ARG, CONT
            if S1 and S2:
                C1, _ = self.reduce_graded(P, ARG, S1, min(S1), True, measure)
                Pc, copies = self.rename_copy(P)
                C2, _ = self.reduce_graded(Pc, CONT, S2, min(S2), True, measure)
            elif S1:
                C1, _ = self.reduce_graded(P, ARG, S1, min(S1), True, measure)
            else:
                C2, _ = self.reduce_graded(P, CONT, S2, min(S2), True, measure)
            d = self.mk("-oL", (q, z), C1, C2)
            for orig in [h.name for h in JP.gctx]:
                if orig in copies:
                    d = self.merge_pair(d, orig, copies[orig], True)
            return self.settle(d, target, "host-split" if copies else "host-commute")

        raise KernelError(f"unhandled host rule {rule} for a graded cut")

    # -- linear cuts -------------------------------------------------------------

    def reduce_linear(self, P: SCDeriv, H: SCDeriv, pos: int, bound) -> tuple:
        sr = self.sr
        JP, JH = self.j(P), self.j(H)
        measure = (formula_rank(JP.ty), self.depth(P) + self.depth(H))
        if bound is not None and not _lex_less(measure, bound):
            raise KernelError(
                f"measure did not decrease: {measure} under {bound}"
            )
        target = self.linear_target(JP, JH, pos)

        if H.rule == "id_MS":
            return self.settle(P, target, "axiom-host")

        if P.rule == "id_MS":
            a = JP.lctx[0].name
            if a in collect_names(H):
                H = rename_sc(H, {a: self.fresh(a)})
            hname = self.j(H).lctx[pos].name
            d = H if hname == a else rename_sc(H, {hname: a})
            self.j(d)
            return self.settle(d, target, "axiom-provider")

        if P.rule not in ("unitI_R", "*R", "-oR", "Grd_R"):
            return self.provider_commute_linear(P, H, pos, measure, target)

        return self.host_dispatch_linear(P, H, pos, measure, target)

    def provider_commute_linear(self, P, H, pos, measure, target):
        rule = P.rule
        JH = self.j(H)
        pavoid = set(collect_names(H)) | set(h.name for h in JH.gctx) | set(
            h.name for h in JH.lctx
        )
        ng = len(JH.gctx)

        if rule == "unitI_L":
            q, name = P.params
            C, _ = self.reduce_linear(P.children[0], H, pos, measure)
            d = self.mk("unitI_L", (pos + q, name), C)
            return self.settle(d, target, "provider-commute")
        if rule == "*L":
            q, z = P.params
            P1 = P.children[0]
            x, y = self.j(P1).lctx[q].name, self.j(P1).lctx[q + 1].name
            P1 = self.freshen(P1, [x, y], pavoid)
            C, _ = self.reduce_linear(P1, H, pos, measure)
            d = self.mk("*L", (pos + q, z), C)
            return self.settle(d, target, "provider-commute")
        if rule == "-oL":
            q, z = P.params
            ARG, CONT = P.children
            y = self.j(CONT).lctx[q].name
            CONT = self.freshen(CONT, [y], pavoid)
            C, _ = self.reduce_linear(CONT, H, pos, measure)
            d = self.mk("-oL", (pos + q, z), ARG, C)
            return self.settle(d, target, "provider-commute")
        if rule == "unitJ_L-MS":
            q, name, r = P.params
            C, _ = self.reduce_linear(P.children[0], H, pos, measure)
            d = self.mk("unitJ_L-MS", (ng + q, name, r), C)
            return self.settle(d, target, "provider-commute")
        if rule == "><L-MS":
            q, z = P.params
            P1 = P.children[0]
            x, y = self.j(P1).gctx[q].name, self.j(P1).gctx[q + 1].name
            P1 = self.freshen(P1, [x, y], pavoid)
            C, _ = self.reduce_linear(P1, H, pos, measure)
            d = self.mk("><L-MS", (ng + q, z), C)
            return self.settle(d, target, "provider-commute")
        if rule == "Lin_L":
            (z,) = P.params
            P1 = P.children[0]
            w = self.j(P1).lctx[0].name
            P1 = self.freshen(P1, [w], pavoid)
            C, _ = self.reduce_linear(P1, H, pos, measure)
            C = self.lmove(C, pos, 0)
            d = self.mk("Lin_L", (z,), C)
            return self.settle(d, target, "provider-commute")
        if rule == "Grd_L":
            (z,) = P.params
            P1 = P.children[0]
            x = self.j(P1).gctx[-1].name
            P1 = self.freshen(P1, [x], pavoid)
            C, _ = self.reduce_linear(P1, H, pos, measure)
            d = self.mk("Grd_L", (z,), C)
            return self.settle(d, target, "provider-commute")
        if rule == "weak_MS":
            q, name, ty = P.params
            C, _ = self.reduce_linear(P.children[0], H, pos, measure)
            d = self.mk("weak_MS", (ng + q, name, ty), C)
            return self.settle(d, target, "provider-commute")
        if rule == "cont_MS":
            (q,) = P.params
            P1 = P.children[0]
            b = self.j(P1).gctx[q + 1].name
            P1 = self.freshen(P1, [b], pavoid)
            C, _ = self.reduce_linear(P1, H, pos, measure)
            d = self.mk("cont_MS", (ng + q,), C)
            return self.settle(d, target, "provider-commute")
        if rule == "ex_MS":
            (q,) = P.params
            C, _ = self.reduce_linear(P.children[0], H, pos, measure)
            d = self.mk("ex_MS", (pos + q,), C)
            return self.settle(d, target, "provider-commute")
        if rule == "gex_MS":
            (q,) = P.params
            C, _ = self.reduce_linear(P.children[0], H, pos, measure)
            d = self.mk("gex_MS", (ng + q,), C)
            return self.settle(d, target, "provider-commute")
        if rule == "sub_MS":
            C, _ = self.reduce_linear(P.children[0], H, pos, measure)
            d = self.mk("sub_MS", (grades_of(target.gctx),), C)
            return self.settle(d, target, "provider-commute")
        raise KernelError(f"unhandled provider rule {rule} for a linear cut")

    def host_dispatch_linear(self, P, H, pos, measure, target):
        JP, JH = self.j(P), self.j(H)
        rule = H.rule
        lp = len(JP.lctx)
        pavoid = set(h.name for h in JP.gctx) | set(h.name for h in JP.lctx)

        if rule == "unitI_L":
            q, name = H.params
            H1 = H.children[0]
            if q == pos:  # principal I cut
                if P.rule != "unitI_R":
                    raise KernelError(f"expected unitI_R provider, got {P.rule}")
                return self.settle(H1, target, "principal")
            p1 = pos if pos < q else pos - 1
            C, _ = self.reduce_linear(P, H1, p1, measure)
            qq = q if q < pos else q - 1 + lp
            d = self.mk("unitI_L", (qq, name), C)
            return self.settle(d, target, "host-commute")

        if rule == "*L":
            q, z = H.params
            H1 = H.children[0]
            x, y = self.j(H1).lctx[q].name, self.j(H1).lctx[q + 1].name
            H1 = self.freshen(H1, [x, y], pavoid)
            x, y = self.j(H1).lctx[q].name, self.j(H1).lctx[q + 1].name
            if q == pos:  # principal tensor cut
                if P.rule != "*R":
                    raise KernelError(f"expected *R provider, got {P.rule}")
                P1, P2 = P.children
                C1, _ = self.reduce_linear(P1, H1, q, measure)
                yi = self.lnames(C1).index(y)
                C2, _ = self.reduce_linear(P2, C1, yi, measure)
                return self.settle(C2, target, "principal")
            p1 = pos if pos < q else pos + 1
            C, _ = self.reduce_linear(P, H1, p1, measure)
            qq = self.lnames(C).index(x)
            d = self.mk("*L", (qq, z), C)
            return self.settle(d, target, "host-commute")

        if rule == "-oR":
            H1 = H.children[0]
            w = self.j(H1).lctx[-1].name
            H1 = self.freshen(H1, [w], pavoid)
            C, _ = self.reduce_linear(P, H1, pos, measure)
            d = self.mk("-oR", (), C)
            return self.settle(d, target, "host-commute")

        if rule == "-oL":
            q, z = H.params
            ARG, CONT = H.children
            la = len(self.j(ARG).lctx)
            if pos == q:  # principal implication cut
                if P.rule != "-oR":
                    raise KernelError(f"expected -oR provider, got {P.rule}")
                PM = P.children[0]
                w = self.j(PM).lctx[-1].name
                PM = self.freshen(
                    PM, [w], set(h.name for h in self.j(ARG).gctx)
                    | set(h.name for h in self.j(ARG).lctx)
                )
                C1, _ = self.reduce_linear(
                    ARG, PM, len(self.j(PM).lctx) - 1, measure
                )
                C2, _ = self.reduce_linear(C1, CONT, q, measure)
                return self.settle(C2, target, "principal")
            if q < pos <= q + la:  # inside the argument's region
                C, _ = self.reduce_linear(P, ARG, pos - q - 1, measure)
                d = self.mk("-oL", (q, z), C, CONT)
                return self.settle(d, target, "host-commute")
            p1 = pos if pos < q else pos - la
            y = self.j(CONT).lctx[q].name
            C, _ = self.reduce_linear(P, CONT, p1, measure)
            qq = self.lnames(C).index(y)
            d = self.mk("-oL", (qq, z), ARG, C)
            return self.settle(d, target, "host-commute")

        if rule == "Lin_L":
            (z,) = H.params
            H1 = H.children[0]
            w = self.j(H1).lctx[0].name
            H1 = self.freshen(H1, [w], pavoid)
            C, _ = self.reduce_linear(P, H1, pos + 1, measure)
            d = self.mk("Lin_L", (z,), C)
            return self.settle(d, target, "host-commute")

        if rule == "Grd_L":
            (z,) = H.params
            H1 = H.children[0]
            if pos == 0:  # principal graded-modality cut
                if P.rule != "Grd_R":
                    raise KernelError(f"expected Grd_R provider, got {P.rule}")
                PG = P.children[0]
                xi = len(self.j(H1).gctx) - 1
                C, _ = self.reduce_graded(PG, H1, (xi,), xi, True, measure)
                return self.settle(C, target, "principal")
            x = self.j(H1).gctx[-1].name
            H1 = self.freshen(H1, [x], pavoid)
            x = self.j(H1).gctx[-1].name
            C, _ = self.reduce_linear(P, H1, pos - 1, measure)
            xi = self.gnames(C).index(x)
            C = self.gmove(C, xi, len(self.gnames(C)) - 1, True)
            d = self.mk("Grd_L", (z,), C)
            return self.settle(d, target, "host-commute")

        if rule == "*R":
            H1, H2 = H.children
            l1 = len(self.j(H1).lctx)
            if pos < l1:
                C, _ = self.reduce_linear(P, H1, pos, measure)
                d = self.mk("*R", (), C, H2)
            else:
                C, _ = self.reduce_linear(P, H2, pos - l1, measure)
                d = self.mk("*R", (), H1, C)
            return self.settle(d, target, "host-commute")

        if rule == "unitJ_L-MS":
            q, name, r = H.params
            C, _ = self.reduce_linear(P, H.children[0], pos, measure)
            d = self.mk("unitJ_L-MS", (q, name, r), C)
            return self.settle(d, target, "host-commute")

        if rule == "><L-MS":
            q, z = H.params
            H1 = H.children[0]
            x, y = self.j(H1).gctx[q].name, self.j(H1).gctx[q + 1].name
            H1 = self.freshen(H1, [x, y], pavoid)
            C, _ = self.reduce_linear(P, H1, pos, measure)
            d = self.mk("><L-MS", (q, z), C)
            return self.settle(d, target, "host-commute")

        if rule == "weak_MS":
            q, name, ty = H.params
            C, _ = self.reduce_linear(P, H.children[0], pos, measure)
            d = self.mk("weak_MS", (q, name, ty), C)
            return self.settle(d, target, "host-commute")

        if rule == "cont_MS":
            (q,) = H.params
            H1 = H.children[0]
            b = self.j(H1).gctx[q + 1].name
            H1 = self.freshen(H1, [b], pavoid)
            C, _ = self.reduce_linear(P, H1, pos, measure)
            d = self.mk("cont_MS", (q,), C)
            return self.settle(d, target, "host-commute")

        if rule == "gex_MS":
            (q,) = H.params
            C, _ = self.reduce_linear(P, H.children[0], pos, measure)
            d = self.mk("gex_MS", (q,), C)
            return self.settle(d, target, "host-commute")

        if rule == "ex_MS":
            (q,) = H.params
            H1 = H.children[0]
            if pos == q:
                C, _ = self.reduce_linear(P, H1, q + 1, measure)
                return self.settle(C, target, "host-commute")
            if pos == q + 1:
                C, _ = self.reduce_linear(P, H1, q, measure)
                return self.settle(C, target, "host-commute")
            C, _ = self.reduce_linear(P, H1, pos, measure)
            qq = q if q + 1 < pos else q - 1 + lp
            d = self.mk("ex_MS", (qq,), C)
            return self.settle(d, target, "host-commute")

        if rule == "sub_MS":
            C, _ = self.reduce_linear(P, H.children[0], pos, measure)
            d = self.mk("sub_MS", (grades_of(target.gctx),), C)
            return self.settle(d, target, "host-commute")

        raise KernelError(f"unhandled host rule {rule} for a linear cut")


def _rebuild_at(d: SCDeriv, path: tuple, new: SCDeriv) -> SCDeriv:
    if not path:
        return new
    children = list(d.children)
    children[path[0]] = _rebuild_at(children[path[0]], path[1:], new)
    return SCDeriv(d.rule, d.params, tuple(children))


def _ready_cuts(d: SCDeriv) -> list[tuple[tuple, SCDeriv]]:
    """Cut nodes whose subderivations are cut-free, in preorder."""
    out: list[tuple[tuple, SCDeriv]] = []

    def go(node: SCDeriv, path: tuple) -> bool:
        clean = True
        for i, c in enumerate(node.children):
            clean &= go(c, path + (i,))
        if node.rule in CUT_RULES:
            if clean:
                out.append((path, node))
            return False
        return clean

    go(d, ())
    return out


def _normalize_entry(node: SCDeriv, reducer: _Reducer) -> tuple[SCDeriv, str]:
    P, H = node.children
    if node.rule == "mcut":
        pos, n = node.params
        return reducer.reduce_graded(P, H, tuple(range(pos, pos + n)), pos, False, None)
    if node.rule == "gmcut":
        pos, n = node.params
        return reducer.reduce_graded(P, H, tuple(range(pos, pos + n)), pos, True, None)
    if node.rule == "cut_GS":
        (pos,) = node.params
        return reducer.reduce_graded(P, H, (pos,), pos, False, None)
    if node.rule == "gcut_MS":
        (pos,) = node.params
        return reducer.reduce_graded(P, H, (pos,), pos, True, None)
    if node.rule == "cut_MS":
        (pos,) = node.params
        return reducer.reduce_linear(P, H, pos, None)
    raise KernelError(f"not a cut: {node.rule}")


def _eliminate(sr: Semiring, d: SCDeriv, want_trace: bool):
    check_sc(d, sr)
    trace: list[dict] = []
    reducer = _Reducer(sr, collect_names(d))
    while True:
        ready = _ready_cuts(d)
        if not ready:
            break
        js = _judgments(sr, d)
        path, node = max(
            ready, key=lambda pn: formula_rank(js[id(pn[1].children[0])].ty)
        )
        rank_before = cut_rank(sr, d)
        depth_before = deriv_depth(d)
        reduced, case = _normalize_entry(node, reducer)
        d2 = _rebuild_at(d, path, reduced)
        rank_after = cut_rank(sr, d2)
        if rank_after > rank_before:
            raise KernelError(
                f"cut rank increased from {rank_before} to {rank_after}"
            )
        if want_trace:
            trace.append(
                {
                    "path": list(path),
                    "rule": node.rule,
                    "case": case,
                    "formula": show_type(sr, js[id(node.children[0])].ty),
                    "cut_rank_before": rank_before,
                    "cut_rank_after": rank_after,
                    "depth_before": depth_before,
                    "depth_after": deriv_depth(d2),
                    "term_before": show_term(sr, js[id(node)].term),
                    "term_after": show_term(sr, reducer.j(reduced).term),
                }
            )
        d = d2
    return d, trace


def call_deep(fn, *args):
    """Run ``fn`` on a worker thread with a large stack."""
    result: list = []
    error: list = []

    def run():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(1_000_000)
        try:
            result.append(fn(*args))
        except BaseException as e:  # re-raised on the caller's thread
            error.append(e)
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size(512 * 1024 * 1024)
    try:
        t = threading.Thread(target=run)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
    if error:
        raise error[0]
    return result[0]


def eliminate_cuts(sr: Semiring, d: SCDeriv, trace: bool = False):
    """Normalize to a cut-free derivation of the same sequent.

    Returns (derivation, trace).  The trace lists one step per eliminated
    cut: its path, the reduction case that fired at the root, and the
    whole-derivation cut rank and depth around the step.
    """
    return call_deep(_eliminate, sr, d, trace)

"""Translation between the sequent and tree (natural-deduction) systems.

Both directions preserve the conclusion judgment exactly and the proof term
up to renaming of bound variables.  Left rules become eliminators cutting
against an identity scrutinee; eliminators conversely become cuts against
the matching left rule, with exchange chains repairing context order.

Sequent cuts have no tree counterpart, so they are compiled away by an
admissible substitution (`gsubst`/`lsubst` below) that walks the host
derivation down to the point where the cut hypothesis is introduced and
splices the provider derivation in there.  A contraction above the cut
duplicates the provider (under fresh names, merged back afterwards); a
weakening absorbs it.  Every intermediate step is re-checked, and each
node's conclusion is verified against the independently computed target,
so a translation bug surfaces as KernelError rather than a wrong proof.

One direction is partial: a sequent proof may introduce a discarded unit
hypothesis directly at grade r, while the tree systems can only weaken it
in at grade 0 and then re-grade it upward.  Whenever 0 <= r fails (exact
naturals with r /= 0, the three-point semiring with r = 1, the security
lattice with a low r) the step has no counterpart and TranslationError is
raised.
"""
from __future__ import annotations

from .cut_elim import KernelError, call_deep, rename_sc
from .nd_checker import ND_RULES, NDDeriv, _nd_conclude, check_nd, collect_nd_names
from .sc_checker import CheckError, SCDeriv, check_sc, collect_names, _conclude
from .semiring import Semiring
from .syntax import (
    GH,
    GSJudgment,
    GTen,
    GrdTy,
    IUnit,
    JUnit,
    LTen,
    LinTy,
    Lolli,
    MSJudgment,
    alpha_eq,
    fresh_name,
    grades_of,
    hyp_names,
    same_sequent,
    subst,
)


class TranslationError(ValueError):
    """A proof step with no counterpart in the target system."""


def rename_nd(d: NDDeriv, mapping: dict[str, str]) -> NDDeriv:
    """Rename hypothesis/binder names (name-kind params) throughout."""
    if not mapping:
        return d
    memo: dict[int, NDDeriv] = {}

    def go(node: NDDeriv) -> NDDeriv:
        if id(node) in memo:
            return memo[id(node)]
        sig = ND_RULES[(node.system, node.rule)]
        params = tuple(
            mapping.get(v, v) if kind == "name" else v
            for kind, v in zip(sig.params, node.params)
        )
        out = NDDeriv(node.system, node.rule, params, tuple(go(c) for c in node.children))
        memo[id(node)] = out
        return out

    return go(d)


_SC_TO_ND_DIRECT = {
    "id_GS": ("GT", "Id"),
    "unitJ_R": ("GT", "unitJ_I"),
    "><R": ("GT", "><I"),
    "Lin_R": ("GT", "Lin_I"),
    "weak_GS": ("GT", "weak"),
    "cont_GS": ("GT", "cont"),
    "ex_GS": ("GT", "ex"),
    "sub_GS": ("GT", "sub"),
    "id_MS": ("MT", "Id"),
    "sub_MS": ("MT", "GSub"),
    "unitI_R": ("MT", "unitI_I"),
    "*R": ("MT", "*I"),
    "-oR": ("MT", "-oI"),
    "Grd_R": ("MT", "Grd_I"),
    "weak_MS": ("MT", "weak"),
    "cont_MS": ("MT", "cont"),
    "ex_MS": ("MT", "ex"),
    "gex_MS": ("MT", "gex"),
}

_ND_TO_SC_DIRECT = {
    ("GT", "Id"): "id_GS",
    ("GT", "unitJ_I"): "unitJ_R",
    ("GT", "><I"): "><R",
    ("GT", "Lin_I"): "Lin_R",
    ("GT", "weak"): "weak_GS",
    ("GT", "cont"): "cont_GS",
    ("GT", "ex"): "ex_GS",
    ("GT", "sub"): "sub_GS",
    ("MT", "Id"): "id_MS",
    ("MT", "GSub"): "sub_MS",
    ("MT", "unitI_I"): "unitI_R",
    ("MT", "*I"): "*R",
    ("MT", "-oI"): "-oR",
    ("MT", "Grd_I"): "Grd_R",
    ("MT", "weak"): "weak_MS",
    ("MT", "cont"): "cont_MS",
    ("MT", "ex"): "ex_MS",
    ("MT", "gex"): "gex_MS",
}


class _Xlate:
    def __init__(self, sr: Semiring, used: set[str]):
        self.sr = sr
        self.used = set(used)
        # memo values keep the node alive so its id() cannot be recycled
        self.njmemo: dict[int, tuple[NDDeriv, object]] = {}
        self.sjmemo: dict[int, tuple[SCDeriv, object]] = {}
        self.done: dict[int, tuple[object, object]] = {}

    # -- plumbing ----------------------------------------------------------------

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self.used)
        self.used.add(name)
        return name

    def nj(self, d: NDDeriv):
        got = self.njmemo.get(id(d))
        if got is None or got[0] is not d:
            j = _nd_conclude(d, (), [self.nj(c) for c in d.children], self.sr, False)
            self.njmemo[id(d)] = (d, j)
            got = self.njmemo[id(d)]
        return got[1]

    def sj(self, d: SCDeriv):
        got = self.sjmemo.get(id(d))
        if got is None or got[0] is not d:
            j = _conclude(d, (), [self.sj(c) for c in d.children], self.sr)
            self.sjmemo[id(d)] = (d, j)
            got = self.sjmemo[id(d)]
        return got[1]

    def mk_nd(self, system: str, rule: str, params: tuple, *children: NDDeriv) -> NDDeriv:
        node = NDDeriv(system, rule, params, children)
        try:
            j = _nd_conclude(node, (), [self.nj(c) for c in children], self.sr, False)
        except CheckError as e:
            raise KernelError(f"translated step is ill-formed: {e}") from e
        self.njmemo[id(node)] = (node, j)
        return node

    def mk_sc(self, rule: str, params: tuple, *children: SCDeriv) -> SCDeriv:
        node = SCDeriv(rule, params, children)
        try:
            j = _conclude(node, (), [self.sj(c) for c in children], self.sr)
        except CheckError as e:
            raise KernelError(f"translated step is ill-formed: {e}") from e
        self.sjmemo[id(node)] = (node, j)
        return node

    # -- context surgery, tree side ------------------------------------------------

    def nd_gnames(self, d: NDDeriv) -> list[str]:
        return [h.name for h in self.nj(d).gctx]

    def nd_lnames(self, d: NDDeriv) -> list[str]:
        return [h.name for h in self.nj(d).lctx]

    def nd_gswap(self, d: NDDeriv, i: int) -> NDDeriv:
        if isinstance(self.nj(d), GSJudgment):
            return self.mk_nd("GT", "ex", (i,), d)
        return self.mk_nd("MT", "gex", (i,), d)

    def nd_gmove(self, d: NDDeriv, frm: int, to: int) -> NDDeriv:
        while frm < to:
            d = self.nd_gswap(d, frm)
            frm += 1
        while frm > to:
            d = self.nd_gswap(d, frm - 1)
            frm -= 1
        return d

    def nd_lmove(self, d: NDDeriv, frm: int, to: int) -> NDDeriv:
        while frm < to:
            d = self.mk_nd("MT", "ex", (frm,), d)
            frm += 1
        while frm > to:
            d = self.mk_nd("MT", "ex", (frm - 1,), d)
            frm -= 1
        return d

    def nd_merge(self, d: NDDeriv, keep: str, other: str) -> NDDeriv:
        """Contract two graded hypotheses, keeping ``keep``'s name."""
        names = self.nd_gnames(d)
        i, k = names.index(keep), names.index(other)
        if k < i:
            d = self.nd_gmove(d, k, i)
            i -= 1
        else:
            d = self.nd_gmove(d, k, i + 1)
        system = "GT" if isinstance(self.nj(d), GSJudgment) else "MT"
        return self.mk_nd(system, "cont", (i,), d)

    def settle_nd(self, d: NDDeriv, target, what: str) -> NDDeriv:
        """Reorder contexts by name to match the target and verify it."""
        want = [h.name for h in target.gctx]
        have = self.nd_gnames(d)
        if sorted(want) != sorted(have):
            raise KernelError(f"context mismatch after {what}: have {have}, want {want}")
        for i, name in enumerate(want):
            k = self.nd_gnames(d).index(name)
            if k != i:
                d = self.nd_gmove(d, k, i)
        if isinstance(target, MSJudgment):
            lwant = [h.name for h in target.lctx]
            lhave = self.nd_lnames(d)
            if sorted(lwant) != sorted(lhave):
                raise KernelError(
                    f"linear context mismatch after {what}: have {lhave}, want {lwant}"
                )
            for i, name in enumerate(lwant):
                k = self.nd_lnames(d).index(name)
                if k != i:
                    d = self.nd_lmove(d, k, i)
        if not same_sequent(self.nj(d), target):
            raise KernelError(f"sequent not preserved by {what}")
        return d

    # -- context surgery, sequent side ----------------------------------------------

    def sc_gnames(self, d: SCDeriv) -> list[str]:
        return [h.name for h in self.sj(d).gctx]

    def sc_lnames(self, d: SCDeriv) -> list[str]:
        return [h.name for h in self.sj(d).lctx]

    def sc_gmove(self, d: SCDeriv, frm: int, to: int) -> SCDeriv:
        ms = isinstance(self.sj(d), MSJudgment)
        swap = "gex_MS" if ms else "ex_GS"
        while frm < to:
            d = self.mk_sc(swap, (frm,), d)
            frm += 1
        while frm > to:
            d = self.mk_sc(swap, (frm - 1,), d)
            frm -= 1
        return d

    def sc_lmove(self, d: SCDeriv, frm: int, to: int) -> SCDeriv:
        while frm < to:
            d = self.mk_sc("ex_MS", (frm,), d)
            frm += 1
        while frm > to:
            d = self.mk_sc("ex_MS", (frm - 1,), d)
            frm -= 1
        return d

    def settle_sc(self, d: SCDeriv, target, what: str) -> SCDeriv:
        want = [h.name for h in target.gctx]
        have = self.sc_gnames(d)
        if sorted(want) != sorted(have):
            raise KernelError(f"context mismatch after {what}: have {have}, want {want}")
        for i, name in enumerate(want):
            k = self.sc_gnames(d).index(name)
            if k != i:
                d = self.sc_gmove(d, k, i)
        if isinstance(target, MSJudgment):
            lwant = [h.name for h in target.lctx]
            lhave = self.sc_lnames(d)
            if sorted(lwant) != sorted(lhave):
                raise KernelError(
                    f"linear context mismatch after {what}: have {lhave}, want {lwant}"
                )
            for i, name in enumerate(lwant):
                k = self.sc_lnames(d).index(name)
                if k != i:
                    d = self.sc_lmove(d, k, i)
        if not same_sequent(self.sj(d), target):
            raise KernelError(f"sequent not preserved by {what}")
        return d

    # -- admissible substitution (cut compilation) -----------------------------------

    def peel(self, H: NDDeriv, ci: int, avoid: set[str]) -> NDDeriv:
        """Child ``ci`` with premise-only names renamed off the avoid set."""
        child = H.children[ci]
        revealed = set(hyp_names(self.nj(child))) - set(hyp_names(self.nj(H)))
        mapping = {n: self.fresh(n) for n in sorted(revealed) if n in avoid}
        if not mapping:
            return child
        out = rename_nd(child, mapping)
        self.nj(out)
        return out

    def copy_nd(self, d: NDDeriv) -> tuple[NDDeriv, dict[str, str]]:
        mapping = {n: self.fresh(n) for n in sorted(collect_nd_names(d))}
        out = rename_nd(d, mapping)
        self.nj(out)
        return out, mapping

    def gsubst(self, P: NDDeriv, H: NDDeriv, pos: int) -> NDDeriv:
        """Substitute a graded-sequent derivation for ``H``'s hypothesis at ``pos``.

        The result derives H's judgment with the hypothesis replaced by P's
        context scaled by the hypothesis grade, and the hypothesis name
        replaced by P's term in the proof term.
        """
        sr = self.sr
        JP, JH = self.nj(P), self.nj(H)
        hyp = JH.gctx[pos]
        region = tuple(GH(h.name, sr.mul(hyp.grade, h.grade), h.ty) for h in JP.gctx)
        gctx = JH.gctx[:pos] + region + JH.gctx[pos + 1 :]
        term = subst(JH.term, hyp.name, JP.term)
        if isinstance(JH, MSJudgment):
            target = MSJudgment(gctx, JH.lctx, term, JH.ty)
        else:
            target = GSJudgment(gctx, term, JH.ty)
        out = self._gsubst_step(P, JP, H, JH, hyp.name, pos, target)
        return self.settle_nd(out, target, f"substitution into {H.rule}")

    def _gsubst_step(self, P, JP, H, JH, a, pos, target):
        system, rule = H.system, H.rule
        pnames = set(hyp_names(JP))

        if rule == "Id" and system == "GT":
            return P

        if rule == "weak" and H.params[1] == a:
            out = H.children[0]
            for i, h in enumerate(JP.gctx):
                out = self.mk_nd(system, "weak", (pos + i, h.name, h.ty), out)
            return out

        if rule == "cont":
            (q,) = H.params
            if self.nj(H.children[0]).gctx[q].name == a:
                # the hypothesis was contracted from two occurrences: substitute
                # a fresh copy of the provider for each, then merge the copies
                child = self.peel(H, 0, pnames)
                P2, mapping = self.copy_nd(P)
                out = self.gsubst(P2, child, q + 1)
                out = self.gsubst(P, out, self.nd_gnames(out).index(a))
                for h in JP.gctx:
                    out = self.nd_merge(out, h.name, mapping[h.name])
                return out

        # find the premise owning the hypothesis and push the substitution there
        ci = next(
            i
            for i, c in enumerate(H.children)
            if any(h.name == a for h in self.nj(c).gctx)
        )
        child = self.peel(H, ci, pnames)
        jcp = self.nj(child)
        rec = self.gsubst(P, child, [h.name for h in jcp.gctx].index(a))

        if rule in ("ex", "gex"):
            return rec
        if rule == "weak":
            _, n, ty = H.params
            return self.mk_nd(system, "weak", (len(self.nj(rec).gctx), n, ty), rec)
        if rule == "cont":
            (q,) = H.params
            return self.nd_merge(rec, jcp.gctx[q].name, jcp.gctx[q + 1].name)
        if rule in ("sub", "GSub"):
            tg = {h.name: h.grade for h in target.gctx}
            grades = tuple(tg[h.name] for h in self.nj(rec).gctx)
            return self.mk_nd(system, rule, (grades,), rec)
        if rule in ("unitJ_E", "Grd_E", "unitJ_E-MS"):
            (q,) = H.params
            body = rec if ci == 1 else H.children[1]
            anchor = (jcp if ci == 1 else self.nj(body)).gctx[q].name
            scrut = rec if ci == 0 else H.children[0]
            qq = [h.name for h in self.nj(body).gctx].index(anchor)
            return self.mk_nd(system, rule, (qq,), scrut, body)
        if rule in ("><E", "><E-MS"):
            (q,) = H.params
            body = rec if ci == 1 else H.children[1]
            anchor = (jcp if ci == 1 else self.nj(body)).gctx[q].name
            scrut = rec if ci == 0 else H.children[0]
            qq = [h.name for h in self.nj(body).gctx].index(anchor)
            return self.mk_nd(system, rule, (qq,), scrut, body)
        kids = list(H.children)
        kids[ci] = rec
        return self.mk_nd(system, rule, H.params, *kids)

    def lsubst(self, P: NDDeriv, H: NDDeriv, pos: int) -> NDDeriv:
        """Substitute an MT derivation for ``H``'s linear hypothesis at ``pos``."""
        JP, JH = self.nj(P), self.nj(H)
        hyp = JH.lctx[pos]
        target = MSJudgment(
            JH.gctx + JP.gctx,
            JH.lctx[:pos] + JP.lctx + JH.lctx[pos + 1 :],
            subst(JH.term, hyp.name, JP.term),
            JH.ty,
        )
        out = self._lsubst_step(P, JP, H, JH, hyp.name, pos, target)
        return self.settle_nd(out, target, f"substitution into {H.rule}")

    def _lsubst_step(self, P, JP, H, JH, a, pos, target):
        rule = H.rule
        pnames = set(hyp_names(JP))

        if rule == "Id":
            return P

        if rule in ("unitI_E", "*E", "-oE", "*I", "Grd_E"):
            ci = next(
                i
                for i, c in enumerate(H.children)
                if any(h.name == a for h in self.nj(c).lctx)
            )
        elif rule in ("unitJ_E-MS", "><E-MS"):
            ci = 1
        else:
            ci = 0
        child = self.peel(H, ci, pnames)
        jcp = self.nj(child)
        rec = self.lsubst(P, child, [h.name for h in jcp.lctx].index(a))

        if rule in ("ex", "gex"):
            return rec
        if rule == "weak":
            _, n, ty = H.params
            return self.mk_nd("MT", "weak", (len(self.nj(rec).gctx), n, ty), rec)
        if rule == "cont":
            (q,) = H.params
            return self.nd_merge(rec, jcp.gctx[q].name, jcp.gctx[q + 1].name)
        if rule == "GSub":
            tg = {h.name: h.grade for h in target.gctx}
            grades = tuple(tg[h.name] for h in self.nj(rec).gctx)
            return self.mk_nd("MT", "GSub", (grades,), rec)
        if rule == "unitI_E":
            body = rec if ci == 1 else H.children[1]
            scrut = rec if ci == 0 else H.children[0]
            return self.mk_nd("MT", "unitI_E", (len(self.nj(body).lctx),), scrut, body)
        if rule == "*E":
            (q,) = H.params
            body = rec if ci == 1 else H.children[1]
            anchor = (jcp if ci == 1 else self.nj(body)).lctx[q].name
            scrut = rec if ci == 0 else H.children[0]
            qq = [h.name for h in self.nj(body).lctx].index(anchor)
            return self.mk_nd("MT", "*E", (qq,), scrut, body)
        if rule in ("Grd_E", "unitJ_E-MS", "><E-MS"):
            (q,) = H.params
            body = rec if ci == 1 else H.children[1]
            anchor = (jcp if ci == 1 else self.nj(body)).gctx[q].name
            scrut = rec if ci == 0 else H.children[0]
            qq = [h.name for h in self.nj(body).gctx].index(anchor)
            return self.mk_nd("MT", rule, (qq,), scrut, body)
        kids = list(H.children)
        kids[ci] = rec
        return self.mk_nd("MT", rule, H.params, *kids)

    # -- sequent to tree ---------------------------------------------------------------

    def sc_node(self, d: SCDeriv) -> NDDeriv:
        got = self.done.get(id(d))
        if got is not None and got[0] is d:
            return got[1]
        out = self._sc_node(d)
        out = self.settle_nd(out, self.sj(d), d.rule)
        self.done[id(d)] = (d, out)
        return out

    def _sc_node(self, d: SCDeriv) -> NDDeriv:
        sr = self.sr
        rule = d.rule

        direct = _SC_TO_ND_DIRECT.get(rule)
        if direct is not None:
            system, nd_rule = direct
            kids = tuple(self.sc_node(c) for c in d.children)
            return self.mk_nd(system, nd_rule, d.params, *kids)

        if rule in ("unitJ_L", "unitJ_L-MS"):
            pos, y, r = d.params
            body = self.sc_node(d.children[0])
            ms = isinstance(self.nj(body), MSJudgment)
            system = "MT" if ms else "GT"
            if r != sr.zero and not sr.leq(sr.zero, r):
                raise TranslationError(
                    f"unit hypothesis {y!r} carries grade {sr.show(r)}, which is not "
                    f"reachable from 0 in semiring {sr.id}; the step has no tree-system "
                    "counterpart"
                )
            w = self.fresh("w")
            out = self.mk_nd(system, "weak", (pos, w, JUnit()), body)
            if r != sr.zero:
                grades = list(grades_of(self.nj(out).gctx))
                grades[pos] = r
                out = self.mk_nd(
                    system, "GSub" if ms else "sub", (tuple(grades),), out
                )
            scrut = self.mk_nd("GT", "Id", (y, JUnit()))
            return self.mk_nd(
                system, "unitJ_E-MS" if ms else "unitJ_E", (pos,), scrut, out
            )

        if rule in ("><L", "><L-MS"):
            pos, z = d.params
            body = self.sc_node(d.children[0])
            jb = self.nj(body)
            h1, h2 = jb.gctx[pos], jb.gctx[pos + 1]
            scrut = self.mk_nd("GT", "Id", (z, GTen(h1.ty, h2.ty)))
            ms = isinstance(jb, MSJudgment)
            return self.mk_nd(
                "MT" if ms else "GT", "><E-MS" if ms else "><E", (pos,), scrut, body
            )

        if rule == "unitI_L":
            pos, z = d.params
            body = self.sc_node(d.children[0])
            scrut = self.mk_nd("MT", "Id", (z, IUnit()))
            return self.mk_nd("MT", "unitI_E", (pos,), scrut, body)

        if rule == "*L":
            pos, z = d.params
            body = self.sc_node(d.children[0])
            jb = self.nj(body)
            h1, h2 = jb.lctx[pos], jb.lctx[pos + 1]
            scrut = self.mk_nd("MT", "Id", (z, LTen(h1.ty, h2.ty)))
            return self.mk_nd("MT", "*E", (pos,), scrut, body)

        if rule == "Lin_L":
            (z,) = d.params
            body = self.sc_node(d.children[0])
            w = self.nj(body).lctx[0]
            scrut = self.mk_nd("GT", "Id", (z, LinTy(w.ty)))
            e = self.mk_nd("MT", "Lin_E", (), scrut)
            return self.lsubst(e, body, 0)

        if rule == "Grd_L":
            (z,) = d.params
            body = self.sc_node(d.children[0])
            jb = self.nj(body)
            h = jb.gctx[-1]
            scrut = self.mk_nd("MT", "Id", (z, GrdTy(h.grade, h.ty)))
            return self.mk_nd("MT", "Grd_E", (len(jb.gctx) - 1,), scrut, body)

        if rule == "-oL":
            pos, z = d.params
            arg = self.sc_node(d.children[0])
            cont = self.sc_node(d.children[1])
            h = self.nj(cont).lctx[pos]
            fn = self.mk_nd("MT", "Id", (z, Lolli(self.nj(arg).ty, h.ty)))
            e = self.mk_nd("MT", "-oE", (), fn, arg)
            return self.lsubst(e, cont, pos)

        if rule in ("cut_GS", "gcut_MS"):
            (pos,) = d.params
            P = self.sc_node(d.children[0])
            H = self.sc_node(d.children[1])
            return self.gsubst(P, H, pos)

        if rule == "cut_MS":
            (pos,) = d.params
            P = self.sc_node(d.children[0])
            H = self.sc_node(d.children[1])
            return self.lsubst(P, H, pos)

        if rule in ("mcut", "gmcut"):
            pos, n = d.params
            P = self.sc_node(d.children[0])
            out = self.sc_node(d.children[1])
            JP = self.nj(P)
            block = [h.name for h in self.nj(out).gctx[pos : pos + n]]
            if n == 0:
                system = "MT" if isinstance(self.nj(out), MSJudgment) else "GT"
                for i, h in enumerate(JP.gctx):
                    out = self.mk_nd(system, "weak", (pos + i, h.name, h.ty), out)
                return out
            merges = []
            for k in range(n - 1, 0, -1):
                Pk, mapping = self.copy_nd(P)
                out = self.gsubst(Pk, out, self.nd_gnames(out).index(block[k]))
                merges.append(mapping)
            out = self.gsubst(P, out, self.nd_gnames(out).index(block[0]))
            for mapping in merges:
                for h in JP.gctx:
                    out = self.nd_merge(out, h.name, mapping[h.name])
            return out

        raise KernelError(f"no translation for sequent rule {rule}")

    # -- tree to sequent ---------------------------------------------------------------

    def nd_node(self, d: NDDeriv) -> SCDeriv:
        got = self.done.get(id(d))
        if got is not None and got[0] is d:
            return got[1]
        out = self._nd_node(d)
        out = self.settle_sc(out, self.nj(d), d.rule)
        self.done[id(d)] = (d, out)
        return out

    def _nd_node(self, d: NDDeriv) -> SCDeriv:
        key = (d.system, d.rule)

        direct = _ND_TO_SC_DIRECT.get(key)
        if direct is not None:
            kids = tuple(self.nd_node(c) for c in d.children)
            return self.mk_sc(direct, d.params, *kids)

        if key in (("GT", "unitJ_E"), ("MT", "unitJ_E-MS")):
            (q,) = d.params
            ms = key[0] == "MT"
            cut = "gcut_MS" if ms else "cut_GS"
            scrut = self.nd_node(d.children[0])
            body = self.nd_node(d.children[1])
            h = self.nj(d.children[1]).gctx[q]
            stripped = self.mk_sc(cut, (q,), self.mk_sc("unitJ_R", ()), body)
            w = self.fresh("w")
            left = self.mk_sc(
                "unitJ_L-MS" if ms else "unitJ_L", (q, w, h.grade), stripped
            )
            return self.mk_sc(cut, (q,), scrut, left)

        if key in (("GT", "><E"), ("MT", "><E-MS")):
            (q,) = d.params
            ms = key[0] == "MT"
            scrut = self.nd_node(d.children[0])
            body = self.nd_node(d.children[1])
            z = self.fresh("z")
            left = self.mk_sc("><L-MS" if ms else "><L", (q, z), body)
            return self.mk_sc("gcut_MS" if ms else "cut_GS", (q,), scrut, left)

        if key == ("MT", "unitI_E"):
            (q,) = d.params
            scrut = self.nd_node(d.children[0])
            body = self.nd_node(d.children[1])
            z = self.fresh("z")
            left = self.mk_sc("unitI_L", (q, z), body)
            return self.mk_sc("cut_MS", (q,), scrut, left)

        if key == ("MT", "*E"):
            (q,) = d.params
            scrut = self.nd_node(d.children[0])
            body = self.nd_node(d.children[1])
            z = self.fresh("z")
            left = self.mk_sc("*L", (q, z), body)
            return self.mk_sc("cut_MS", (q,), scrut, left)

        if key == ("MT", "-oE"):
            fn = self.nd_node(d.children[0])
            arg = self.nd_node(d.children[1])
            fnty = self.nj(d.children[0]).ty
            z, u = self.fresh("z"), self.fresh("u")
            left = self.mk_sc("-oL", (0, z), arg, self.mk_sc("id_MS", (u, fnty.right)))
            return self.mk_sc("cut_MS", (0,), fn, left)

        if key == ("MT", "Lin_E"):
            kid = self.nd_node(d.children[0])
            inner = self.nj(d.children[0]).ty.inner
            z, x = self.fresh("z"), self.fresh("x")
            left = self.mk_sc("Lin_L", (z,), self.mk_sc("id_MS", (x, inner)))
            return self.mk_sc("gcut_MS", (0,), kid, left)

        if key == ("MT", "Grd_E"):
            (q,) = d.params
            scrut = self.nd_node(d.children[0])
            body = self.nd_node(d.children[1])
            jb = self.nj(d.children[1])
            r = self.nj(d.children[0]).ty.grade
            h = jb.gctx[q]
            if h.grade != r:
                grades = list(grades_of(jb.gctx))
                grades[q] = r
                body = self.mk_sc("sub_MS", (tuple(grades),), body)
            body = self.sc_gmove(body, q, len(jb.gctx) - 1)
            z = self.fresh("z")
            left = self.mk_sc("Grd_L", (z,), body)
            return self.mk_sc("cut_MS", (0,), scrut, left)

        raise KernelError(f"no translation for tree rule {d.system}/{d.rule}")


def sc_to_nd(sr: Semiring, d: SCDeriv) -> NDDeriv:
    """Translate a sequent derivation into the tree systems.

    Cuts are compiled into admissible substitutions.  The conclusion
    judgment is preserved exactly and the proof term up to renaming of
    bound variables.  Raises TranslationError for unit hypotheses whose
    grade is unreachable from 0.
    """
    return call_deep(_sc_to_nd, sr, d)


def _sc_to_nd(sr: Semiring, d: SCDeriv) -> NDDeriv:
    jin = check_sc(d, sr)
    xl = _Xlate(sr, collect_names(d))
    out = xl.sc_node(d)
    jout = xl.nj(out)
    if not same_sequent(jin, jout) or not alpha_eq(jin.term, jout.term):
        raise KernelError("translation did not preserve the judgment")
    return out


def nd_to_sc(sr: Semiring, d: NDDeriv) -> SCDeriv:
    """Translate a tree derivation into the sequent calculus.

    Eliminators become cuts against the matching left rule.  The conclusion
    judgment is preserved exactly and the proof term up to renaming of
    bound variables.
    """
    return call_deep(_nd_to_sc, sr, d)


def _nd_to_sc(sr: Semiring, d: NDDeriv) -> SCDeriv:
    jin = check_nd(d, sr)
    xl = _Xlate(sr, collect_nd_names(d))
    out = xl.nd_node(d)
    jout = xl.sj(out)
    if not same_sequent(jin, jout) or not alpha_eq(jin.term, jout.term):
        raise KernelError("translation did not preserve the judgment")
    return out

"""Batch front end for proof files.

Subcommands check, infer, normalize, translate, and probe equality over
``.mgl`` files.  Reports are line-oriented text or a stable JSON document
(``{"status": ..., "items": [...]}``); the transforming subcommands emit a
new proof file, to ``-o OUT`` or stdout.  Exit codes: 0 success, 1 a
derivation or goal failed, 2 bad input or usage, 3 a kernel invariant broke.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .cut_elim import KernelError, eliminate_cuts
from .eq_theory import EqError, equiv_oracle
from .nd_checker import ElabError, check_nd, elaborate_nd, infer_usage
from .parser import DerivItem, GoalItem, ParseError, ProofFile, parse_proof_file, \
    show_nd_deriv, show_proof_file, show_sc_deriv
from .sc_checker import CheckError, SCDeriv, check_sc, has_cut
from .semiring import SEMIRINGS
from .syntax import GSJudgment, alpha_eq, same_sequent, show_judgment
from .translate import TranslationError, nd_to_sc, sc_to_nd


class _Usage(Exception):
    """Bad invocation or unreadable input; maps to exit 2."""


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _Usage(f"cannot read {path}: {e.strerror or e}") from None


def _load(args) -> ProofFile:
    override = None
    sem = args.semiring or os.environ.get("MGL_SEMIRING") or None
    if sem:
        if sem not in SEMIRINGS:
            known = ", ".join(sorted(SEMIRINGS))
            raise _Usage(f"unknown semiring {sem!r} (known: {known})")
        override = SEMIRINGS[sem]
    try:
        return parse_proof_file(_read(args.file), override)
    except ParseError as e:
        raise _Usage(str(e)) from None


def _finish(args, items: list[dict], payload: str | None = None) -> int:
    """Render the report; on success write ``payload`` to -o OUT or stdout."""
    failed = any(it["errors"] for it in items)
    out = getattr(args, "output", None)
    if payload is not None and out and not failed:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    if args.format == "json":
        doc = {
            "status": "error" if failed else "ok",
            "items": [{k: v for k, v in it.items() if k != "lines"} for it in items],
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return 1 if failed else 0
    if payload is not None and not failed and not out:
        sys.stdout.write(payload)
        return 0
    lines = []
    for it in items:
        if it["errors"]:
            lines.extend(f"{it['name']}: error {e}" for e in it["errors"])
        else:
            lines.append(f"{it['name']}: ok {it['judgment']}")
            lines.extend(f"  {extra}" for extra in it.get("lines", ()))
    sys.stdout.write("".join(line + "\n" for line in lines))
    return 1 if failed else 0


def _item(name: str) -> dict:
    return {"name": name, "judgment": None, "cut_free": None, "errors": []}


def _check_item(sr, item, entry: dict):
    """Check one file item, filling the report entry.

    Returns (derivation, conclusion judgment); goals come back elaborated.
    On failure records the error and returns (None, None).
    """
    try:
        if isinstance(item, GoalItem):
            deriv, j = elaborate_nd(sr, item.judgment), item.judgment
            entry["cut_free"] = True
        elif item.system == "SC":
            deriv, j = item.deriv, check_sc(item.deriv, sr)
            entry["cut_free"] = not has_cut(item.deriv)
        else:
            deriv, j = item.deriv, check_nd(item.deriv, sr)
            entry["cut_free"] = True
        entry["judgment"] = show_judgment(sr, j)
        expected = getattr(item, "expected", None)
        if expected is not None and not (
            same_sequent(j, expected) and alpha_eq(j.term, expected.term)
        ):
            entry["errors"].append(
                f"concludes {show_judgment(sr, j)}, "
                f"not the declared {show_judgment(sr, expected)}"
            )
        return deriv, j
    except (CheckError, ElabError) as e:
        entry["errors"].append(str(e))
        return None, None


def _cmd_check(args) -> int:
    pf = _load(args)
    items = []
    for item in pf.items:
        entry = _item(item.name)
        _check_item(pf.semiring, item, entry)
        items.append(entry)
    return _finish(args, items)


def _cmd_infer(args) -> int:
    pf = _load(args)
    sr = pf.semiring
    items = []
    for item in pf.items:
        entry = _item(item.name)
        _, goal = _check_item(sr, item, entry)
        if not entry["errors"] and goal is not None:
            usage, linear = infer_usage(sr, goal)
            entry["usage"] = {h.name: sr.show(usage[h.name]) for h in goal.gctx}
            entry["linear"] = list(linear)
            shown = ", ".join(f"{k}={v}" for k, v in entry["usage"].items()) or "(none)"
            line = f"usage: {shown}"
            if not isinstance(goal, GSJudgment):
                line += "; linear: " + (", ".join(linear) or "(none)")
            entry["lines"] = [line]
        items.append(entry)
    return _finish(args, items)


def _cmd_normalize(args) -> int:
    if args.trace and args.format != "json":
        raise _Usage("--trace requires --format json")
    pf = _load(args)
    sr = pf.semiring
    items = []
    out_items = []
    for item in pf.items:
        entry = _item(item.name)
        _check_item(sr, item, entry)
        new_item = item
        if not entry["errors"] and isinstance(item, DerivItem):
            if item.system == "SC":
                normal, trace = eliminate_cuts(sr, item.deriv, trace=args.trace)
                j = check_sc(normal, sr)
                entry["judgment"] = show_judgment(sr, j)
                entry["cut_free"] = True
                entry["deriv"] = show_sc_deriv(sr, normal)
                if args.trace:
                    entry["trace"] = trace
                # Normalization rewrites the proof term, so a declared
                # conclusion must be refreshed to stay checkable.
                expected = j if item.expected is not None else None
                new_item = DerivItem(item.name, "SC", normal, expected)
            else:
                entry["deriv"] = show_nd_deriv(sr, item.deriv)
        items.append(entry)
        out_items.append(new_item)
    payload = show_proof_file(ProofFile(sr, pf.atoms, tuple(out_items)))
    return _finish(args, items, payload)


def _cmd_translate(args) -> int:
    pf = _load(args)
    sr = pf.semiring
    items = []
    out_items = []
    for item in pf.items:
        entry = _item(item.name)
        deriv, _ = _check_item(sr, item, entry)
        if not entry["errors"] and deriv is not None:
            try:
                if args.to == "nd" and isinstance(deriv, SCDeriv):
                    deriv = sc_to_nd(sr, deriv)
                elif args.to == "sc" and not isinstance(deriv, SCDeriv):
                    deriv = nd_to_sc(sr, deriv)
            except TranslationError as e:
                entry["errors"].append(str(e))
        if not entry["errors"] and deriv is not None:
            system = "SC" if isinstance(deriv, SCDeriv) else deriv.system
            entry["cut_free"] = not has_cut(deriv) if system == "SC" else True
            entry["system"] = system
            entry["deriv"] = (
                show_sc_deriv(sr, deriv) if system == "SC" else show_nd_deriv(sr, deriv)
            )
            out_items.append(DerivItem(item.name, system, deriv, None))
        items.append(entry)
    payload = show_proof_file(ProofFile(sr, pf.atoms, tuple(out_items)))
    return _finish(args, items, payload)


def _cmd_eq(args) -> int:
    pf = _load(args)
    sr = pf.semiring
    derivs = {
        it.name: it for it in pf.items if isinstance(it, DerivItem) and it.system == "SC"
    }
    for name in (args.left, args.right):
        if name not in derivs:
            raise _Usage(f"no sequent derivation named {name!r} in the file")
    d1, d2 = derivs[args.left].deriv, derivs[args.right].deriv
    entry = _item(f"{args.left} ~ {args.right}")
    result = None
    try:
        result = equiv_oracle(sr, d1, d2)
        entry["judgment"] = show_judgment(sr, check_sc(d1, sr))
        entry["cut_free"] = not (has_cut(d1) or has_cut(d2))
        entry["result"] = result
    except (CheckError, EqError) as e:
        entry["errors"].append(str(e))
    return _finish(args, [entry], result + "\n" if result else None)


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="mgl", description="Check, normalize, and translate proof files."
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, output=False):
        p.add_argument("file", help="proof file, or - for stdin")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--semiring", metavar="ID", default=None,
                       help="override the file's semiring header")
        if output:
            p.add_argument("-o", "--output", metavar="OUT", default=None,
                           help="write the resulting proof file here")

    common(sub.add_parser("check", help="check every goal and derivation"))
    common(sub.add_parser("infer", help="check and report hypothesis usage"))
    p = sub.add_parser("normalize", help="eliminate cuts from sequent derivations")
    common(p, output=True)
    p.add_argument("--trace", action="store_true",
                   help="record reduction steps (JSON only)")
    p = sub.add_parser("translate", help="move derivations between systems")
    common(p, output=True)
    p.add_argument("--to", choices=("nd", "sc"), required=True,
                   help="target system family")
    p = sub.add_parser("eq", help="probe two sequent derivations for equality")
    common(p)
    p.add_argument("left", help="name of the first derivation")
    p.add_argument("right", help="name of the second derivation")
    return top


_COMMANDS = {
    "check": _cmd_check,
    "infer": _cmd_infer,
    "normalize": _cmd_normalize,
    "translate": _cmd_translate,
    "eq": _cmd_eq,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return _COMMANDS[args.command](args)
    except _Usage as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KernelError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

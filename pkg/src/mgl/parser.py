"""Concrete syntax: tokenizer, parsers, and printers.

A proof file names its semiring, declares its atoms, and then lists goals
(judgments to elaborate) and derivations (s-expressions over the rule
tables).  Parsing a printed type, term, judgment, derivation, or file gives
back the value it was printed from.

Rule names such as ``><L-MS`` span several tokens; they are joined back
together only when the tokens are adjacent in the source, so ``><`` inside a
type never glues onto a neighbouring name.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .nd_checker import ND_RULES, NDDeriv
from .sc_checker import SC_RULES, SCDeriv
from .semiring import GradeError, SEMIRINGS, Semiring
from .syntax import (
    GH,
    LH,
    App,
    GAtom,
    GrdTm,
    GrdTy,
    GSJudgment,
    GTen,
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
    MSJudgment,
    Pair,
    Term,
    Unlin,
    UnitI,
    UnitJ,
    Var,
    show_gtype,
    show_judgment,
    show_ltype,
    show_term,
)

RESERVED = frozenset(
    {"let", "in", "unitJ", "unitI", "Lin", "Grd", "Unlin", "J", "I", "GS", "MS"}
)


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NAME | INT | SYM | EOF
    value: str
    line: int
    col: int


_NAME_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_NAME_REST = _NAME_START | set("0123456789_")
_SINGLE = set(";:,()[]@*\\.=/")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if c in _NAME_START:
            j = i
            while j < n and text[j] in _NAME_REST:
                j += 1
            toks.append(Token("NAME", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        nxt = text[i + 1] if i + 1 < n else ""
        if c == "-":
            if nxt == "-":
                while i < n and text[i] != "\n":
                    i += 1
                continue
            if nxt == "o":
                toks.append(Token("SYM", "-o", start_line, start_col))
                i += 2
                col += 2
                continue
            toks.append(Token("SYM", "-", start_line, start_col))
            i += 1
            col += 1
            continue
        if c == ">" and nxt == "<":
            toks.append(Token("SYM", "><", start_line, start_col))
            i += 2
            col += 2
            continue
        if c == "|" and nxt == "-":
            toks.append(Token("SYM", "|-", start_line, start_col))
            i += 2
            col += 2
            continue
        if c in _SINGLE:
            toks.append(Token("SYM", c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


_JOINABLE_SYMS = {"><", "*", "-o", "-"}


class _Parser:
    def __init__(self, text: str, sr: Semiring | None = None, atoms=None):
        self.toks = tokenize(text)
        self.i = 0
        self.sr = sr
        self.atoms = set(atoms) if atoms is not None else None

    # -- token plumbing -------------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at_sym(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "SYM" and t.value == value

    def at_name(self, value: str | None = None) -> bool:
        t = self.peek()
        return t.kind == "NAME" and (value is None or t.value == value)

    def expect_sym(self, value: str) -> Token:
        t = self.next()
        if t.kind != "SYM" or t.value != value:
            raise ParseError(f"expected {value!r}, found {t.value!r}", t.line, t.col)
        return t

    def expect_name(self, value: str | None = None) -> Token:
        t = self.next()
        if t.kind != "NAME" or (value is not None and t.value != value):
            want = value or "a name"
            raise ParseError(f"expected {want!r}, found {t.value!r}", t.line, t.col)
        return t

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    def expect_eof(self) -> None:
        t = self.peek()
        if t.kind != "EOF":
            raise ParseError(f"unexpected {t.value!r} after the end", t.line, t.col)

    def ident(self) -> str:
        """A plain variable/binder name; reserved words are rejected."""
        t = self.expect_name()
        if t.value in RESERVED:
            raise ParseError(f"{t.value!r} is reserved", t.line, t.col)
        return t.value

    def joined_name(self) -> str:
        """Join adjacent tokens into one multi-token name (``><L-MS``)."""
        t = self.peek()
        if not (t.kind == "NAME" or (t.kind == "SYM" and t.value in _JOINABLE_SYMS)):
            self.fail(f"expected a name, found {t.value!r}")
        parts = [self.next()]
        while True:
            prev = parts[-1]
            t = self.peek()
            joinable = t.kind == "NAME" or (
                t.kind == "SYM" and t.value in _JOINABLE_SYMS
            )
            adjacent = t.line == prev.line and t.col == prev.col + len(prev.value)
            if joinable and adjacent:
                parts.append(self.next())
            else:
                return "".join(p.value for p in parts)

    # -- grades ---------------------------------------------------------------

    def grade(self):
        t = self.peek()
        if self.sr is None:
            self.fail("grade literals need a semiring in scope")
        if t.kind == "NAME":
            text = self.next().value
        elif t.kind == "INT":
            text = self.next().value
            if self.at_sym("/"):
                self.next()
                text += "/" + self.expect_name_or_int()
        else:
            self.fail(f"expected a grade, found {t.value!r}")
        try:
            return self.sr.parse(text)
        except GradeError as e:
            raise ParseError(str(e), t.line, t.col) from None

    def expect_name_or_int(self) -> str:
        t = self.next()
        if t.kind != "INT":
            raise ParseError(f"expected a number, found {t.value!r}", t.line, t.col)
        return t.value

    def at_grade(self) -> bool:
        return self.peek().kind in ("NAME", "INT")

    # -- types ----------------------------------------------------------------

    def atom_name(self, t: Token) -> str:
        if t.value in RESERVED:
            raise ParseError(f"{t.value!r} is reserved", t.line, t.col)
        if self.atoms is not None and t.value not in self.atoms:
            raise ParseError(f"undeclared atom {t.value!r}", t.line, t.col)
        return t.value

    def gtype(self):
        ty = self.gatom()
        while self.at_sym("><"):
            self.next()
            ty = GTen(ty, self.gatom())
        return ty

    def gatom(self):
        t = self.peek()
        if t.kind == "NAME" and t.value == "J":
            self.next()
            return JUnit()
        if t.kind == "NAME" and t.value == "Lin":
            self.next()
            self.expect_sym("(")
            inner = self.ltype()
            self.expect_sym(")")
            return LinTy(inner)
        if t.kind == "NAME":
            return GAtom(self.atom_name(self.next()))
        if self.at_sym("("):
            self.next()
            ty = self.gtype()
            self.expect_sym(")")
            return ty
        self.fail(f"expected a graded type, found {t.value!r}")

    def ltype(self):
        ty = self.lten()
        if self.at_sym("-o"):
            self.next()
            return Lolli(ty, self.ltype())
        return ty

    def lten(self):
        ty = self.latom()
        while self.at_sym("*"):
            self.next()
            ty = LTen(ty, self.latom())
        return ty

    def latom(self):
        t = self.peek()
        if t.kind == "NAME" and t.value == "I":
            self.next()
            return IUnit()
        if t.kind == "NAME" and t.value == "Grd":
            self.next()
            self.expect_sym("[")
            r = self.grade()
            self.expect_sym("]")
            self.expect_sym("(")
            inner = self.gtype()
            self.expect_sym(")")
            return GrdTy(r, inner)
        if t.kind == "NAME":
            return LAtom(self.atom_name(self.next()))
        if self.at_sym("("):
            self.next()
            ty = self.ltype()
            self.expect_sym(")")
            return ty
        self.fail(f"expected a linear type, found {t.value!r}")

    # -- terms ----------------------------------------------------------------

    def term(self) -> Term:
        if self.at_sym("\\"):
            self.next()
            x = self.ident()
            ann = None
            if self.at_sym(":"):
                self.next()
                ann = self.ltype()
            self.expect_sym(".")
            return Lam(x, ann, self.term())
        if self.at_name("let"):
            return self.let_term()
        return self.app_term()

    def let_term(self) -> Term:
        self.expect_name("let")
        t = self.peek()
        if self.at_name("unitJ") or self.at_name("unitI"):
            kind = self.next().value[-1]
            self.expect_sym("=")
            scrut = self.app_term()
            self.expect_name("in")
            return LetUnit(kind, scrut, self.term())
        if self.at_name("Grd"):
            self.next()
            self.expect_sym("[")
            r = self.grade()
            self.expect_sym("]")
            x = self.ident()
            self.expect_sym("=")
            scrut = self.app_term()
            self.expect_name("in")
            return LetGrd(r, x, scrut, self.term())
        if self.at_sym("("):
            self.next()
            x = self.ident()
            self.expect_sym(",")
            y = self.ident()
            self.expect_sym(")")
            self.expect_sym("=")
            scrut = self.app_term()
            self.expect_name("in")
            return LetPair(x, y, scrut, self.term())
        self.fail(f"expected a let binding, found {t.value!r}")

    def app_term(self) -> Term:
        t = self.unit_term()
        while self.at_sym("(") or (
            self.at_name()
            and (
                self.peek().value not in RESERVED
                or self.peek().value in ("unitJ", "unitI")
            )
        ):
            t = App(t, self.atom_term())
        return t

    def unit_term(self) -> Term:
        if self.at_name("Lin"):
            self.next()
            return LinTm(self.atom_term())
        if self.at_name("Unlin"):
            self.next()
            return Unlin(self.atom_term())
        if self.at_name("Grd"):
            self.next()
            self.expect_sym("[")
            r = self.grade()
            self.expect_sym("]")
            return GrdTm(r, self.atom_term())
        return self.atom_term()

    def atom_term(self) -> Term:
        t = self.peek()
        if self.at_name("unitJ"):
            self.next()
            return UnitJ()
        if self.at_name("unitI"):
            self.next()
            return UnitI()
        if t.kind == "NAME":
            return Var(self.ident())
        if self.at_sym("("):
            self.next()
            first = self.term()
            if self.at_sym(","):
                self.next()
                second = self.term()
                self.expect_sym(")")
                return Pair(first, second)
            self.expect_sym(")")
            return first
        self.fail(f"expected a term, found {t.value!r}")

    # -- judgments ------------------------------------------------------------

    def judgment(self):
        t = self.expect_name()
        if t.value not in ("GS", "MS"):
            raise ParseError(
                f"expected 'GS' or 'MS', found {t.value!r}", t.line, t.col
            )
        self.expect_sym(":")
        gctx = []
        while self.at_name() and not self.at_sym("|-"):
            name = self.ident()
            self.expect_sym("@")
            grade = self.grade()
            self.expect_sym(":")
            gctx.append(GH(name, grade, self.gtype()))
            if self.at_sym(","):
                self.next()
        if t.value == "GS":
            self.expect_sym("|-")
            term = self.term()
            self.expect_sym(":")
            return GSJudgment(tuple(gctx), term, self.gtype())
        self.expect_sym(";")
        lctx = []
        while self.at_name():
            name = self.ident()
            self.expect_sym(":")
            lctx.append(LH(name, self.ltype()))
            if self.at_sym(","):
                self.next()
        self.expect_sym("|-")
        term = self.term()
        self.expect_sym(":")
        return MSJudgment(tuple(gctx), tuple(lctx), term, self.ltype())

    # -- derivations ----------------------------------------------------------

    def sc_deriv(self) -> SCDeriv:
        self.expect_sym("(")
        t = self.peek()
        rule = self.joined_name()
        sig = SC_RULES.get(rule)
        if sig is None:
            raise ParseError(f"unknown rule {rule!r}", t.line, t.col)
        params = self.rule_params(sig.params)
        children = []
        while self.at_sym("("):
            children.append(self.sc_deriv())
        self.expect_sym(")")
        return SCDeriv(rule, params, tuple(children))

    def nd_deriv(self, system: str) -> NDDeriv:
        self.expect_sym("(")
        t = self.peek()
        rule = self.joined_name()
        sig = ND_RULES.get((system, rule))
        if sig is None:
            raise ParseError(f"unknown {system} rule {rule!r}", t.line, t.col)
        params = self.rule_params(sig.params)
        children = []
        for child_system in nd_child_systems(system, rule, sig.arity):
            children.append(self.nd_deriv(child_system))
        self.expect_sym(")")
        return NDDeriv(system, rule, params, tuple(children))

    def rule_params(self, kinds: tuple) -> tuple:
        params = []
        for kind in kinds:
            if kind == "int":
                t = self.next()
                if t.kind != "INT":
                    raise ParseError(
                        f"expected a position, found {t.value!r}", t.line, t.col
                    )
                params.append(int(t.value))
            elif kind == "name":
                params.append(self.ident())
            elif kind == "grade":
                params.append(self.grade())
            elif kind == "gtype":
                params.append(self.gtype())
            elif kind == "ltype":
                params.append(self.ltype())
            elif kind == "grades":
                grades = []
                while self.at_grade():
                    grades.append(self.grade())
                params.append(tuple(grades))
            else:  # pragma: no cover
                raise AssertionError(kind)
        return tuple(params)

    # -- proof files ----------------------------------------------------------

    def proof_file(self, override: Semiring | None):
        t = self.peek()
        self.expect_name("semiring")
        tid = self.peek()
        sem_id = self.joined_name()
        if sem_id not in SEMIRINGS:
            known = ", ".join(sorted(SEMIRINGS))
            raise ParseError(
                f"unknown semiring {sem_id!r} (known: {known})", tid.line, tid.col
            )
        self.sr = override if override is not None else SEMIRINGS[sem_id]
        self.expect_sym(";")
        self.atoms = set()
        while self.at_name("atom"):
            self.next()
            t = self.peek()
            name = self.ident()
            if name in ("SC", "GT", "MT"):
                raise ParseError(f"{name!r} is reserved", t.line, t.col)
            if name in self.atoms:
                raise ParseError(f"atom {name!r} declared twice", t.line, t.col)
            self.atoms.add(name)
            self.expect_sym(";")
        items = []
        names = set()
        goal_count = 0
        while not self.peek().kind == "EOF":
            t = self.peek()
            if self.at_name("goal"):
                self.next()
                goal_count += 1
                items.append(GoalItem(f"goal{goal_count}", self.judgment()))
                self.expect_sym(";")
            elif self.at_name("deriv"):
                self.next()
                tn = self.peek()
                name = self.ident()
                if name in names:
                    raise ParseError(
                        f"derivation {name!r} declared twice", tn.line, tn.col
                    )
                names.add(name)
                ts = self.peek()
                system = self.expect_name().value
                if system == "SC":
                    deriv = self.sc_deriv()
                elif system in ("GT", "MT"):
                    deriv = self.nd_deriv(system)
                else:
                    raise ParseError(
                        f"expected 'SC', 'GT', or 'MT', found {system!r}",
                        ts.line,
                        ts.col,
                    )
                expected = None
                if self.at_sym(":"):
                    self.next()
                    self.expect_name("conclude")
                    expected = self.judgment()
                items.append(DerivItem(name, system, deriv, expected))
                self.expect_sym(";")
            else:
                raise ParseError(
                    f"expected 'goal' or 'deriv', found {t.value!r}", t.line, t.col
                )
        return ProofFile(self.sr, frozenset(self.atoms), tuple(items))


def nd_child_systems(system: str, rule: str, arity: int) -> tuple:
    """Which system each premise of a natural-deduction rule lives in."""
    if system == "GT":
        return ("MT",) if rule == "Lin_I" else (system,) * arity
    if rule in ("Grd_I", "Lin_E"):
        return ("GT",)
    if rule in ("unitJ_E-MS", "><E-MS"):
        return ("GT", "MT")
    return (system,) * arity


@dataclass(frozen=True)
class GoalItem:
    name: str
    judgment: object


@dataclass(frozen=True)
class DerivItem:
    name: str
    system: str  # SC | GT | MT
    deriv: object
    expected: object = None


@dataclass(frozen=True)
class ProofFile:
    semiring: Semiring
    atoms: frozenset
    items: tuple


# -- public parse entry points ------------------------------------------------


def _parse_whole(text: str, production: str, sr, atoms):
    p = _Parser(text, sr=sr, atoms=atoms)
    out = getattr(p, production)()
    p.expect_eof()
    return out


def parse_gtype(text: str, sr: Semiring | None = None, atoms=None):
    return _parse_whole(text, "gtype", sr, atoms)


def parse_ltype(text: str, sr: Semiring | None = None, atoms=None):
    return _parse_whole(text, "ltype", sr, atoms)


def parse_term(text: str, sr: Semiring | None = None):
    return _parse_whole(text, "term", sr, None)


def parse_grade(sr: Semiring, text: str):
    return _parse_whole(text, "grade", sr, None)


def parse_judgment(sr: Semiring, text: str, atoms=None):
    return _parse_whole(text, "judgment", sr, atoms)


def parse_sc_deriv(sr: Semiring, text: str, atoms=None) -> SCDeriv:
    return _parse_whole(text, "sc_deriv", sr, atoms)


def parse_nd_deriv(sr: Semiring, text: str, system: str, atoms=None) -> NDDeriv:
    p = _Parser(text, sr=sr, atoms=atoms)
    out = p.nd_deriv(system)
    p.expect_eof()
    return out


def parse_proof_file(text: str, override: Semiring | None = None) -> ProofFile:
    return _Parser(text).proof_file(override)


# -- printers -------------------------------------------------------------------


def _show_params(sr: Semiring, sig, params) -> list:
    out = []
    for kind, value in zip(sig.params, params):
        if kind == "int":
            out.append(str(value))
        elif kind == "name":
            out.append(value)
        elif kind == "grade":
            out.append(sr.show(value))
        elif kind == "gtype":
            out.append(show_gtype(sr, value))
        elif kind == "ltype":
            out.append(show_ltype(sr, value))
        elif kind == "grades":
            out.extend(sr.show(g) for g in value)
        else:  # pragma: no cover
            raise AssertionError(kind)
    return out


def show_sc_deriv(sr: Semiring, d: SCDeriv) -> str:
    parts = [d.rule]
    parts.extend(_show_params(sr, SC_RULES[d.rule], d.params))
    parts.extend(show_sc_deriv(sr, c) for c in d.children)
    return f"({' '.join(parts)})"


def show_nd_deriv(sr: Semiring, d: NDDeriv) -> str:
    parts = [d.rule]
    parts.extend(_show_params(sr, ND_RULES[(d.system, d.rule)], d.params))
    parts.extend(show_nd_deriv(sr, c) for c in d.children)
    return f"({' '.join(parts)})"


def show_item(sr: Semiring, item) -> str:
    if isinstance(item, GoalItem):
        return f"goal {show_judgment(sr, item.judgment)};"
    if item.system == "SC":
        body = show_sc_deriv(sr, item.deriv)
    else:
        body = show_nd_deriv(sr, item.deriv)
    suffix = ""
    if item.expected is not None:
        suffix = f" :conclude {show_judgment(sr, item.expected)}"
    return f"deriv {item.name} {item.system} {body}{suffix};"


def show_proof_file(pf: ProofFile) -> str:
    lines = [f"semiring {pf.semiring.id};"]
    lines.extend(f"atom {name};" for name in sorted(pf.atoms))
    lines.extend(show_item(pf.semiring, item) for item in pf.items)
    return "\n".join(lines) + "\n"

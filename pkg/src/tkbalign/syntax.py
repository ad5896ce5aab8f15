"""Text formats for knowledge bases, queries and temporal queries.

Concepts::

    Top  Bot  A  not C  C and D  C or D  exists r.C  forall r.C

``not`` binds tightest, then ``and``, then ``or``; the filler of
``exists``/``forall`` is a single unary concept.  A GCI is
``C subclassof D``, an assertion ``A(a)`` or ``r(a,b)``.

A problem file has sections introduced by a header line; items follow one
per line (or separated by ``;``), and ``#`` starts a comment::

    tbox:
      A subclassof exists r.B
    abox@0: A(a); r(a,b)
    abox@1:
    signature:
      concepts: A B
      roles: r

Queries are Boolean combinations of CQs with ``~``, ``&`` and ``|``::

    EX y z . r(a,y) & A(z)       # existentially quantified CQ
    A(?x)                        # free variable
    ~(A(a) | B(a)) & true

TCQs put queries in brackets and add ``X``, ``U``, ``F``, ``G`` and
``->``::

    G ([EX y . A(y)] -> X [B(b)])

Names starting with ``__`` are reserved for internal use and rejected.
Every ``print_*`` function produces text its parser maps back to an equal
object.
"""

from __future__ import annotations

import re
from typing import Iterable, NamedTuple, Optional

from .automata.ltl import LNot, LOr, LTrue, Next, Prop, TRUE, Until, always, eventually, implies, land
from .cq import CQ, BoolCQ, ConceptAtom, QFALSE, QLeaf, QNot, QOr, QTRUE, RoleAtom, Var, qand
from .dl import (
    BOTTOM, TOP, Assertion, Concept, ConceptAssertion, Exists, GCI, Name, Not, Or, RoleAssertion,
    Signature, assertion_key, conj, forall,
)
from .errors import QuerySyntaxError
from .temporal import TCQ, TemporalKB

__all__ = [
    "Problem", "parse_concept", "parse_gci", "parse_assertion", "parse_kb", "parse_problem",
    "parse_query", "parse_tcq", "print_kb", "print_query", "print_tcq", "print_concept",
]

_TOKEN = re.compile(r"\s*(?:(->)|(\?[A-Za-z_][A-Za-z0-9_]*)|([A-Za-z_][A-Za-z0-9_]*)|([()\[\].,&|~;]))")


class _Tok(NamedTuple):
    kind: str  # "id", "var", "op", "end"
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int = 1, col0: int = 1) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        start = m.start(m.lastindex)
        arrow, var, ident, op = m.groups()
        if ident is not None:
            toks.append(_Tok("id", ident, line, col0 + start))
        elif var is not None:
            toks.append(_Tok("var", var[1:], line, col0 + start))
        else:
            toks.append(_Tok("op", arrow or op, line, col0 + start))
        pos = m.end()
    toks.append(_Tok("end", "", line, col0 + len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, line: int = 1, col0: int = 1):
        self.toks = _tokenize(text, line, col0)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected: str, tok: Optional[_Tok] = None) -> QuerySyntaxError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return QuerySyntaxError(f"unexpected {found}", tok.line, tok.col, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "id") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            raise self.error(repr(text))
        tok = self.tok
        self.i += 1
        return tok

    def name(self, what: str) -> str:
        tok = self.tok
        if tok.kind != "id" or tok.text in _KEYWORDS:
            raise self.error(what)
        if tok.text.startswith("__"):
            raise QuerySyntaxError(f"name {tok.text!r} uses the reserved prefix '__'", tok.line, tok.col)
        self.i += 1
        return tok.text

    def done(self) -> None:
        if self.tok.kind != "end":
            raise self.error("end of input")


_KEYWORDS = {"Top", "Bot", "not", "and", "or", "exists", "forall", "subclassof", "EX", "true", "false"}


# -- concepts, GCIs and assertions -------------------------------------------------


def _concept(p: _Parser) -> Concept:
    out = _conjunction(p)
    while p.accept("or"):
        out = Or(out, _conjunction(p))
    return out


def _conjunction(p: _Parser) -> Concept:
    out = _unary_concept(p)
    while p.accept("and"):
        out = conj(out, _unary_concept(p))
    return out


def _unary_concept(p: _Parser) -> Concept:
    if p.accept("not"):
        return Not(_unary_concept(p))
    if p.at("exists") or p.at("forall"):
        kw = p.tok.text
        p.i += 1
        role = p.name("a role name")
        p.expect(".")
        filler = _unary_concept(p)
        return Exists(role, filler) if kw == "exists" else forall(role, filler)
    if p.accept("("):
        c = _concept(p)
        p.expect(")")
        return c
    if p.accept("Top"):
        return TOP
    if p.accept("Bot"):
        return BOTTOM
    return Name(p.name("a concept"))


def parse_concept(text: str, line: int = 1, col0: int = 1) -> Concept:
    p = _Parser(text, line, col0)
    c = _concept(p)
    p.done()
    return c


def parse_gci(text: str, line: int = 1, col0: int = 1) -> GCI:
    p = _Parser(text, line, col0)
    lhs = _concept(p)
    p.expect("subclassof")
    rhs = _concept(p)
    p.done()
    return GCI(lhs, rhs)


def parse_assertion(text: str, line: int = 1, col0: int = 1) -> Assertion:
    p = _Parser(text, line, col0)
    name = p.name("a concept or role name")
    p.expect("(")
    first = p.name("an individual")
    if p.accept(","):
        second = p.name("an individual")
        p.expect(")")
        p.done()
        return RoleAssertion(name, first, second)
    p.expect(")")
    p.done()
    return ConceptAssertion(name, first)


def print_concept(c: Concept) -> str:
    return str(c)


# -- problem files -------------------------------------------------------------------


class Problem(NamedTuple):
    tkb: TemporalKB
    signature: Optional[Signature]


_HEADER = re.compile(r"^\s*(tbox|abox@(\d+)|signature)\s*:")


def _items(body: str, line: int, col0: int) -> Iterable[tuple[str, int]]:
    pos = 0
    for piece in body.split(";"):
        stripped = piece.strip()
        if stripped:
            yield stripped, col0 + pos + (len(piece) - len(piece.lstrip()))
        pos += len(piece) + 1


def parse_problem(text: str) -> Problem:
    tbox: set[GCI] = set()
    aboxes: dict[int, set[Assertion]] = {}
    abox_lines: dict[int, int] = {}
    concepts: set[str] = set()
    roles: set[str] = set()
    has_sig = False
    section: Optional[tuple] = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _HEADER.match(line)
        offset = 0
        if m:
            if m.group(1) == "tbox":
                section = ("tbox",)
            elif m.group(1) == "signature":
                section = ("signature",)
                has_sig = True
            else:
                k = int(m.group(2))
                if k in aboxes:
                    raise QuerySyntaxError(f"duplicate section abox@{k}", n, m.start(1) + 1)
                aboxes[k] = set()
                abox_lines[k] = n
                section = ("abox", k)
            offset = m.end()
        body = line[offset:]
        if not body.strip():
            continue
        if section is None:
            col = len(body) - len(body.lstrip()) + 1
            raise QuerySyntaxError("item outside of a section", n, col, "'tbox:', 'abox@<k>:' or 'signature:'")
        for item, col in _items(body, n, offset + 1):
            if section[0] == "tbox":
                tbox.add(parse_gci(item, n, col))
            elif section[0] == "abox":
                aboxes[section[1]].add(parse_assertion(item, n, col))
            else:
                _signature_item(item, n, col, concepts, roles)
    for j, k in enumerate(sorted(aboxes)):
        if k != j:
            raise QuerySyntaxError(f"ABox indices must be contiguous from 0; abox@{j} is missing",
                                   abox_lines[k], 1, f"abox@{j}")
    tkb = TemporalKB(frozenset(tbox), tuple(frozenset(aboxes[k]) for k in sorted(aboxes)))
    return Problem(tkb, Signature(frozenset(concepts), frozenset(roles)) if has_sig else None)


def _signature_item(item: str, line: int, col: int, concepts: set, roles: set) -> None:
    head, sep, rest = item.partition(":")
    kind = head.strip()
    if not sep or kind not in ("concepts", "roles"):
        raise QuerySyntaxError("bad signature entry", line, col, "'concepts: ...' or 'roles: ...'")
    p = _Parser(rest.replace(",", " "), line, col + len(head) + 1)
    target = concepts if kind == "concepts" else roles
    while p.tok.kind != "end":
        target.add(p.name("a name"))


def parse_kb(text: str) -> TemporalKB:
    return parse_problem(text).tkb


def print_kb(g: TemporalKB, signature: Optional[Signature] = None) -> str:
    lines = ["tbox:"]
    lines += [f"  {gci}" for gci in sorted(g.tbox, key=str)]
    for k, abox in enumerate(g.aboxes):
        lines.append(f"abox@{k}:")
        lines += [f"  {a}" for a in sorted(abox, key=assertion_key)]
    if signature is not None:
        lines.append("signature:")
        lines.append("  concepts: " + " ".join(sorted(signature.concepts)))
        lines.append("  roles: " + " ".join(sorted(signature.roles)))
    return "\n".join(lines) + "\n"


# -- queries -------------------------------------------------------------------------


def _query(p: _Parser) -> BoolCQ:
    out = _query_conj(p)
    while p.accept("|"):
        out = QOr(out, _query_conj(p))
    return out


def _query_conj(p: _Parser) -> BoolCQ:
    out = _query_unary(p)
    while p.accept("&"):
        out = qand(out, _query_unary(p))
    return out


def _query_unary(p: _Parser) -> BoolCQ:
    if p.accept("~"):
        return QNot(_query_unary(p))
    if p.accept("("):
        q = _query(p)
        p.expect(")")
        return q
    if p.accept("true"):
        return QTRUE
    if p.accept("false"):
        return QFALSE
    if p.accept("EX"):
        bound: list[Var] = []
        while p.tok.kind == "id" and not p.at("."):
            bound.append(Var(p.name("a variable")))
        p.expect(".")
        names = {v.name for v in bound}
        atoms = [_atom(p, names)]
        while p.at("&") and p.peek().kind == "id" and p.peek(2).text == "(":
            p.i += 1
            atoms.append(_atom(p, names))
        unused = [v.name for v in bound if not any(Var(v.name) in a.terms for a in atoms)]
        if unused:
            raise QuerySyntaxError(f"bound variable {unused[0]!r} does not occur", p.tok.line, p.tok.col)
        return QLeaf(CQ(tuple(dict.fromkeys(bound)), tuple(atoms)))
    return QLeaf(CQ((), (_atom(p, set()),)))


def _term(p: _Parser, bound: set):
    if p.tok.kind == "var":
        tok = p.tok
        if tok.text.startswith("__"):
            raise QuerySyntaxError(f"name {tok.text!r} uses the reserved prefix '__'", tok.line, tok.col)
        p.i += 1
        return Var(tok.text)
    name = p.name("a variable or individual")
    return Var(name) if name in bound else name


def _atom(p: _Parser, bound: set):
    name = p.name("an atom")
    p.expect("(")
    first = _term(p, bound)
    if p.accept(","):
        second = _term(p, bound)
        p.expect(")")
        return RoleAtom(name, first, second)
    p.expect(")")
    return ConceptAtom(name, first)


def parse_query(text: str) -> BoolCQ:
    p = _Parser(text)
    q = _query(p)
    p.done()
    return q


def print_query(q: BoolCQ) -> str:
    if isinstance(q, QLeaf):
        return "true" if q == QTRUE else str(q.cq)
    if isinstance(q, QNot):
        return "~" + _print_query_wrapped(q.arg)
    return f"{_print_query_wrapped(q.left)} | {_print_query_wrapped(q.right)}"


def _print_query_wrapped(q: BoolCQ) -> str:
    text = print_query(q)
    if isinstance(q, QNot) or (isinstance(q, QLeaf) and not q.cq.exist_vars and len(q.cq.atoms) <= 1):
        return text
    return f"({text})"


# -- temporal queries ----------------------------------------------------------------


def _to_tcq(q: BoolCQ) -> TCQ:
    if isinstance(q, QLeaf):
        return Prop(q.cq)
    if isinstance(q, QNot):
        return LNot(_to_tcq(q.arg))
    return LOr(_to_tcq(q.left), _to_tcq(q.right))


def _tcq(p: _Parser) -> TCQ:
    left = _tcq_or(p)
    if p.accept("->"):
        return implies(left, _tcq(p))
    return left


def _tcq_or(p: _Parser) -> TCQ:
    out = _tcq_and(p)
    while p.accept("|"):
        out = LOr(out, _tcq_and(p))
    return out


def _tcq_and(p: _Parser) -> TCQ:
    out = _tcq_until(p)
    while p.accept("&"):
        out = land(out, _tcq_until(p))
    return out


def _tcq_until(p: _Parser) -> TCQ:
    left = _tcq_unary(p)
    if p.accept("U"):
        return Until(left, _tcq_until(p))
    return left


def _tcq_unary(p: _Parser) -> TCQ:
    if p.accept("~"):
        return LNot(_tcq_unary(p))
    if p.accept("X"):
        return Next(_tcq_unary(p))
    if p.accept("F"):
        return eventually(_tcq_unary(p))
    if p.accept("G"):
        return always(_tcq_unary(p))
    if p.accept("("):
        f = _tcq(p)
        p.expect(")")
        return f
    if p.accept("true"):
        return TRUE
    if p.accept("false"):
        return LNot(TRUE)
    if p.accept("["):
        q = _query(p)
        p.expect("]")
        return _to_tcq(q)
    raise p.error("a temporal query")


def parse_tcq(text: str) -> TCQ:
    p = _Parser(text)
    f = _tcq(p)
    p.done()
    return f


def print_tcq(f: TCQ) -> str:
    if isinstance(f, Prop):
        return f"[{print_query(QLeaf(f.atom))}]"
    if isinstance(f, LTrue):
        return "true"
    if isinstance(f, LNot):
        return "~" + print_tcq(f.arg)
    if isinstance(f, Next):
        return "X " + print_tcq(f.arg)
    if isinstance(f, LOr):
        return f"({print_tcq(f.left)} | {print_tcq(f.right)})"
    return f"({print_tcq(f.left)} U {print_tcq(f.right)})"


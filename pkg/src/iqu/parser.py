"""Concrete syntax for IQu: lexer, recursive-descent parser, printer.

Operator precedence, loosest first::

    ;  (right)   <   :=  <|   <   ::  (left)   <   ||  (left)
       <   application (left)   <   read reverse csize rsize meas^N succ pred
       <   atoms

``fun``, ``cnew``, ``qnew``, ``while`` and ``if`` are prefix forms that
extend as far to the right as they can; ``while ... do Q`` and
``if ... else R`` stop the body at ``;``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import IQuError
from .quantum import GATES
from .syntax import (
    CIRC, CMD, CVAR, MAX_NAT, NAT, QVAR, Abs, App, Arrow, Assign, CNew, CSize,
    Fix, Gate, Ground, If, Loc, Meas, Num, ParComp, Pred, QApply, QNew, Read,
    Reverse, RSize, Seq, SeqComp, Skip, Succ, Term, Type, Var, While, unwind,
)

KEYWORDS = frozenset(
    "skip while do if then else read cnew qnew in meas reverse csize rsize fix fun".split()
)
SYMBOLS = (":=", "<|", "::", "||", "->", ";", "^", "(", ")", ".", ":", "[", "]")
CONSTANTS = {"succ": Succ, "pred": Pred}
TYPE_NAMES = {"Nat": NAT, "cVar": CVAR, "qVar": QVAR, "cmd": CMD, "circ": CIRC}


@dataclass(frozen=True)
class Position:
    offset: int
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | nat | symbol | eof
    lexeme: str
    pos: Position

    def __str__(self):
        return "end of input" if self.kind == "eof" else repr(self.lexeme)


class ParseError(IQuError):
    def __init__(self, pos: Position, expected, found: str):
        self.pos = pos
        self.expected = frozenset(expected)
        self.found = found
        want = ", ".join(sorted(self.expected)) or "?"
        super().__init__(f"{pos}: expected {want}, found {found}")


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>--[^\n]*)"
    r"|(?P<nat>[0-9]+)|(?P<word>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>:=|<\||::|\|\||->|[;^().:\[\]])"
)


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    i = 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        pos = Position(i, line, i - line_start + 1)
        if m is None:
            raise ParseError(pos, {"token"}, repr(source[i]))
        text = m.group()
        kind = m.lastgroup
        if kind == "word":
            tokens.append(Token("keyword" if text in KEYWORDS else "ident", text, pos))
        elif kind == "nat":
            tokens.append(Token("nat", text, pos))
        elif kind == "sym":
            tokens.append(Token("symbol", text, pos))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = i + text.rfind("\n") + 1
        i = m.end()
    tokens.append(Token("eof", "", Position(len(source), line, len(source) - line_start + 1)))
    return tokens


_OPERAND_KEYWORDS = frozenset(
    "skip read reverse csize rsize meas fix fun cnew qnew while if".split()
)


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        # id(node) -> source position; nodes are kept alive by the tree
        self.positions: dict[int, Position] = {}

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def at(self, lexeme: str) -> bool:
        return self.tok.kind in ("symbol", "keyword") and self.tok.lexeme == lexeme

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            raise ParseError(self.tok.pos, {repr(lexeme)}, str(self.tok))
        return self.advance()

    def expect_kind(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise ParseError(self.tok.pos, {kind}, str(self.tok))
        return self.advance()

    def mark(self, node, pos: Position):
        self.positions.setdefault(id(node), pos)
        return node

    def starts_operand(self) -> bool:
        t = self.tok
        if t.kind in ("nat", "ident"):
            return True
        if t.kind == "keyword":
            return t.lexeme in _OPERAND_KEYWORDS
        return t.kind == "symbol" and t.lexeme == "("

    # -- entry points

    def program(self) -> Term:
        t = self.seq()
        if self.tok.kind != "eof":
            raise ParseError(self.tok.pos, {"';'", "end of input"}, str(self.tok))
        return t

    # -- precedence ladder

    def seq(self) -> Term:
        pos = self.tok.pos
        first = self.assign()
        if self.at(";"):
            self.advance()
            return self.mark(Seq(first, self.seq()), pos)
        return first

    def assign(self) -> Term:
        pos = self.tok.pos
        lhs = self.comp()
        if self.at(":="):
            self.advance()
            return self.mark(Assign(lhs, self.comp()), pos)
        if self.at("<|"):
            self.advance()
            return self.mark(QApply(lhs, self.comp()), pos)
        return lhs

    def comp(self) -> Term:
        pos = self.tok.pos
        t = self.par()
        while self.at("::"):
            self.advance()
            t = self.mark(SeqComp(t, self.par()), pos)
        return t

    def par(self) -> Term:
        pos = self.tok.pos
        t = self.app()
        while self.at("||"):
            self.advance()
            t = self.mark(ParComp(t, self.app()), pos)
        return t

    def app(self) -> Term:
        pos = self.tok.pos
        t = self.unary()
        while self.starts_operand():
            t = self.mark(App(t, self.unary()), pos)
        return t

    def unary(self) -> Term:
        tok = self.tok
        pos = tok.pos
        if tok.kind == "keyword" and tok.lexeme in ("read", "reverse", "csize", "rsize"):
            self.advance()
            node = {"read": Read, "reverse": Reverse, "csize": CSize, "rsize": RSize}[tok.lexeme]
            return self.mark(node(self.unary()), pos)
        if self.at("meas"):
            self.advance()
            self.expect("^")
            if self.tok.kind == "nat":
                count = self.numeral()
            elif self.at("("):
                self.advance()
                count = self.seq()
                self.expect(")")
            else:
                raise ParseError(self.tok.pos, {"nat", "'('"}, str(self.tok))
            return self.mark(Meas(count, self.unary()), pos)
        if tok.kind == "ident" and tok.lexeme in CONSTANTS:
            self.advance()
            const = self.mark(CONSTANTS[tok.lexeme](), pos)
            if self.starts_operand():
                return self.mark(App(const, self.unary()), pos)
            return const
        return self.atom()

    def numeral(self) -> Num:
        tok = self.expect_kind("nat")
        n = int(tok.lexeme)
        if n > MAX_NAT:
            raise ParseError(tok.pos, {"numeral below 2^64"}, tok.lexeme)
        return self.mark(Num(n), tok.pos)

    def atom(self) -> Term:
        tok = self.tok
        pos = tok.pos
        if tok.kind == "nat":
            return self.numeral()
        if tok.kind == "ident":
            self.advance()
            if self.at("^"):
                return self.gate(tok)
            return self.mark(Var(tok.lexeme), pos)
        if self.at("("):
            self.advance()
            t = self.seq()
            self.expect(")")
            return t
        if self.at("skip"):
            self.advance()
            return self.mark(Skip(), pos)
        if self.at("fix"):
            self.advance()
            at = None
            if self.at("["):
                self.advance()
                at = self.type_()
                self.expect("]")
            return self.mark(Fix(at), pos)
        if self.at("fun"):
            self.advance()
            name = self.expect_kind("ident").lexeme
            self.expect(":")
            ann = self.type_()
            self.expect(".")
            return self.mark(Abs(name, ann, self.seq()), pos)
        if self.at("cnew") or self.at("qnew"):
            node = CNew if self.advance().lexeme == "cnew" else QNew
            name = self.expect_kind("ident").lexeme
            self.expect(":=")
            init = self.seq()
            self.expect("in")
            return self.mark(node(name, init, self.seq()), pos)
        if self.at("while"):
            self.advance()
            guard = self.seq()
            self.expect("do")
            return self.mark(While(guard, self.assign()), pos)
        if self.at("if"):
            self.advance()
            if self.at(")"):
                return self.mark(If(), pos)
            guard = self.seq()
            self.expect("then")
            left = self.seq()
            self.expect("else")
            right = self.assign()
            head = self.mark(If(), pos)
            return self.mark(App(App(App(head, guard), left), right), pos)
        raise ParseError(pos, {"term"}, str(tok))

    def gate(self, name_tok: Token) -> Gate:
        self.expect("^")
        arity_tok = self.expect_kind("nat")
        arity = int(arity_tok.lexeme)
        g = GATES.get(name_tok.lexeme)
        if g is None:
            raise ParseError(name_tok.pos, {"gate name"}, repr(name_tok.lexeme))
        if g.arity != arity:
            raise ParseError(arity_tok.pos, {f"arity {g.arity} for {g.name}"}, arity_tok.lexeme)
        return self.mark(Gate(g.name, arity), name_tok.pos)

    def type_(self) -> Type:
        if self.at("("):
            self.advance()
            t = self.type_()
            self.expect(")")
        else:
            tok = self.tok
            if tok.kind != "ident" or tok.lexeme not in TYPE_NAMES:
                raise ParseError(tok.pos, set(TYPE_NAMES) | {"'('"}, str(tok))
            self.advance()
            t = TYPE_NAMES[tok.lexeme]
        if self.at("->"):
            self.advance()
            return Arrow(t, self.type_())
        return t


def _tokens(source_or_tokens) -> list[Token]:
    if isinstance(source_or_tokens, str):
        return tokenize(source_or_tokens)
    return list(source_or_tokens)


def parse_term(source_or_tokens: Union[str, list[Token]]) -> Term:
    return Parser(_tokens(source_or_tokens)).program()


def parse_with_positions(source: str) -> tuple[Term, dict[int, Position]]:
    p = Parser(tokenize(source))
    term = p.program()
    return term, p.positions


def parse_type(source: str) -> Type:
    p = Parser(tokenize(source))
    t = p.type_()
    if p.tok.kind != "eof":
        raise ParseError(p.tok.pos, {"end of input"}, str(p.tok))
    return t


# ---------------------------------------------------------------- printer

SEQ, ASSIGN, COMP, PAR, APP, UNARY, ATOM = range(7)


def format_type(t: Type) -> str:
    if isinstance(t, Ground):
        return t.name
    dom = format_type(t.domain)
    if isinstance(t.domain, Arrow):
        dom = f"({dom})"
    return f"{dom} -> {format_type(t.codomain)}"


def format_term(t: Term) -> str:
    """Single-line concrete syntax that parses back to ``t``."""
    return _fmt(t, SEQ, True)


def _fmt(t: Term, level: int, tail: bool) -> str:
    own, is_open = _shape(t)
    wrap = own < level or (is_open and not tail)
    inner_tail = True if wrap else tail
    text = _body(t, inner_tail)
    return f"({text})" if wrap else text


def _body_level(body: Term) -> int:
    # a sequence under cnew/qnew is parenthesized for readability
    return ASSIGN if isinstance(body, Seq) else SEQ


def _is_if3(t: Term) -> bool:
    head, args = unwind(t)
    return isinstance(head, If) and len(args) == 3


def _shape(t: Term) -> tuple[int, bool]:
    """(precedence level, is an open prefix form)."""
    match t:
        case Seq():
            return SEQ, False
        case Assign() | QApply():
            return ASSIGN, False
        case SeqComp():
            return COMP, False
        case ParComp():
            return PAR, False
        case App(Succ() | Pred(), _):
            return APP, False
        case App():
            return (ATOM, True) if _is_if3(t) else (APP, False)
        case Read() | Reverse() | CSize() | RSize() | Meas():
            return UNARY, False
        case Abs() | CNew() | QNew() | While():
            return ATOM, True
        case _:
            return ATOM, False


def _body(t: Term, tail: bool) -> str:
    match t:
        case Var(name):
            return name
        case Num(n):
            return str(n)
        case Skip():
            return "skip"
        case Succ():
            return "(succ)"
        case Pred():
            return "(pred)"
        case If():
            return "(if)"
        case Fix(None):
            return "fix"
        case Fix(at):
            return f"fix[{format_type(at)}]"
        case Gate(sym, k):
            return f"{sym}^{k}"
        case Loc(loc):
            return f"<{loc}>"
        case Seq(a, b):
            return f"{_fmt(a, ASSIGN, False)}; {_fmt(b, SEQ, tail)}"
        case Assign(a, b):
            return f"{_fmt(a, COMP, False)} := {_fmt(b, COMP, tail)}"
        case QApply(a, b):
            return f"{_fmt(a, COMP, False)} <| {_fmt(b, COMP, tail)}"
        case SeqComp(a, b):
            # parallel operands keep their parentheses for readability
            left = APP if isinstance(a, ParComp) else COMP
            right = APP if isinstance(b, ParComp) else PAR
            return f"{_fmt(a, left, False)} :: {_fmt(b, right, tail)}"
        case ParComp(a, b):
            return f"{_fmt(a, PAR, False)} || {_fmt(b, APP, tail)}"
        case App(Succ(), a):
            return f"succ {_fmt(a, ATOM, tail)}"
        case App(Pred(), a):
            return f"pred {_fmt(a, ATOM, tail)}"
        case App(f, a):
            if _is_if3(t):
                _, (g, left, right) = unwind(t)
                return (
                    f"if {_fmt(g, SEQ, True)} then {_fmt(left, SEQ, True)} "
                    f"else {_fmt(right, ASSIGN, tail)}"
                )
            # arguments are always atomic so call sites read unambiguously
            return f"{_fmt(f, APP, False)} {_fmt(a, ATOM, False)}"
        case Read(a):
            return f"read {_fmt(a, UNARY, tail)}"
        case Reverse(a):
            return f"reverse {_fmt(a, UNARY, tail)}"
        case CSize(a):
            return f"csize {_fmt(a, UNARY, tail)}"
        case RSize(a):
            return f"rsize {_fmt(a, UNARY, tail)}"
        case Meas(count, target):
            n = str(count.n) if isinstance(count, Num) else f"({_fmt(count, SEQ, True)})"
            return f"meas^{n} {_fmt(target, UNARY, tail)}"
        case Abs(x, ann, body):
            return f"fun {x}:{format_type(ann)} . {_fmt(body, SEQ, tail)}"
        case CNew(x, init, body):
            return f"cnew {x} := {_fmt(init, SEQ, True)} in {_fmt(body, _body_level(body), tail)}"
        case QNew(x, size, body):
            return f"qnew {x} := {_fmt(size, SEQ, True)} in {_fmt(body, _body_level(body), tail)}"
        case While(g, body):
            return f"while {_fmt(g, SEQ, True)} do {_fmt(body, ASSIGN, tail)}"
    raise TypeError(f"not a term: {t!r}")

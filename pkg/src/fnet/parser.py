"""Recursive-descent parser for the function-net (``.fnet``) and view (``.fview``) languages.

Both parsers report syntax errors as P001 diagnostics and recover at the next
declaration keyword, so one bad line does not hide the rest of the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Generic, TypeVar

from . import diagnostics as diag
from .diagnostics import Diagnostic, Span, sort_diagnostics
from .syntax import (
    BlockDecl,
    BodyDecl,
    ConnectDecl,
    ContainsDecl,
    Dotted,
    NetFragment,
    PortDecl,
    SignalDecl,
    TopDecl,
    TypeDecl,
    VBlockDecl,
    VConnectDecl,
    ViewFragment,
    ViewItem,
)

KEYWORDS = frozenset(
    {"signal", "type", "block", "port", "in", "out", "connect", "view", "env", "contains"}
)
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

MAX_SYNTAX_ERRORS = 50
MAX_NESTING = 200

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<open_comment>/\*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>->|<<|>>|[{}\[\]:,.])
    """,
    re.VERBOSE | re.DOTALL,
)

_NET_TOP = frozenset({"signal", "type", "block", "connect"})
_VIEW_ITEMS = frozenset({"env", "block", "contains", "connect"})


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text)) and text not in KEYWORDS


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "punct", "eof"
    value: str
    line: int
    col: int
    start: int
    end: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return f"'{self.value}'"


class _SyntaxError(Exception):
    def __init__(self, token: Token, message: str) -> None:
        super().__init__(message)
        self.token = token
        self.message = message


def tokenize(text: str, filename: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    problems: list[Diagnostic] = []
    line, line_start, pos = 1, 0, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            problems.append(
                diag.make("P001", Span(filename, line, col, pos, pos + 1),
                          f"unexpected character {text[pos]!r}")
            )
            end = pos + 1
        else:
            kind = m.lastgroup
            end = m.end()
            value = m.group()
            if kind == "open_comment":
                problems.append(
                    diag.make("P001", Span(filename, line, col, pos, n), "unterminated block comment")
                )
                end = n
            elif kind == "ident":
                tokens.append(Token("kw" if value in KEYWORDS else "ident", value, line, col, pos, end))
            elif kind == "punct":
                tokens.append(Token("punct", value, line, col, pos, end))
        newlines = text.count("\n", pos, end)
        if newlines:
            line += newlines
            line_start = text.rindex("\n", pos, end) + 1
        pos = end
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos, pos))
    return tokens, problems


T = TypeVar("T")


@dataclass
class Parsed(Generic[T]):
    """Parse outcome: ``fragment`` is None whenever any P001 was reported."""

    fragment: T | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.fragment is not None


class _Parser:
    def __init__(self, text: str, filename: str) -> None:
        self.filename = filename
        self.tokens, self.diagnostics = tokenize(text, filename)
        self.pos = 0
        self.nesting = 0
        # brace depth in front of each token, used to pick recovery points
        self.depth: list[int] = []
        d = 0
        for tok in self.tokens:
            self.depth.append(d)
            if tok.value == "{" and tok.kind == "punct":
                d += 1
            elif tok.value == "}" and tok.kind == "punct":
                d = max(0, d - 1)

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, value: str) -> bool:
        tok = self.tok
        return tok.kind in ("kw", "punct") and tok.value == value

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, value: str) -> Token:
        if not self.at(value):
            raise _SyntaxError(self.tok, f"expected '{value}', found {self.tok.describe()}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        tok = self.tok
        if tok.kind != "ident":
            raise _SyntaxError(tok, f"expected {what}, found {tok.describe()}")
        self.advance()
        return tok.value

    def span_from(self, first: Token) -> Span:
        last = self.tokens[self.pos - 1] if self.pos > 0 else first
        return Span(self.filename, first.line, first.col, first.start, max(first.end, last.end))

    def error(self, exc: _SyntaxError) -> None:
        t = exc.token
        self.diagnostics.append(
            diag.make("P001", Span(self.filename, t.line, t.col, t.start, t.end), exc.message)
        )

    def too_many_errors(self) -> bool:
        return len(self.diagnostics) >= MAX_SYNTAX_ERRORS

    def recover(self, start: int, error_at: int, keywords: frozenset[str], depth: int) -> bool:
        """Skip to the next keyword in ``keywords`` at brace depth ``depth``."""
        j = max(error_at, start + 1)
        while j < len(self.tokens):
            tok = self.tokens[j]
            if tok.kind == "eof":
                break
            if tok.kind == "kw" and tok.value in keywords and self.depth[j] == depth:
                self.pos = j
                return True
            if self.depth[j] < depth:
                self.pos = j
                return False
            j += 1
        self.pos = len(self.tokens) - 1
        return False

    def enter(self) -> None:
        self.nesting += 1
        if self.nesting > MAX_NESTING:
            raise _SyntaxError(self.tok, f"nesting deeper than {MAX_NESTING} levels")

    def leave(self) -> None:
        self.nesting -= 1

    # -- shared productions ------------------------------------------------
    def dotted(self) -> Dotted:
        parts = [self.ident("name")]
        while self.at("."):
            self.advance()
            parts.append(self.ident("name after '.'"))
        return tuple(parts)

    def stereotype(self) -> str | None:
        if not self.at("<<"):
            return None
        self.advance()
        # between guillemets any word is a name, e.g. <<signal>> or <<in>>
        if self.tok.kind == "kw":
            name = self.advance().value
        else:
            name = self.ident("stereotype name")
        self.expect(">>")
        return name

    def signal_list(self) -> frozenset[str]:
        if not self.at(":"):
            return frozenset()
        self.advance()
        self.expect("[")
        names = [self.ident("signal name")]
        while self.at(","):
            self.advance()
            names.append(self.ident("signal name"))
        self.expect("]")
        return frozenset(names)

    def connect_parts(self) -> tuple[Dotted, Dotted, frozenset[str], str | None]:
        self.expect("connect")
        source = self.dotted()
        self.expect("->")
        target = self.dotted()
        signals = self.signal_list()
        return source, target, signals, self.stereotype()

    # -- net productions -------------------------------------------------------
    def net_file(self) -> NetFragment:
        fragment = NetFragment(file=self.filename)
        while self.tok.kind != "eof" and not self.too_many_errors():
            start = self.pos
            try:
                fragment.decls.append(self.top_decl())
            except _SyntaxError as exc:
                self.error(exc)
                self.nesting = 0
                self.recover(start, self.pos, _NET_TOP, 0)
        return fragment

    def top_decl(self) -> TopDecl:
        tok = self.tok
        if self.at("signal"):
            self.advance()
            name = self.ident("signal name")
            value_type = None
            if self.at(":"):
                self.advance()
                value_type = self.ident("signal value type")
            return SignalDecl(name, value_type, self.span_from(tok))
        if self.at("type"):
            self.advance()
            name = self.ident("type name")
            body = self.block_body()
            if body is None:
                raise _SyntaxError(self.tok, f"expected '{{' after type name, found {self.tok.describe()}")
            return TypeDecl(name, body, self.span_from(tok))
        if self.at("block"):
            return self.block_decl()
        if self.at("connect"):
            return self.connect_decl()
        raise _SyntaxError(tok, f"expected a declaration, found {tok.describe()}")

    def block_decl(self) -> BlockDecl:
        first = self.expect("block")
        name = self.ident("block name")
        type_ref = None
        if self.at(":"):
            self.advance()
            type_ref = self.ident("type name")
        body = self.block_body() or []
        return BlockDecl(name, type_ref, body, self.span_from(first))

    def block_body(self) -> list[BodyDecl] | None:
        if not self.at("{"):
            return None
        self.advance()
        self.enter()
        body: list[BodyDecl] = []
        while not self.at("}"):
            if self.at("block"):
                body.append(self.block_decl())
            elif self.at("port"):
                body.append(self.port_decl())
            elif self.at("connect"):
                body.append(self.connect_decl())
            else:
                raise _SyntaxError(self.tok, f"expected 'block', 'port', 'connect' or '}}', found {self.tok.describe()}")
        self.advance()
        self.leave()
        return body

    def port_decl(self) -> PortDecl:
        first = self.expect("port")
        if self.at("in") or self.at("out"):
            direction = self.advance().value
        else:
            raise _SyntaxError(self.tok, f"expected 'in' or 'out', found {self.tok.describe()}")
        name = self.ident("port name")
        return PortDecl(direction, name, self.stereotype(), self.span_from(first))

    def connect_decl(self) -> ConnectDecl:
        first = self.tok
        source, target, signals, stereo = self.connect_parts()
        return ConnectDecl(source, target, signals, stereo, self.span_from(first))

    # -- view productions ------------------------------------------------------
    def view_file(self) -> ViewFragment | None:
        first = self.tok
        try:
            self.expect("view")
            name = self.ident("view name")
            self.expect("{")
        except _SyntaxError as exc:
            self.error(exc)
            return None
        view = ViewFragment(name, [], self.filename)
        closed = False
        while not self.too_many_errors():
            start = self.pos
            try:
                if self.at("}") and self.depth[self.pos] == 1:
                    self.advance()
                    closed = True
                    break
                view.items.append(self.view_item())
            except _SyntaxError as exc:
                self.error(exc)
                self.nesting = 0
                if not self.recover(start, self.pos, _VIEW_ITEMS, 1):
                    if self.at("}"):
                        self.advance()
                        closed = True
                    break
        if closed and self.tok.kind != "eof" and not self.too_many_errors():
            self.error(_SyntaxError(self.tok, f"unexpected {self.tok.describe()} after view"))
        view.span = self.span_from(first)
        return view

    def view_item(self) -> ViewItem:
        first = self.tok
        if self.at("env") or self.at("block"):
            env = False
            if self.at("env"):
                self.advance()
                env = True
            self.expect("block")
            name = self.dotted()
            return VBlockDecl(name, env, self.stereotype(), self.span_from(first))
        if self.at("contains"):
            self.advance()
            outer = self.dotted()
            self.expect("{")
            self.enter()
            body: list[ViewItem] = []
            while not self.at("}"):
                body.append(self.view_item())
            self.advance()
            self.leave()
            return ContainsDecl(outer, body, self.span_from(first))
        if self.at("connect"):
            source, target, signals, stereo = self.connect_parts()
            return VConnectDecl(source, target, signals, stereo, self.span_from(first))
        raise _SyntaxError(first, f"expected 'block', 'env', 'contains', 'connect' or '}}', found {first.describe()}")


def parse_net_source(text: str, filename: str = "<memory>") -> Parsed[NetFragment]:
    parser = _Parser(text, filename)
    fragment = parser.net_file()
    problems = sort_diagnostics(parser.diagnostics)[:MAX_SYNTAX_ERRORS]
    return Parsed(None if problems else fragment, problems)


def parse_view_source(text: str, filename: str = "<memory>") -> Parsed[ViewFragment]:
    parser = _Parser(text, filename)
    fragment = parser.view_file()
    if fragment is None and not parser.diagnostics:
        parser.error(_SyntaxError(parser.tok, "expected 'view'"))
    problems = sort_diagnostics(parser.diagnostics)[:MAX_SYNTAX_ERRORS]
    return Parsed(None if problems else fragment, problems)

"""Event-pattern language: AST, parser and canonical printer.

Grammar (ASCII or Unicode operators)::

    file          := definition+
    definition    := IDENT ":=" or_expr
    or_expr       := and_expr (("OR" | "∨") and_expr)*
    and_expr      := unary (("AND" | "∧") unary)*
    unary         := ("NOT" | "¬") unary
                   | "DELAY" "(" or_expr "," NUMBER ("s"|"m"|"h"|"d") ")"
                   | primary
    primary       := "(" or_expr ")" | comparison | detector_call | IDENT
    comparison    := IDENT (">"|">="|"<"|"<="|"≥"|"≤") NUMBER [UNIT]
    detector_call := DETECTOR "(" IDENT ("," IDENT "=" NUMBER)* ")"

``#`` starts a comment.  Identifiers may contain ``.`` before a digit, which
is dropped (``PM2.5`` reads as ``PM25``).  Chains of AND/OR flatten into one
n-ary node; parenthesised groups stay nested.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .detectors import DETECTORS
from .errors import DuplicateDefinition, PatternSyntaxError, UnknownDetector


@dataclass(frozen=True)
class Comparison:
    stream: str
    op: str
    value: float
    unit: str | None = None


@dataclass(frozen=True)
class DetectorCall:
    name: str
    stream: str
    kwargs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kwargs", tuple((str(k), float(v)) for k, v in self.kwargs))


@dataclass(frozen=True)
class EventRef:
    event_type: str


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


@dataclass(frozen=True)
class Delay:
    child: "Node"
    duration: int

    def __post_init__(self):
        if int(self.duration) != self.duration or self.duration <= 0:
            raise ValueError(f"delay must be a positive whole number of seconds, got {self.duration!r}")
        object.__setattr__(self, "duration", int(self.duration))


Node = Union[Comparison, DetectorCall, EventRef, Not, And, Or, Delay]


@dataclass(frozen=True)
class Definition:
    name: str
    body: Node


def walk(node: Node):
    """Yield every node of the tree, parents first."""
    yield node
    if isinstance(node, (Not, Delay)):
        yield from walk(node.child)
    elif isinstance(node, (And, Or)):
        for c in node.children:
            yield from walk(c)


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<define>:=)
  | (?P<cmp>>=|<=|>|<|≥|≤)
  | (?P<punct>[(),=%])
  | (?P<uand>∧)
  | (?P<uor>∨)
  | (?P<unot>¬)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z](?:[A-Za-z0-9_]|-(?=[A-Za-z0-9])|\.(?=\d))*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"AND": "AND", "OR": "OR", "NOT": "NOT", "DELAY": "DELAY"}
_UNICODE_OPS = {"uand": "AND", "uor": "OR", "unot": "NOT"}
_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}
_CMP_CANON = {"≥": ">=", "≤": "<="}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise PatternSyntaxError(f"unexpected character {text[pos]!r}", line, col, token=text[pos])
        kind = m.lastgroup
        raw = m.group()
        pos = m.end()
        if kind == "nl":
            line += 1
            line_start = pos
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "ident":
            if raw in KEYWORDS:
                tokens.append(Token(KEYWORDS[raw], raw, raw, line, col))
            else:
                tokens.append(Token("IDENT", raw.replace(".", ""), raw, line, col))
        elif kind in _UNICODE_OPS:
            tokens.append(Token(_UNICODE_OPS[kind], raw, raw, line, col))
        elif kind == "number":
            tokens.append(Token("NUMBER", float(raw), raw, line, col))
        elif kind == "cmp":
            tokens.append(Token("CMP", _CMP_CANON.get(raw, raw), raw, line, col))
        elif kind == "define":
            tokens.append(Token(":=", raw, raw, line, col))
        else:
            tokens.append(Token(raw, raw, raw, line, col))
    tokens.append(Token("EOF", None, "<end of input>", line, pos - line_start + 1))
    return tokens


# -- parser ------------------------------------------------------------------

_PRIMARY_START = ("(", "IDENT", "NOT", "DELAY")


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def fail(self, expected, message=None):
        t = self.tok
        msg = message or f"unexpected {t.text!r}"
        raise PatternSyntaxError(msg, t.line, t.column, expected, t.text)

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail((kind,))
        t = self.tok
        self.i += 1
        return t

    def file(self) -> list:
        defs = []
        seen = set()
        if self.tok.kind == "EOF":
            self.fail(("IDENT",), "empty definition file")
        while self.tok.kind != "EOF":
            d = self.definition()
            if d.name in seen:
                raise DuplicateDefinition(f"definition {d.name!r} appears more than once")
            seen.add(d.name)
            defs.append(d)
        return defs

    def definition(self) -> Definition:
        name = self.tok
        if name.kind != "IDENT" or "-" in name.value:
            self.fail(("IDENT",))
        self.i += 1
        self.expect(":=")
        body = self.or_expr()
        if self.tok.kind not in ("EOF", "IDENT"):
            self.fail(("AND", "OR", "IDENT", "EOF"))
        return Definition(name.value, body)

    def or_expr(self) -> Node:
        children = [self.and_expr()]
        while self.tok.kind == "OR":
            self.i += 1
            children.append(self.and_expr())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def and_expr(self) -> Node:
        children = [self.unary()]
        while self.tok.kind == "AND":
            self.i += 1
            children.append(self.unary())
        return children[0] if len(children) == 1 else And(tuple(children))

    def unary(self) -> Node:
        kind = self.tok.kind
        if kind == "NOT":
            self.i += 1
            return Not(self.unary())
        if kind == "DELAY":
            self.i += 1
            self.expect("(")
            child = self.or_expr()
            self.expect(",")
            duration = self.duration()
            self.expect(")")
            return Delay(child, duration)
        return self.primary()

    def duration(self) -> int:
        num = self.expect("NUMBER")
        unit = self.tok
        if unit.kind != "IDENT" or unit.value not in _DURATION_UNITS:
            self.fail(tuple(_DURATION_UNITS), "duration needs a unit")
        self.i += 1
        seconds = num.value * _DURATION_UNITS[unit.value]
        if seconds <= 0 or seconds != math.floor(seconds):
            raise PatternSyntaxError(
                "duration must be a positive whole number of seconds", num.line, num.column, token=num.text
            )
        return int(seconds)

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "(":
            self.i += 1
            node = self.or_expr()
            self.expect(")")
            return node
        if t.kind != "IDENT":
            self.fail(_PRIMARY_START)
        nxt = self.peek()
        if nxt.kind == "(":
            return self.detector_call()
        if "-" in t.value:
            self.i += 1
            self.fail(("(",), f"{t.value!r} is only valid as a detector call")
        self.i += 1
        if nxt.kind == "CMP":
            self.i += 1
            number = self.expect("NUMBER")
            unit = None
            if self.tok.kind == "%" or (self.tok.kind == "IDENT" and self.peek().kind != ":="):
                unit = self.tok.value
                self.i += 1
            return Comparison(t.value, nxt.value, number.value, unit)
        return EventRef(t.value)

    def detector_call(self) -> Node:
        name = self.tok
        if name.value not in DETECTORS:
            raise UnknownDetector(
                f"line {name.line}, column {name.column}: unknown detector {name.value!r}"
                f" (known: {', '.join(sorted(DETECTORS))})"
            )
        self.i += 2
        stream = self.expect("IDENT")
        kwargs = []
        while self.tok.kind == ",":
            self.i += 1
            key = self.expect("IDENT")
            self.expect("=")
            kwargs.append((key.value, self.expect("NUMBER").value))
        self.expect(")")
        return DetectorCall(name.value, stream.value, tuple(kwargs))


def parse(text: str) -> list:
    """Parse definition text into a list of :class:`Definition`."""
    return _Parser(text).file()


def parse_expression(text: str) -> Node:
    """Parse a bare expression (no ``NAME :=`` prefix)."""
    p = _Parser(text)
    node = p.or_expr()
    if p.tok.kind != "EOF":
        p.fail(("AND", "OR", "EOF"))
    return node


# -- printer -----------------------------------------------------------------


def format_number(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def format_duration(seconds: int) -> str:
    for unit, size in (("d", 86400), ("h", 3600), ("m", 60)):
        if seconds % size == 0:
            return f"{seconds // size}{unit}"
    return f"{seconds}s"


def format_node(node: Node) -> str:
    if isinstance(node, Comparison):
        out = f"{node.stream} {node.op} {format_number(node.value)}"
        return out + (f" {node.unit}" if node.unit else "")
    if isinstance(node, DetectorCall):
        args = "".join(f", {k}={format_number(v)}" for k, v in node.kwargs)
        return f"{node.name}({node.stream}{args})"
    if isinstance(node, EventRef):
        return node.event_type
    if isinstance(node, Not):
        return f"NOT ({format_node(node.child)})"
    if isinstance(node, Delay):
        return f"DELAY({format_node(node.child)}, {format_duration(node.duration)})"
    if isinstance(node, (And, Or)):
        sep = " AND " if isinstance(node, And) else " OR "
        return sep.join(f"({format_node(c)})" for c in node.children)
    raise TypeError(f"not a pattern node: {node!r}")


def format(d: Definition) -> str:  # noqa: A001 - mirrors parse()
    return f"{d.name} := {format_node(d.body)}"

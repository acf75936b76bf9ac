"""Recursive-descent parser for the expression language.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' signed-integer)?
    atom   := number | identifier | '(' expr ')' | 'sqrt' '(' expr ')'

Decimal literals become exact rationals (``0.01`` is ``1/100``).  A leading
unary minus is accepted on top of the strict grammar so that printed
expressions always re-parse.
"""

from __future__ import annotations

import re
from collections.abc import Iterable
from fractions import Fraction

from .errors import ParseError, UnknownIdentifier
from .expr import Const, Expr, Var, add, mul, neg, power, sqrt

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*|\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Iterable[str] | None):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = None if variables is None else set(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", self.text, pos)

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else neg(t))
        return add(*terms)

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            f = self.factor()
            factors.append(f if op == "*" else power(f, -1))
        return mul(*factors)

    def factor(self) -> Expr:
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return neg(self.factor())
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] in ("+", "-"):
                sign = -1 if self.take()[1] == "-" else 1
            kind, val, pos = self.take()
            if kind != "number" or not val.isdigit():
                raise ParseError("exponent must be an integer", self.text, pos)
            n = sign * int(val)
            if n == 0:
                return Const(1)
            return power(base, n)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "number":
            return Const(Fraction(val))
        if kind == "ident":
            if val == "sqrt":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return sqrt(inner)
            if self.variables is not None and val not in self.variables:
                raise UnknownIdentifier(f"unknown identifier {val!r}", self.text, pos)
            return Var(val)
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", self.text, pos)


def parse(text: str, variables: Iterable[str] | None = None) -> Expr:
    """Parse ``text`` into a canonical expression.

    If ``variables`` is given, any other identifier (apart from ``sqrt``)
    raises :class:`UnknownIdentifier`.
    """
    p = _Parser(text, variables)
    if p.peek()[0] == "end":
        raise ParseError("empty expression", text, 0)
    e = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", text, pos)
    return e

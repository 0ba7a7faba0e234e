"""Text syntax for selection rules.

Grammar, lowest precedence first:

    rule     := impl_seq
    impl_seq := or_expr (("->" | "=>") impl_seq)?      right-associative
    or_expr  := and_expr ("or" and_expr)*
    and_expr := not_expr ("and" not_expr)*
    not_expr := "not" not_expr | atom
    atom     := unit | "(" rule ")"
    unit     := "select" counts "of" varset
    counts   := "{" int ("," int)* "}" | int ".." int
    varset   := "{" name ("," name)* "}" | "{" "}"

Names match [A-Za-z_][A-Za-z0-9_]*. "#" starts a line comment. A rule
document may begin with a "vars: A, B, C" line declaring the universe.
Arrow chains and and/or chains are collected iteratively and folded
afterwards, so long flat rules parse without deep recursion.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .core import ConstraintSet, Universe, VarSet, make_universe
from .errors import ParseError, UnknownVariable
from .rules import And, Implies, Not, Or, RuleExpr, Sequential, Unit, UnitRule


class SourceSpan(NamedTuple):
    """Byte range [start, end) into the rule text."""

    start: int
    end: int


class Token(NamedTuple):
    kind: str
    text: str
    # char offsets; converted to byte offsets only when an error needs them
    cstart: int
    cend: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<arrow>->)
    | (?P<darrow>=>)
    | (?P<dotdot>\.\.)
    | (?P<int>[0-9]+)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<lbrace>\{)
    | (?P<rbrace>\})
    | (?P<lparen>\()
    | (?P<rparen>\))
    | (?P<comma>,)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"select", "of", "and", "or", "not"}


def _byte_span(text: str, cstart: int, cend: int) -> SourceSpan:
    # Only computed when raising; fixtures are ASCII so this is usually identity.
    start = len(text[:cstart].encode("utf-8"))
    end = start + len(text[cstart:cend].encode("utf-8"))
    return SourceSpan(start, end)


def _tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}",
                span=_byte_span(text, pos, pos + 1),
                expected=["a token"],
            )
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            word = m.group()
            if kind == "name" and word in _KEYWORDS:
                kind = word
            tokens.append(Token(kind, word, pos, m.end()))
        pos = m.end()
    tokens.append(Token("eof", "", n, n))
    return tokens


class _Parser:
    def __init__(self, text: str, universe: Universe):
        self.text = text
        self.universe = universe
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {what}", [what], tok)
        return self.advance()

    def fail(self, message: str, expected: list[str], tok: Token | None = None):
        tok = tok or self.peek()
        shown = f", got {tok.text!r}" if tok.text else ", got end of input"
        raise ParseError(
            message + shown,
            span=_byte_span(self.text, tok.cstart, tok.cend),
            expected=expected,
        )

    def parse(self) -> RuleExpr:
        expr = self.impl_seq()
        tok = self.peek()
        if tok.kind != "eof":
            self.fail("trailing input after rule", ["end of input"], tok)
        return expr

    def impl_seq(self) -> RuleExpr:
        # Collect the whole arrow chain, then fold from the right.
        parts = [self.or_expr()]
        ops = []
        while self.peek().kind in ("arrow", "darrow"):
            ops.append(self.advance().kind)
            parts.append(self.or_expr())
        expr = parts[-1]
        for i in range(len(ops) - 1, -1, -1):
            ctor = Implies if ops[i] == "arrow" else Sequential
            expr = ctor(parts[i], expr)
        return expr

    def or_expr(self) -> RuleExpr:
        expr = self.and_expr()
        while self.peek().kind == "or":
            self.advance()
            expr = Or(expr, self.and_expr())
        return expr

    def and_expr(self) -> RuleExpr:
        expr = self.not_expr()
        while self.peek().kind == "and":
            self.advance()
            expr = And(expr, self.not_expr())
        return expr

    def not_expr(self) -> RuleExpr:
        # Count prefix nots iteratively; "not not not ... u" should not recurse.
        nots = 0
        while self.peek().kind == "not":
            self.advance()
            nots += 1
        expr = self.atom()
        for _ in range(nots):
            expr = Not(expr)
        return expr

    def atom(self) -> RuleExpr:
        tok = self.peek()
        if tok.kind == "select":
            return self.unit()
        if tok.kind == "lparen":
            self.advance()
            expr = self.impl_seq()
            self.expect("rparen", "')'")
            return expr
        self.fail("expected a rule", ["'select'", "'('", "'not'"], tok)

    def unit(self) -> RuleExpr:
        self.expect("select", "'select'")
        counts = self.counts()
        self.expect("of", "'of'")
        scope = self.varset()
        return Unit(UnitRule(scope, counts))

    def counts(self) -> ConstraintSet:
        tok = self.peek()
        if tok.kind == "lbrace":
            self.advance()
            values = [self.int_value()]
            while self.peek().kind == "comma":
                self.advance()
                values.append(self.int_value())
            self.expect("rbrace", "'}'")
            return ConstraintSet(frozenset(values))
        if tok.kind == "int":
            lo = self.int_value()
            self.expect("dotdot", "'..'")
            hi_tok = self.peek()
            hi = self.int_value()
            if hi < lo:
                raise ParseError(
                    f"empty count range {lo}..{hi}",
                    span=_byte_span(self.text, tok.cstart, hi_tok.cend),
                    expected=["an upper bound >= the lower bound"],
                )
            return ConstraintSet.closed_range(lo, hi)
        self.fail("expected selection counts", ["'{'", "an integer"], tok)

    def int_value(self) -> int:
        tok = self.expect("int", "an integer")
        return int(tok.text)

    def varset(self) -> VarSet:
        self.expect("lbrace", "'{'")
        if self.peek().kind == "rbrace":
            self.advance()
            return VarSet.empty(self.universe)
        names = [self.name_value()]
        while self.peek().kind == "comma":
            self.advance()
            names.append(self.name_value())
        self.expect("rbrace", "'}'")
        mask = 0
        for name_tok in names:
            try:
                mask |= 1 << self.universe.index(name_tok.text)
            except UnknownVariable:
                raise UnknownVariable(
                    f"unknown variable {name_tok.text!r}",
                    span=_byte_span(self.text, name_tok.cstart, name_tok.cend),
                ) from None
        return VarSet(self.universe, mask)

    def name_value(self) -> Token:
        tok = self.peek()
        # Keywords double as names inside braces would be confusing; require
        # a plain name token here.
        if tok.kind != "name":
            self.fail("expected a variable name", ["a variable name"], tok)
        return self.advance()


def parse_rule(text: str, u: Universe) -> RuleExpr:
    """Parse rule text against a known universe.

    Raises
    ------
    ParseError
        Malformed syntax; carries a byte span and the expected tokens.
    UnknownVariable
        A scope names a covariate outside ``u``; carries the name's span.
    """
    return _Parser(text, u).parse()


_VARS_RE = re.compile(r"^\s*vars\s*:\s*(.*)$")


def read_rule_document(text: str, universe: Universe | None = None) -> tuple[Universe, RuleExpr]:
    """Parse a rule file: optional ``vars:`` preamble, then one rule.

    A supplied ``universe`` wins over the preamble. Without either, there
    is nothing to resolve names against and parsing fails.
    """
    lines = text.split("\n")
    body_start = 0
    declared = None
    for i, line in enumerate(lines):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _VARS_RE.match(stripped)
        if m:
            names = [p.strip() for p in m.group(1).split(",") if p.strip()]
            if not names:
                raise ParseError(
                    "empty vars declaration",
                    span=SourceSpan(0, len(line.encode("utf-8"))),
                    expected=["at least one variable name"],
                )
            declared = make_universe(names)
            body_start = i + 1
        break
    if universe is None:
        universe = declared
    if universe is None:
        raise ParseError(
            "no universe: add a 'vars:' line or pass the variables explicitly",
            span=SourceSpan(0, 0),
            expected=["'vars:' preamble"],
        )
    body = "\n".join(lines[body_start:])
    return universe, parse_rule(body, universe)


# ---------------------------------------------------------------------------
# Pretty-printing

# Precedence levels; higher binds tighter. Arrows are right-associative,
# and/or left-associative.
_LEVEL_ARROW = 1
_LEVEL_OR = 2
_LEVEL_AND = 3
_LEVEL_NOT = 4
_LEVEL_ATOM = 5


def _level(expr: RuleExpr) -> int:
    if isinstance(expr, (Implies, Sequential)):
        return _LEVEL_ARROW
    if isinstance(expr, Or):
        return _LEVEL_OR
    if isinstance(expr, And):
        return _LEVEL_AND
    if isinstance(expr, Not):
        return _LEVEL_NOT
    return _LEVEL_ATOM


def _fmt(expr: RuleExpr) -> str:
    if isinstance(expr, Unit):
        rule = expr.rule
        counts = "{" + ",".join(str(c) for c in sorted(rule.constraint.counts)) + "}"
        scope = "{" + ",".join(rule.scope) + "}"
        return f"select {counts} of {scope}"
    if isinstance(expr, Not):
        return "not " + _child(expr.child, _LEVEL_NOT, strict=False)
    if isinstance(expr, (And, Or)):
        lvl = _LEVEL_AND if isinstance(expr, And) else _LEVEL_OR
        word = " and " if isinstance(expr, And) else " or "
        # Left-associative: a same-level right child must keep its parens.
        return _child(expr.left, lvl, strict=False) + word + _child(expr.right, lvl, strict=True)
    if isinstance(expr, (Implies, Sequential)):
        sym = " -> " if isinstance(expr, Implies) else " => "
        # Right-associative: the left side is the strict one.
        return (
            _child(expr.left, _LEVEL_ARROW, strict=True)
            + sym
            + _child(expr.right, _LEVEL_ARROW, strict=False)
        )
    raise TypeError(f"not a rule expression: {expr!r}")


def _child(expr: RuleExpr, parent_level: int, strict: bool) -> str:
    text = _fmt(expr)
    lvl = _level(expr)
    if lvl < parent_level or (strict and lvl == parent_level):
        return "(" + text + ")"
    return text


def format_rule(expr: RuleExpr) -> str:
    """Canonical text for a rule expression.

    Counts print sorted ascending, scope names in universe index order,
    parentheses only where precedence demands them. Parsing the result
    reproduces ``expr`` structurally.
    """
    return _fmt(expr)

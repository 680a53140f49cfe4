"""Restricted regex ASTs: parsing, canonical printing, length-prior weights.

Supported syntax: literal characters, `\\d` / `[0-9]` (digits), `[a-z]`
(lowercase letters), `.` (whole alphabet), postfix `*`, infix `|` (lowest
precedence), `(...)` grouping, and backslash escapes for the
metacharacters ``[ . * | ( ) \\``.  Patterns are implicitly anchored: a
regex accepts or rejects a whole string.

The canonical printed form uses minimal parenthesization and is the
deduplication key for candidates, so printing is deterministic and
`parse_regex(print_regex(x))` is structurally `x`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .grammar import ALPHA, DIGIT, DOT


class RegexParseError(Exception):
    def __init__(self, message: str, position: int):
        super().__init__("%s (at position %d)" % (message, position))
        self.position = position


@dataclass(frozen=True)
class Literal:
    char: str


@dataclass(frozen=True)
class ClassRef:
    class_id: str


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Alt:
    options: tuple


@dataclass(frozen=True)
class Star:
    inner: "RegexAst"


RegexAst = Union[Literal, ClassRef, Concat, Alt, Star]


def concat(parts) -> RegexAst:
    """Flattening Concat constructor; a single part stays bare."""
    flat = []
    for p in parts:
        if isinstance(p, Concat):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        raise ValueError("empty concatenation")
    if len(flat) == 1:
        return flat[0]
    return Concat(tuple(flat))


def alt(options) -> RegexAst:
    flat = []
    for o in options:
        if isinstance(o, Alt):
            flat.extend(o.options)
        else:
            flat.append(o)
    if not flat:
        raise ValueError("empty alternation")
    if len(flat) == 1:
        return flat[0]
    return Alt(tuple(flat))


def star(inner: RegexAst) -> RegexAst:
    # x** denotes the same language as x*; collapse to keep the AST canonical
    if isinstance(inner, Star):
        return inner
    return Star(inner)


@dataclass(frozen=True)
class TokenWeights:
    """Length-prior parameters: each printed token costs a factor gamma,
    classes are upweighted by xi."""

    gamma: float = 0.0002
    xi: float = 10.0
    operator_weight: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must be in (0,1)")
        if self.xi <= 1.0:
            raise ValueError("xi must be > 1")
        if self.operator_weight <= 0.0:
            raise ValueError("operator_weight must be > 0")


DEFAULT_WEIGHTS = TokenWeights()

# ? and + are not features here; bare occurrences are rejected so PCRE
# habits fail loudly, which makes them escape-required as literals
_METACHARS = "[.*|()\\?+"
_CLASS_TEXT = {DIGIT: "\\d", ALPHA: "[a-z]", DOT: "."}


def literal_text(ch: str) -> str:
    return "\\" + ch if ch in _METACHARS else ch


def class_text(class_id: str) -> str:
    return _CLASS_TEXT.get(class_id, "[:%s:]" % class_id)


def iter_tokens(ast: RegexAst):
    """Yield (kind, text) printed tokens; kind is "lit", "cls" or "op"."""
    if isinstance(ast, Literal):
        yield ("lit", literal_text(ast.char))
    elif isinstance(ast, ClassRef):
        yield ("cls", class_text(ast.class_id))
    elif isinstance(ast, Concat):
        for part in ast.parts:
            if isinstance(part, Alt):
                yield ("op", "(")
                yield from iter_tokens(part)
                yield ("op", ")")
            else:
                yield from iter_tokens(part)
    elif isinstance(ast, Alt):
        first = True
        for option in ast.options:
            if not first:
                yield ("op", "|")
            first = False
            yield from iter_tokens(option)
    elif isinstance(ast, Star):
        if isinstance(ast.inner, (Concat, Alt)):
            yield ("op", "(")
            yield from iter_tokens(ast.inner)
            yield ("op", ")")
        else:
            yield from iter_tokens(ast.inner)
        yield ("op", "*")
    else:
        raise TypeError("not a regex AST node: %r" % (ast,))


def print_regex(ast: RegexAst) -> str:
    return "".join(text for _, text in iter_tokens(ast))


def token_weight_product(ast: RegexAst, weights: TokenWeights = DEFAULT_WEIGHTS) -> float:
    """Log of the product of per-token factors over the printed form.

    Every printed character of a literal token costs gamma (so an escaped
    metacharacter costs gamma^2), a class token costs gamma*xi regardless
    of its printed width, and operator tokens cost gamma*operator_weight.
    """
    log_gamma = math.log(weights.gamma)
    total = 0.0
    for kind, text in iter_tokens(ast):
        if kind == "lit":
            total += log_gamma * len(text)
        elif kind == "cls":
            total += log_gamma + math.log(weights.xi)
        else:
            total += log_gamma + math.log(weights.operator_weight)
    return total


def emission_token_cost(emission, weights: TokenWeights = DEFAULT_WEIGHTS) -> float:
    """Printed-token cost of a rule emission (used as an incremental
    search-steering factor during grammar growth)."""
    if emission.kind == "lit":
        return math.log(weights.gamma) * len(literal_text(emission.value))
    return math.log(weights.gamma) + math.log(weights.xi)


class _Parser:
    def __init__(self, text: str, alphabet: str, known_classes):
        self.text = text
        self.pos = 0
        self.alphabet = alphabet
        self.known_classes = known_classes

    def error(self, message: str, pos: int | None = None):
        raise RegexParseError(message, self.pos if pos is None else pos)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self) -> RegexAst:
        node = self.parse_alt()
        if self.pos != len(self.text):
            self.error("unexpected %r" % self.peek())
        return node

    def parse_alt(self) -> RegexAst:
        options = [self.parse_concat()]
        while self.peek() == "|":
            self.pos += 1
            options.append(self.parse_concat())
        return alt(options)

    def parse_concat(self) -> RegexAst:
        parts = []
        while True:
            ch = self.peek()
            if ch is None or ch in "|)":
                break
            parts.append(self.parse_postfix())
        if not parts:
            self.error("empty alternation arm")
        return concat(parts)

    def parse_postfix(self) -> RegexAst:
        node = self.parse_atom()
        while self.peek() == "*":
            self.pos += 1
            node = star(node)
        return node

    def parse_atom(self) -> RegexAst:
        ch = self.peek()
        start = self.pos
        if ch is None:
            self.error("unexpected end of pattern")
        if ch == "*":
            self.error("dangling '*'")
        if ch in "?+":
            self.error("'%s' is not supported (escape it to match the literal)" % ch)
        if ch == "(":
            self.pos += 1
            node = self.parse_alt()
            if self.peek() != ")":
                self.error("unbalanced '(' opened", start)
            self.pos += 1
            return node
        if ch == ")":
            self.error("unbalanced ')'")
        if ch == "\\":
            self.pos += 1
            nxt = self.peek()
            if nxt is None:
                self.error("trailing backslash", start)
            self.pos += 1
            if nxt == "d":
                return ClassRef(DIGIT)
            if nxt in _METACHARS:
                return Literal(nxt)
            self.error("unknown escape '\\%s'" % nxt, start)
        if ch == "[":
            for token, class_id in (("[a-z]", ALPHA), ("[0-9]", DIGIT)):
                if self.text.startswith(token, self.pos):
                    self.pos += len(token)
                    return ClassRef(class_id)
            if self.text.startswith("[:", self.pos):
                end = self.text.find(":]", self.pos + 2)
                if end > self.pos + 2:
                    name = self.text[self.pos + 2 : end]
                    if name in self.known_classes:
                        self.pos = end + 2
                        return ClassRef(name)
            self.error("unsupported class (use [a-z], [0-9], '.' or escape '[')")
        if ch == ".":
            self.pos += 1
            return ClassRef(DOT)
        if ch not in self.alphabet:
            self.error("character %r outside alphabet" % ch)
        self.pos += 1
        return Literal(ch)


def parse_regex(text: str, registry=None) -> RegexAst:
    """Parse the textual regex syntax into a canonical AST."""
    from .grammar import STANDARD_REGISTRY

    if registry is None:
        registry = STANDARD_REGISTRY
    if not text:
        raise RegexParseError("empty pattern", 0)
    known = {c.id for c in registry.classes}
    return _Parser(text, registry.alphabet, known).parse()

"""Probabilistic regular grammars with uniform rule distributions.

A grammar is a set of right-linear rules over dense nonterminal indices;
S0 (index 0) is always the start symbol.  Every rule emits exactly one
terminal, either a literal character or a member of a named character
class, and optionally continues into another nonterminal.  Rule
probabilities are implicitly uniform per left-hand side; emitting a
specific member of a class carries probability 1/|class|.

Grammars, rules, classes and registries are immutable after construction,
so they can be shared freely across concurrent workers.  Growth happens
by building extended copies (`Grammar.with_rule`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

DEFAULT_ALPHABET = "".join(chr(c) for c in range(0x20, 0x7F))

ALPHA = "ALPHA"
DIGIT = "DIGIT"
DOT = "DOT"


class GrammarError(Exception):
    pass


class DeadEndError(GrammarError):
    """A reachable nonterminal has no rules to rewrite it."""


class BudgetError(GrammarError):
    """Exhaustive enumeration exceeded its expansion budget."""


class GrammarParseError(GrammarError):
    """Textual grammar form could not be parsed."""


@dataclass(frozen=True)
class CharClass:
    """A named, ordered set of terminal characters."""

    id: str
    members: str

    def __post_init__(self):
        if not self.members:
            raise GrammarError("class %r has no members" % self.id)
        if len(set(self.members)) != len(self.members):
            raise GrammarError("class %r has duplicate members" % self.id)

    def __contains__(self, ch: str) -> bool:
        return ch in self.members

    def __len__(self) -> int:
        return len(self.members)


class ClassRegistry:
    """Immutable set of character classes over a fixed alphabet."""

    __slots__ = ("alphabet", "classes", "_by_id", "_containing")

    def __init__(self, alphabet: str, classes: Iterable[CharClass] = ()):
        if len(set(alphabet)) != len(alphabet):
            raise GrammarError("alphabet has duplicate characters")
        self.alphabet = alphabet
        self.classes = tuple(classes)
        by_id = {}
        for cls in self.classes:
            if cls.id in by_id:
                raise GrammarError("duplicate class id %r" % cls.id)
            if not set(cls.members) <= set(alphabet):
                raise GrammarError("class %r leaves the alphabet" % cls.id)
            by_id[cls.id] = cls
        self._by_id = by_id
        containing = {ch: [] for ch in alphabet}
        for cls in self.classes:
            for ch in cls.members:
                containing[ch].append(cls)
        self._containing = {ch: tuple(v) for ch, v in containing.items()}

    def get(self, class_id: str) -> CharClass:
        try:
            return self._by_id[class_id]
        except KeyError:
            raise GrammarError("unknown class id %r" % class_id) from None

    def has(self, class_id: str) -> bool:
        return class_id in self._by_id

    def classes_containing(self, ch: str) -> tuple[CharClass, ...]:
        return self._containing.get(ch, ())

    def __repr__(self):
        return "ClassRegistry(|alphabet|=%d, classes=%s)" % (
            len(self.alphabet),
            [c.id for c in self.classes],
        )


def standard_registry(alphabet: str = DEFAULT_ALPHABET) -> ClassRegistry:
    """ALPHA ([a-z]), DIGIT ([0-9]) and DOT (whole alphabet)."""
    lower = "".join(c for c in "abcdefghijklmnopqrstuvwxyz" if c in alphabet)
    digits = "".join(c for c in "0123456789" if c in alphabet)
    classes = []
    if lower:
        classes.append(CharClass(ALPHA, lower))
    if digits:
        classes.append(CharClass(DIGIT, digits))
    classes.append(CharClass(DOT, alphabet))
    return ClassRegistry(alphabet, classes)


def classless_registry(alphabet: str) -> ClassRegistry:
    return ClassRegistry(alphabet, ())


STANDARD_REGISTRY = standard_registry()


@dataclass(frozen=True)
class Emission:
    """What a rule writes: a literal character or a class reference."""

    kind: str  # "lit" | "cls"
    value: str  # the character / the class id

    @staticmethod
    def lit(ch: str) -> "Emission":
        return Emission("lit", ch)

    @staticmethod
    def cls(class_id: str) -> "Emission":
        return Emission("cls", class_id)

    def matches(self, ch: str, registry: ClassRegistry) -> bool:
        if self.kind == "lit":
            return self.value == ch
        return ch in registry.get(self.value)

    def emit_logprob(self, registry: ClassRegistry) -> float:
        """Log probability of emitting one specific member (0 for literals)."""
        import math

        if self.kind == "lit":
            return 0.0
        return -math.log(len(registry.get(self.value)))


@dataclass(frozen=True)
class Rule:
    """S_lhs -> emission [S_continuation]."""

    lhs: int
    emission: Emission
    continuation: Optional[int] = None


class Grammar:
    """Right-linear grammar with set semantics for rules.

    Rules keep their insertion order (it drives deterministic iteration)
    but compare as a set: two grammars with the same rules in different
    orders are equal.
    """

    __slots__ = ("nonterminal_count", "rules", "registry", "_by_lhs", "_rule_set")

    def __init__(self, nonterminal_count: int, rules: Iterable[Rule], registry: ClassRegistry):
        if nonterminal_count < 1:
            raise GrammarError("grammar needs at least the start nonterminal")
        deduped = []
        seen = set()
        for rule in rules:
            if rule.lhs >= nonterminal_count or rule.lhs < 0:
                raise GrammarError("rule lhs %d out of range" % rule.lhs)
            if rule.continuation is not None and not (0 <= rule.continuation < nonterminal_count):
                raise GrammarError("rule continuation %s out of range" % rule.continuation)
            if rule.emission.kind == "cls":
                registry.get(rule.emission.value)  # raises for unknown ids
            elif rule.emission.value not in registry.alphabet:
                raise GrammarError("literal %r outside alphabet" % rule.emission.value)
            if rule not in seen:
                seen.add(rule)
                deduped.append(rule)
        self.nonterminal_count = nonterminal_count
        self.rules = tuple(deduped)
        self.registry = registry
        self._rule_set = frozenset(deduped)
        by_lhs = [[] for _ in range(nonterminal_count)]
        for rule in self.rules:
            by_lhs[rule.lhs].append(rule)
        self._by_lhs = tuple(tuple(v) for v in by_lhs)

    @property
    def alphabet(self) -> str:
        return self.registry.alphabet

    def rules_for(self, nt: int) -> tuple[Rule, ...]:
        return self._by_lhs[nt]

    def __contains__(self, rule: Rule) -> bool:
        return rule in self._rule_set

    def __eq__(self, other):
        if not isinstance(other, Grammar):
            return NotImplemented
        return (
            self.nonterminal_count == other.nonterminal_count
            and self._rule_set == other._rule_set
        )

    def __hash__(self):
        return hash((self.nonterminal_count, self._rule_set))

    def __repr__(self):
        return "Grammar(%d nonterminals, %d rules)" % (self.nonterminal_count, len(self.rules))

    def with_rule(self, rule: Rule) -> "Grammar":
        """Extended copy; grows the nonterminal count to cover the rule."""
        count = max(
            self.nonterminal_count,
            rule.lhs + 1,
            (rule.continuation + 1) if rule.continuation is not None else 0,
        )
        if rule in self._rule_set and count == self.nonterminal_count:
            return self
        return Grammar(count, self.rules + (rule,), self.registry)

    def fingerprint(self):
        """Hashable identity for grammar-level deduplication."""
        return (self.nonterminal_count, self._rule_set)


def empty_grammar(registry: ClassRegistry = STANDARD_REGISTRY) -> Grammar:
    return Grammar(1, (), registry)


def matching_rules(grammar: Grammar, nt: int, ch: str) -> tuple[Rule, ...]:
    """All rules of `nt` that can emit `ch`, in rule insertion order."""
    if not (0 <= nt < grammar.nonterminal_count):
        raise GrammarError("nonterminal %d out of range" % nt)
    registry = grammar.registry
    return tuple(r for r in grammar.rules_for(nt) if r.emission.matches(ch, registry))


def rule_probability(grammar: Grammar, rule: Rule) -> float:
    """Uniform probability 1/outdegree(lhs)."""
    if rule not in grammar:
        raise GrammarError("rule not in grammar: %r" % (rule,))
    return 1.0 / len(grammar.rules_for(rule.lhs))


def sample_string(grammar: Grammar, rng, max_steps: int = 1000) -> Optional[str]:
    """Sample one string from the grammar's distribution.

    Returns None (divergence signal) when the derivation exceeds
    `max_steps` rule applications.  Raises DeadEndError when the
    derivation reaches a nonterminal with no rules.
    """
    nt = 0
    out = []
    registry = grammar.registry
    for _ in range(max_steps):
        rules = grammar.rules_for(nt)
        if not rules:
            raise DeadEndError("nonterminal S%d has no rules" % nt)
        rule = rules[rng.randrange(len(rules))]
        if rule.emission.kind == "lit":
            out.append(rule.emission.value)
        else:
            members = registry.get(rule.emission.value).members
            out.append(members[rng.randrange(len(members))])
        if rule.continuation is None:
            return "".join(out)
        nt = rule.continuation
    return None


def enumerate_strings(grammar: Grammar, max_len: int, budget: int = 1_000_000) -> dict[str, float]:
    """Exact probability of every derivable string of length <= max_len.

    Brute-force derivation expansion; class emissions expand to each
    member with probability 1/|class|.  Raises BudgetError when the
    number of expansions exceeds `budget`.
    """
    if max_len < 0:
        raise GrammarError("max_len must be >= 0")
    registry = grammar.registry
    out: dict[str, float] = {}
    frontier: dict[tuple[str, int], float] = {("", 0): 1.0}
    expansions = 0
    while frontier:
        nxt: dict[tuple[str, int], float] = {}
        for (prefix, nt), p in frontier.items():
            rules = grammar.rules_for(nt)
            if not rules:
                continue
            rp = p / len(rules)
            for rule in rules:
                if rule.emission.kind == "lit":
                    emissions = ((rule.emission.value, 1.0),)
                else:
                    members = registry.get(rule.emission.value).members
                    share = 1.0 / len(members)
                    emissions = tuple((m, share) for m in members)
                for ch, pe in emissions:
                    expansions += 1
                    if expansions > budget:
                        raise BudgetError("enumeration budget exceeded")
                    s = prefix + ch
                    if rule.continuation is None:
                        if len(s) <= max_len:
                            out[s] = out.get(s, 0.0) + rp * pe
                    elif len(s) < max_len:
                        key = (s, rule.continuation)
                        nxt[key] = nxt.get(key, 0.0) + rp * pe
        frontier = nxt
    return out


# ---------------------------------------------------------------------------
# Textual form: one rule per line, e.g.  S0 -> 'a' S1  /  S0 -> [0-9] S0


_CLASS_TOKENS = {ALPHA: "[a-z]", DIGIT: "[0-9]", DOT: "."}
_RULE_RE = re.compile(r"^S(\d+)\s*->\s*(.+?)(?:\s+S(\d+))?\s*$")


def _format_emission(emission: Emission) -> str:
    if emission.kind == "lit":
        ch = emission.value
        if ch in ("'", "\\"):
            ch = "\\" + ch
        return "'%s'" % ch
    return _CLASS_TOKENS.get(emission.value, "[:%s:]" % emission.value)


def _parse_emission(text: str, registry: ClassRegistry) -> Emission:
    if text.startswith("'") and text.endswith("'") and len(text) >= 3:
        body = text[1:-1]
        if body.startswith("\\") and len(body) == 2:
            body = body[1]
        if len(body) != 1:
            raise GrammarParseError("bad literal token %r" % text)
        return Emission.lit(body)
    for class_id, token in _CLASS_TOKENS.items():
        if text == token:
            return Emission.cls(class_id)
    m = re.fullmatch(r"\[:(\w+):\]", text)
    if m and registry.has(m.group(1)):
        return Emission.cls(m.group(1))
    raise GrammarParseError("bad emission token %r" % text)


def format_grammar(grammar: Grammar) -> str:
    lines = []
    for rule in grammar.rules:
        rhs = _format_emission(rule.emission)
        if rule.continuation is not None:
            rhs += " S%d" % rule.continuation
        lines.append("S%d -> %s" % (rule.lhs, rhs))
    return "\n".join(lines)


def parse_grammar(text: str, registry: ClassRegistry = STANDARD_REGISTRY) -> Grammar:
    rules = []
    count = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _RULE_RE.match(line)
        if not m:
            raise GrammarParseError("line %d: cannot parse rule %r" % (lineno, raw))
        lhs = int(m.group(1))
        emission = _parse_emission(m.group(2).strip(), registry)
        cont = int(m.group(3)) if m.group(3) is not None else None
        rules.append(Rule(lhs, emission, cont))
        count = max(count, lhs + 1, (cont + 1) if cont is not None else 0)
    return Grammar(count, rules, registry)

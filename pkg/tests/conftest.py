import random

import pytest

from regrow.grammar import (
    CharClass,
    ClassRegistry,
    Emission,
    Grammar,
    Rule,
    STANDARD_REGISTRY,
    classless_registry,
)


@pytest.fixture
def fig1_grammar():
    """{S0 -> a S1, S1 -> b, S1 -> b S1}"""
    return Grammar(
        2,
        [
            Rule(0, Emission.lit("a"), 1),
            Rule(1, Emission.lit("b"), None),
            Rule(1, Emission.lit("b"), 1),
        ],
        STANDARD_REGISTRY,
    )


@pytest.fixture
def tiny_registry():
    """Alphabet {a,b,c,d} with one small class."""
    return ClassRegistry("abcd", [CharClass("AB", "ab")])


@pytest.fixture
def ab_registry():
    return classless_registry("ab")


def random_grammar(rng, registry, max_nts=4, max_rules=8):
    """Random grammar where every nonterminal can finish a derivation."""
    n = rng.randint(1, max_nts)
    rules = []
    emissions = [Emission.lit(c) for c in registry.alphabet] + [
        Emission.cls(c.id) for c in registry.classes
    ]
    for nt in range(n):  # guarantee a terminating rule per nonterminal
        rules.append(Rule(nt, rng.choice(emissions), None))
    for _ in range(rng.randint(0, max_rules - n)):
        cont = rng.choice([None] + list(range(n)))
        rules.append(Rule(rng.randrange(n), rng.choice(emissions), cont))
    return Grammar(n, rules, registry)

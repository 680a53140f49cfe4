"""Candidate scoring: length prior, generative likelihood, posterior.

The likelihood of a regex is computed on its canonical grammar (see
`automata.regex_to_grammar`), never on whichever grammar a sampler
happened to produce, so every score is a function of the regex string
alone and duplicate discoveries rescore identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import earley
from .automata import RegexMatcher, regex_to_grammar
from .grammar import ClassRegistry, STANDARD_REGISTRY
from .regex import DEFAULT_WEIGHTS, RegexAst, TokenWeights, print_regex, token_weight_product

STATUS_OK = "ok"
STATUS_NO_CONSISTENT = "no-consistent-candidate"


@dataclass
class Candidate:
    ast: RegexAst
    canonical: str
    log_prior: float
    log_likelihood: Optional[float] = None  # None marks a rejected candidate
    posterior: Optional[float] = None

    @property
    def rejected(self) -> bool:
        return self.log_likelihood is None

    @property
    def log_score(self) -> float:
        if self.log_likelihood is None:
            return float("-inf")
        return self.log_prior + self.log_likelihood


@dataclass
class Ranking:
    candidates: list[Candidate] = field(default_factory=list)
    status: str = STATUS_OK
    inconsistent_dropped: int = 0


def prior(ast: RegexAst, weights: TokenWeights = DEFAULT_WEIGHTS) -> float:
    """Unnormalized log prior, exponential in printed length."""
    return token_weight_product(ast, weights)


def likelihood(ast: RegexAst, data, registry: ClassRegistry = STANDARD_REGISTRY) -> Optional[float]:
    """Sum of per-positive log probabilities under the canonical grammar.

    Returns None (rejected) when the grammar accepts any negative example
    or fails to derive any positive.
    """
    if not data.positives:
        raise ValueError("likelihood needs at least one positive example")
    grammar = regex_to_grammar(ast, registry)
    for neg in data.negatives:
        if earley.accepts(grammar, neg):
            return None
    total = 0.0
    for pos in data.positives:
        result = earley.string_logprob(grammar, pos)
        if not result.derivable:
            return None
        total += result.log_probability
    return total


def score_candidate(
    ast: RegexAst,
    data,
    registry: ClassRegistry = STANDARD_REGISTRY,
    weights: TokenWeights = DEFAULT_WEIGHTS,
) -> Candidate:
    return Candidate(
        ast=ast,
        canonical=print_regex(ast),
        log_prior=prior(ast, weights),
        log_likelihood=likelihood(ast, data, registry),
    )


def normalize_posterior(candidates, data=None, registry: ClassRegistry = STANDARD_REGISTRY) -> Ranking:
    """Drop rejected candidates, normalize, and rank deterministically.

    Callers must already have deduplicated by canonical string.  When
    `data` is given, every survivor is re-checked for consistency through
    the automaton matcher (a second path, independent of the parsing
    route the likelihood used); disagreements are dropped and counted.
    """
    alive = [c for c in candidates if not c.rejected]
    dropped = 0
    if data is not None:
        checked = []
        for c in alive:
            matcher = RegexMatcher(c.ast, registry)
            ok = all(matcher.accepts(p) for p in data.positives) and not any(
                matcher.accepts(n) for n in data.negatives
            )
            if ok:
                checked.append(c)
            else:
                dropped += 1
        alive = checked
    if not alive:
        return Ranking([], STATUS_NO_CONSISTENT, dropped)
    alive.sort(key=lambda c: (-c.log_score, c.canonical))
    peak = alive[0].log_score
    weights = [math.exp(c.log_score - peak) for c in alive]
    total = sum(weights)
    for c, w in zip(alive, weights):
        c.posterior = w / total
    return Ranking(alive, STATUS_OK, dropped)

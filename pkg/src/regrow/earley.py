"""Exact string probabilities under a probabilistic regular grammar.

Because every rule emits exactly one terminal, the probabilistic Earley
chart for this grammar class degenerates to a forward dynamic program
over (position, nonterminal) states; the total derivation probability is
summed over uniform rule choices and 1/|class| class emissions.  The
Earley framing is kept in spirit so a context-free extension can slot in
later without changing callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .grammar import Grammar

_NEG_INF = float("-inf")


def _logaddexp(a: float, b: float) -> float:
    if a == _NEG_INF:
        return b
    if b == _NEG_INF:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


@dataclass(frozen=True)
class ParseResult:
    log_probability: Optional[float]  # None iff the string is underivable
    derivation_count: int
    chart_cells: int  # diagnostic: DP cells visited

    @property
    def derivable(self) -> bool:
        return self.log_probability is not None


def string_logprob(grammar: Grammar, s: str) -> ParseResult:
    """Total probability mass of all derivations of `s`.

    Exact up to floating point; characters outside the alphabet simply
    make the string underivable.  The empty string is underivable by
    construction (every rule emits a character).
    """
    n = len(s)
    if n == 0:
        return ParseResult(None, 0, 0)
    registry = grammar.registry
    # layer: nonterminal -> (scaled probability, derivation count)
    layer = {0: (1.0, 1)}
    log_scale = 0.0
    cells = 0
    total_log = _NEG_INF
    total_count = 0
    for i, ch in enumerate(s):
        last = i == n - 1
        nxt: dict[int, tuple[float, int]] = {}
        for nt, (p, count) in layer.items():
            cells += 1
            rules = grammar.rules_for(nt)
            if not rules:
                continue
            rp = p / len(rules)
            for rule in rules:
                emission = rule.emission
                if emission.kind == "lit":
                    if emission.value != ch:
                        continue
                    w = rp
                else:
                    members = registry.get(emission.value).members
                    if ch not in members:
                        continue
                    w = rp / len(members)
                if rule.continuation is None:
                    if last:
                        total_log = _logaddexp(total_log, math.log(w) + log_scale)
                        total_count += count
                else:
                    old = nxt.get(rule.continuation)
                    if old is None:
                        nxt[rule.continuation] = (w, count)
                    else:
                        nxt[rule.continuation] = (old[0] + w, old[1] + count)
        if not nxt:
            break
        peak = max(v for v, _ in nxt.values())
        if peak < 1e-150:  # rescale so long strings cannot underflow
            log_scale += math.log(peak)
            nxt = {nt: (v / peak, c) for nt, (v, c) in nxt.items()}
        layer = nxt
    if total_log == _NEG_INF:
        return ParseResult(None, 0, cells)
    return ParseResult(total_log, total_count, cells)


def accepts(grammar: Grammar, s: str) -> bool:
    """Boolean membership; same chart without probability arithmetic."""
    n = len(s)
    if n == 0:
        return False
    registry = grammar.registry
    active = {0}
    for i, ch in enumerate(s):
        last = i == n - 1
        nxt = set()
        for nt in active:
            for rule in grammar.rules_for(nt):
                if not rule.emission.matches(ch, registry):
                    continue
                if rule.continuation is None:
                    if last:
                        return True
                elif rule.continuation not in nxt:
                    nxt.add(rule.continuation)
        if not nxt:
            return False
        active = nxt
    return False

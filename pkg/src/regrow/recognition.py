"""Grammar-growing recognition model over recorded random-choice traces.

Starting from a bare start symbol, the model walks the positive example
strings character by character.  At each character it either reuses an
existing rule that can emit the character (with probability alpha_r,
when any such rule of the right arity exists) or samples a new rule: the
emission is drawn from a categorical over the literal itself and every
class containing it (classes upweighted by xi), and the continuation
nonterminal is fresh with probability alpha_n, otherwise a uniformly
chosen existing one.  Class emissions are conditioned on producing the
observed character (a 1/|class| weight factor), and after each positive
string the grammar is checked against every negative example; accepting
one rejects the whole trace.

Every random decision is recorded as an addressed `Choice`, which makes
runs resumable (particle methods advance traces one character at a
time), replayable, and editable (single-site proposals re-execute the
program, reusing recorded values wherever they are still compatible and
drawing fresh ones elsewhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import earley
from .grammar import ClassRegistry, Emission, Grammar, Rule, STANDARD_REGISTRY

SERIAL = "serial"
RANDOM_SERIAL = "random-serial"
PARALLEL = "parallel"
PROCESSING_ORDERS = (SERIAL, RANDOM_SERIAL, PARALLEL)

RUNNING = "running"
COMPLETE = "complete"
REJECTED = "rejected"

KIND_ORDER = "order"
KIND_REUSE_FLIP = "reuse-flip"
KIND_RULE_PICK = "rule-pick"
KIND_CLASS_PICK = "class-pick"
KIND_NT_FLIP = "nt-flip"
KIND_NT_PICK = "nt-pick"
KIND_ALPHA_R = "alpha-r-pick"
KIND_ALPHA_N = "alpha-n-pick"

_NEG_INF = float("-inf")


class PositivesRequiredError(ValueError):
    """The model cannot run without at least one positive example."""


class TraceContractError(Exception):
    """A trace operation was used outside its contract."""


@dataclass(frozen=True)
class RecognitionConfig:
    """Search parameters for one run of the recognition model.

    When `alpha_r_options` / `alpha_n_options` are given, each trace
    draws its own value from the grid as a recorded first choice (so
    resampling and proposal moves explore the grid); otherwise the fixed
    `alpha_r` / `alpha_n` apply.
    """

    alpha_r: float = 0.5
    alpha_n: float = 0.99
    xi: float = 10.0
    registry: ClassRegistry = STANDARD_REGISTRY
    processing_order: str = SERIAL
    alpha_r_options: tuple | None = None
    alpha_n_options: tuple | None = None

    def __post_init__(self):
        if not (0.0 <= self.alpha_r <= 1.0 and 0.0 <= self.alpha_n <= 1.0):
            raise ValueError("alpha_r and alpha_n must be probabilities")
        if self.xi <= 0.0:
            raise ValueError("xi must be > 0")
        if self.processing_order not in PROCESSING_ORDERS:
            raise ValueError("unknown processing order %r" % self.processing_order)
        for options in (self.alpha_r_options, self.alpha_n_options):
            if options is not None and (
                not options or not all(0.0 <= a <= 1.0 for a in options)
            ):
                raise ValueError("alpha option grids must be nonempty probabilities")


@dataclass(frozen=True)
class Choice:
    """One recorded random decision.

    `support`/`probs` describe the full discrete distribution the value
    was drawn from, except for permutation choices (kind "order"), where
    support is the number of examples and the distribution is uniform
    over all permutations.
    """

    address: tuple
    kind: str
    support: tuple
    probs: tuple
    value: object
    log_prob: float


@dataclass(frozen=True)
class Trace:
    choices: tuple
    grammar: Grammar
    positions: tuple  # per example: (next char index, current nonterminal or None)
    order: tuple  # example processing permutation
    turn: int  # round-robin pointer (parallel order)
    log_weight: float
    status: str

    @property
    def log_choice_total(self) -> float:
        return sum(c.log_prob for c in self.choices)

    @property
    def log_joint(self) -> float:
        return self.log_choice_total + self.log_weight

    @property
    def cursor(self) -> Optional[tuple]:
        """(example index, char index, current nonterminal) due next."""
        ex = _due_example(self.positions, self.order, self.turn)
        if ex is None:
            return None
        ci, nt = self.positions[ex]
        return (ex, ci, nt)

    def choice_map(self) -> dict:
        return {c.address: c.value for c in self.choices}


def _due_example(positions, order, turn) -> Optional[int]:
    n = len(order)
    for offset in range(n):
        ex = order[(turn + offset) % n]
        if positions[ex][1] is not None:
            return ex
    return None


def _validate_data(data, registry: ClassRegistry):
    if not data.positives:
        raise PositivesRequiredError("positive examples are required to grow a grammar")
    alphabet = set(registry.alphabet)
    for s in list(data.positives) + list(data.negatives):
        bad = set(s) - alphabet
        if bad:
            raise ValueError("characters outside alphabet: %r" % "".join(sorted(bad)))
    for s in data.positives:
        if not s:
            raise PositivesRequiredError("empty positive strings cannot be derived")


class _Run:
    """Mutable executor shared by grow, step and replay."""

    PROV_SAMPLED = "sampled"
    PROV_GUIDE = "guide"
    PROV_EDIT = "edit"

    def __init__(self, data, config, rng, guide=None, edit=None, snapshot: Trace | None = None):
        self.data = data
        self.config = config
        self.rng = rng
        self.guide = guide or {}
        self.edit_address, self.edit_value = edit if edit else (None, None)
        self.provenance: list[str] = []
        self.fresh_logp = 0.0
        self.consumed: set = set()
        self.alpha_r = config.alpha_r
        self.alpha_n = config.alpha_n
        if snapshot is not None:
            self.choices = list(snapshot.choices)
            self.grammar = snapshot.grammar
            self.positions = list(snapshot.positions)
            self.order = snapshot.order
            self.turn = snapshot.turn
            self.log_weight = snapshot.log_weight
            self.status = snapshot.status
            for choice in self.choices:
                if choice.kind == KIND_ALPHA_R:
                    self.alpha_r = choice.value
                elif choice.kind == KIND_ALPHA_N:
                    self.alpha_n = choice.value
        else:
            _validate_data(data, config.registry)
            self.choices = []
            self.grammar = Grammar(1, (), config.registry)
            self.positions = [(0, 0) for _ in data.positives]
            self.order = tuple(range(len(data.positives)))
            self.turn = 0
            self.log_weight = 0.0
            self.status = RUNNING
            if config.alpha_r_options is not None:
                grid = tuple(config.alpha_r_options)
                self.alpha_r = self._choose(
                    (KIND_ALPHA_R,), KIND_ALPHA_R, grid, (1.0 / len(grid),) * len(grid)
                )
            if config.alpha_n_options is not None:
                grid = tuple(config.alpha_n_options)
                self.alpha_n = self._choose(
                    (KIND_ALPHA_N,), KIND_ALPHA_N, grid, (1.0 / len(grid),) * len(grid)
                )
            if config.processing_order == RANDOM_SERIAL and len(data.positives) > 1:
                perm = self._choose((KIND_ORDER,), KIND_ORDER, len(data.positives), None)
                self.order = tuple(perm)

    # -- choice machinery ---------------------------------------------------

    def _choose(self, address, kind, support, probs):
        value = None
        prov = self.PROV_SAMPLED
        if address == self.edit_address:
            if not _in_support(kind, support, self.edit_value):
                raise TraceContractError("edit value outside support at %r" % (address,))
            value, prov = self.edit_value, self.PROV_EDIT
        elif address in self.guide:
            recorded = self.guide[address]
            if _in_support(kind, support, recorded):
                value, prov = recorded, self.PROV_GUIDE
        if value is None:
            value = _draw(kind, support, probs, self.rng)
        log_prob = _log_prob_of(kind, support, probs, value)
        self.choices.append(Choice(address, kind, _support_field(kind, support), probs or (), value, log_prob))
        self.provenance.append(prov)
        if prov == self.PROV_SAMPLED:
            self.fresh_logp += log_prob
        else:
            self.consumed.add(address)
        return value

    def _sample_nonterminal(self, ex: int, ci: int) -> int:
        alpha_n = self.alpha_n
        fresh = self._choose(
            (ex, ci, KIND_NT_FLIP), KIND_NT_FLIP, (True, False), (alpha_n, 1.0 - alpha_n)
        )
        if fresh:
            return self.grammar.nonterminal_count
        count = self.grammar.nonterminal_count
        support = tuple(range(count))
        return self._choose(
            (ex, ci, KIND_NT_PICK), KIND_NT_PICK, support, (1.0 / count,) * count
        )

    # -- program body -------------------------------------------------------

    def advance_one_char(self):
        if self.status != RUNNING:
            raise TraceContractError("cannot step a %s trace" % self.status)
        ex = _due_example(self.positions, self.order, self.turn)
        assert ex is not None
        ci, nt = self.positions[ex]
        s = self.data.positives[ex]
        ch = s[ci]
        is_final = ci == len(s) - 1
        cfg = self.config
        registry = cfg.registry

        # reuse only rules of the right arity, so the scaffold always
        # derives the example we are walking
        candidates = tuple(
            r
            for r in self.grammar.rules_for(nt)
            if (r.continuation is None) == is_final and r.emission.matches(ch, registry)
        )
        rule = None
        if candidates:
            alpha_r = self.alpha_r
            reuse = self._choose(
                (ex, ci, KIND_REUSE_FLIP),
                KIND_REUSE_FLIP,
                (True, False),
                (alpha_r, 1.0 - alpha_r),
            )
            if reuse:
                k = len(candidates)
                rule = self._choose(
                    (ex, ci, KIND_RULE_PICK), KIND_RULE_PICK, candidates, (1.0 / k,) * k
                )
        if rule is None:
            classes = registry.classes_containing(ch)
            options = (Emission.lit(ch),) + tuple(Emission.cls(c.id) for c in classes)
            raw = (1.0,) + (cfg.xi,) * len(classes)
            total = sum(raw)
            emission = self._choose(
                (ex, ci, KIND_CLASS_PICK),
                KIND_CLASS_PICK,
                options,
                tuple(w / total for w in raw),
            )
            continuation = None if is_final else self._sample_nonterminal(ex, ci)
            rule = Rule(nt, emission, continuation)
            self.grammar = self.grammar.with_rule(rule)

        if rule.emission.kind == "cls":
            # condition on the class having produced exactly this character
            self.log_weight += rule.emission.emit_logprob(registry)

        self.positions[ex] = (ci + 1, rule.continuation)
        if self.config.processing_order == PARALLEL:
            self.turn = (self.order.index(ex) + 1) % len(self.order)
        if is_final:
            self._check_negatives()
            if self.status == RUNNING and _due_example(self.positions, self.order, self.turn) is None:
                self.status = COMPLETE

    def _check_negatives(self):
        for neg in self.data.negatives:
            if earley.accepts(self.grammar, neg):
                self.status = REJECTED
                self.log_weight = _NEG_INF
                return

    def run_to_completion(self):
        while self.status == RUNNING:
            self.advance_one_char()

    def snapshot(self) -> Trace:
        return Trace(
            choices=tuple(self.choices),
            grammar=self.grammar,
            positions=tuple(self.positions),
            order=self.order,
            turn=self.turn,
            log_weight=self.log_weight,
            status=self.status,
        )


def _support_field(kind, support):
    if kind == KIND_ORDER:
        return (KIND_ORDER, support)  # support is the example count
    return tuple(support)


def _in_support(kind, support, value) -> bool:
    if kind == KIND_ORDER:
        return isinstance(value, tuple) and sorted(value) == list(range(support))
    return value in support


def _draw(kind, support, probs, rng):
    if kind == KIND_ORDER:
        perm = list(range(support))
        rng.shuffle(perm)
        return tuple(perm)
    u = rng.random()
    acc = 0.0
    for value, p in zip(support, probs):
        acc += p
        if u < acc:
            return value
    return support[-1]


def _log_prob_of(kind, support, probs, value) -> float:
    if kind == KIND_ORDER:
        return -math.lgamma(support + 1)
    p = probs[support.index(value)]
    return math.log(p) if p > 0.0 else _NEG_INF


def resample_choice(choice: Choice, rng):
    """Fresh value from a recorded choice's distribution."""
    if choice.kind == KIND_ORDER:
        return _draw(KIND_ORDER, choice.support[1], None, rng)
    return _draw(choice.kind, choice.support, choice.probs, rng)


def choice_log_prob(choice: Choice, value) -> float:
    if choice.kind == KIND_ORDER:
        return _log_prob_of(KIND_ORDER, choice.support[1], None, value)
    return _log_prob_of(choice.kind, choice.support, choice.probs, value)


def initial_trace(data, config: RecognitionConfig, rng, guide=None) -> Trace:
    """A trace poised at the first character (order drawn if random-serial)."""
    return _Run(data, config, rng, guide=guide).snapshot()


def grow(data, config: RecognitionConfig, rng, guide=None) -> Trace:
    """Run the recognition model to completion and return its trace."""
    run = _Run(data, config, rng, guide=guide)
    run.run_to_completion()
    return run.snapshot()


def step(trace: Trace, data, config: RecognitionConfig, rng, guide=None) -> Trace:
    """Advance exactly one character of one positive example.

    Serial orders walk the current string to completion before moving
    on; parallel order round-robins one character from each unfinished
    string.  Stepping a complete or rejected trace is a contract error.
    """
    run = _Run(data, config, rng, guide=guide, snapshot=trace)
    run.advance_one_char()
    return run.snapshot()


def sample_nonterminal(trace: Trace, config: RecognitionConfig, rng) -> tuple[int, Trace]:
    """Standalone nonterminal draw recorded on a copy of the trace."""
    if trace.status != RUNNING:
        raise TraceContractError("trace is not running")
    cursor = trace.cursor
    run = _Run(None, config, rng, snapshot=trace)
    nt = run._sample_nonterminal(cursor[0], cursor[1])
    return nt, run.snapshot()


@dataclass(frozen=True)
class ReplayMeta:
    reused_addresses: frozenset
    fresh_log_prob: float  # sum over freshly drawn sites (excludes the edit)


def replay(trace: Trace, edit, data, config: RecognitionConfig, rng) -> Trace:
    """Re-execute the program, reusing recorded values where compatible.

    `edit` is (address, new value); the new value must lie in that
    choice's support.  Addresses with no recorded value, or whose
    recorded value no longer fits the support, draw fresh from `rng`.
    """
    new_trace, _ = replay_with_meta(trace, edit, data, config, rng)
    return new_trace


def replay_with_meta(trace: Trace, edit, data, config: RecognitionConfig, rng):
    if edit is not None:
        addresses = {c.address for c in trace.choices}
        if edit[0] not in addresses:
            raise TraceContractError("edit address %r not in trace" % (edit[0],))
    run = _Run(data, config, rng, guide=trace.choice_map(), edit=edit)
    run.run_to_completion()
    meta = ReplayMeta(frozenset(run.consumed), run.fresh_logp)
    return run.snapshot(), meta


def format_trace(trace: Trace) -> str:
    """Diagnostic dump, one line per choice: addr kind support value logp."""
    lines = []
    for c in trace.choices:
        addr = ",".join(str(a) for a in c.address)
        lines.append(
            "%s %s %s %r %.6f" % (addr, c.kind, _compact_support(c), c.value, c.log_prob)
        )
    return "\n".join(lines)


def _compact_support(choice: Choice) -> str:
    if choice.kind == KIND_ORDER:
        return "perm(%d)" % choice.support[1]
    return "{%d options}" % len(choice.support)

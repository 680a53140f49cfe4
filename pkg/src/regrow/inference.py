"""Inference engines over the recognition model, and their ensemble.

Four engine families (rejection sampling, single-site Metropolis-Hastings
on traces, SMC over partially grown traces, and particle Gibbs) all
produce sets of grammar-bearing traces.  The ensemble runs a schedule of
engine rounds with per-round search parameters drawn from small grids,
converts every collected grammar to its regex, deduplicates by canonical
string, rescores with the length prior and generative likelihood, and
normalizes.  Everything is deterministic given the ensemble seed (timeouts
aside, which only bind on oversized problems).
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field, replace

from . import recognition, scoring
from .automata import ConversionBudgetError, EmptyLanguageError, grammar_to_regex
from .grammar import ClassRegistry, STANDARD_REGISTRY
from .recognition import (
    COMPLETE,
    PARALLEL,
    RecognitionConfig,
    REJECTED,
    RUNNING,
    SERIAL,
    Trace,
    choice_log_prob,
    grow,
    initial_trace,
    replay_with_meta,
    resample_choice,
    step,
)
from .regex import DEFAULT_WEIGHTS, TokenWeights, emission_token_cost, print_regex

_NEG_INF = float("-inf")

REJECTION = "rejection"
MH = "mh"
SMC = "smc"
PARTICLE_GIBBS = "particle-gibbs"

STATUS_OK = "ok"
STATUS_TIMEOUT = "timeout"
STATUS_ALL_REJECTED = "all-rejected"
STATUS_INIT_FAILED = "init-failed"
STATUS_THROUGHPUT = "throughput-stop"


@dataclass(frozen=True)
class EngineSpec:
    kind: str
    samples: int = 0  # rejection / mh
    particles: int = 0  # smc / particle-gibbs
    sweeps: int = 1
    timeout: float | None = None  # wall-clock seconds
    processing_order: str = SERIAL
    use_prior_importance: bool = True

    def __post_init__(self):
        if self.kind not in (REJECTION, MH, SMC, PARTICLE_GIBBS):
            raise ValueError("unknown engine kind %r" % self.kind)
        if self.kind in (REJECTION, MH) and self.samples < 1:
            raise ValueError("%s needs samples >= 1" % self.kind)
        if self.kind in (SMC, PARTICLE_GIBBS) and self.particles < 1:
            raise ValueError("%s needs particles >= 1" % self.kind)
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.timeout is not None and self.timeout <= 0:
            raise ValueError("timeout must be > 0")


def standard_rounds() -> tuple[EngineSpec, ...]:
    """The default engine schedule used by the ensemble."""
    rounds = [
        EngineSpec(REJECTION, samples=400),
        EngineSpec(MH, samples=5000),
    ]
    for particles, sweeps, timeout in (
        (10, 5, 3.0),
        (50, 5, 3.0),
        (100, 5, 3.0),
        (200, 5, 3.0),
        (500, 4, 7.0),
    ):
        rounds.append(
            EngineSpec(
                PARTICLE_GIBBS,
                particles=particles,
                sweeps=sweeps,
                timeout=timeout,
                processing_order=SERIAL,
            )
        )
    for particles, sweeps, timeout in ((50, 5, 6.0), (100, 5, 6.0)):
        rounds.append(
            EngineSpec(
                PARTICLE_GIBBS,
                particles=particles,
                sweeps=sweeps,
                timeout=timeout,
                processing_order=PARALLEL,
            )
        )
    return tuple(rounds)


@dataclass(frozen=True)
class EnsembleConfig:
    rounds: tuple = field(default_factory=standard_rounds)
    alpha_r_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    alpha_n_grid: tuple = (0.99, 1.0)
    seed: int = 0
    weights: TokenWeights = DEFAULT_WEIGHTS
    registry: ClassRegistry = STANDARD_REGISTRY

    def __post_init__(self):
        if not self.rounds:
            raise ValueError("ensemble needs at least one round")
        if not self.alpha_r_grid or not self.alpha_n_grid:
            raise ValueError("alpha grids must be nonempty")


def default_ensemble(seed: int = 0, registry: ClassRegistry = STANDARD_REGISTRY) -> EnsembleConfig:
    return EnsembleConfig(seed=seed, registry=registry)


@dataclass
class EngineResult:
    traces: list
    status: str = STATUS_OK
    log_weights: list | None = None


# ---------------------------------------------------------------------------
# engines


def run_rejection(data, config: RecognitionConfig, n: int, rng,
                  min_rate: float = 2.0, probe_window: float = 2.0) -> EngineResult:
    """n independent runs, keeping consistent traces.

    Self-disables (returning what it has) when the accepted-sample rate
    over the elapsed run drops below `min_rate` per second once the probe
    window has passed.
    """
    kept = []
    status = STATUS_OK
    started = time.monotonic()
    for _ in range(n):
        trace = grow(data, config, rng)
        if trace.status == COMPLETE:
            kept.append(trace)
        elapsed = time.monotonic() - started
        if elapsed > probe_window and len(kept) < min_rate * elapsed:
            status = STATUS_THROUGHPUT
            break
    return EngineResult(kept, status)


def run_mh(data, config: RecognitionConfig, n: int, rng,
           restart_budget: int = 100) -> EngineResult:
    """Single-site trace Metropolis-Hastings.

    Proposals pick one recorded choice uniformly, resample it from its
    recorded distribution, and replay.  The acceptance ratio compares the
    joint scores (choice log-probs plus conditioning weight) and carries
    the standard corrections for the differing choice counts and for
    choices that only exist on one side (freshly drawn or abandoned
    during replay).  Every post-step state is collected as a sample.
    """
    current = None
    for _ in range(restart_budget):
        trace = grow(data, config, rng)
        if trace.status == COMPLETE:
            current = trace
            break
    if current is None:
        return EngineResult([], STATUS_INIT_FAILED)
    samples = []
    current_joint = current.log_joint
    for _ in range(n):
        idx = rng.randrange(len(current.choices))
        site = current.choices[idx]
        new_value = resample_choice(site, rng)
        logp_old = site.log_prob
        logp_new = choice_log_prob(site, new_value)
        proposal, meta = replay_with_meta(
            current, (site.address, new_value), data, config, rng
        )
        log_alpha = _NEG_INF
        proposal_joint = _NEG_INF
        if proposal.status == COMPLETE:
            # choices abandoned by the replay (the edited site is consumed,
            # so it is excluded here and enters through logp_old/logp_new)
            stale = sum(
                c.log_prob for c in current.choices if c.address not in meta.reused_addresses
            )
            proposal_joint = proposal.log_joint
            log_alpha = (
                (proposal_joint - current_joint)
                + (math.log(len(current.choices)) - math.log(len(proposal.choices)))
                + (logp_old - logp_new)
                + (stale - meta.fresh_log_prob)
            )
        if log_alpha >= 0.0 or math.log(max(rng.random(), 1e-300)) < log_alpha:
            current = proposal
            current_joint = proposal_joint
        samples.append(current)
    return EngineResult(samples)


def _count_done(trace: Trace) -> int:
    return sum(1 for _, nt in trace.positions if nt is None)


def _advance_to_checkpoint(trace, data, config, rng, guide):
    """One SMC increment: a single character for serial orders, one
    character position (a round-robin cycle touching each unfinished
    string once) for parallel order.

    Checkpoints sit at character granularity because that is where the
    model's conditioning weight accrues; resampling between them is what
    lets a particle that just created reusable structure outlive the
    stretch where it must keep winning reuse flips.
    """
    t = trace
    if config.processing_order == PARALLEL:
        unfinished = sum(1 for _, nt in t.positions if nt is not None)
        for _ in range(unfinished):
            if t.status != RUNNING:
                break
            t = step(t, data, config, rng, guide)
        return t
    return step(t, data, config, rng, guide)


def _importance_increment(prev: Trace, new: Trace, weights: TokenWeights) -> float:
    added = new.grammar.rules[len(prev.grammar.rules):]
    return sum(emission_token_cost(rule.emission, weights) for rule in added)


def _effective_sample_size(log_weights) -> float:
    peak = max(log_weights)
    if peak == _NEG_INF:
        return 0.0
    ws = [math.exp(lw - peak) for lw in log_weights]
    total = sum(ws)
    return total * total / sum(w * w for w in ws)


def _systematic_resample(log_weights, count: int, rng) -> list[int]:
    peak = max(log_weights)
    ws = [math.exp(lw - peak) for lw in log_weights]
    total = sum(ws)
    cumulative = []
    acc = 0.0
    for w in ws:
        acc += w / total
        cumulative.append(acc)
    ancestors = []
    u = rng.random() / count
    j = 0
    for _ in range(count):
        while cumulative[j] < u and j < len(cumulative) - 1:
            j += 1
        ancestors.append(j)
        u += 1.0 / count
    return ancestors


def run_smc(data, config: RecognitionConfig, particles: int, rng,
            weights: TokenWeights = DEFAULT_WEIGHTS,
            use_prior_importance: bool = True,
            reference: Trace | None = None,
            deadline: float | None = None) -> EngineResult:
    """Sequential Monte Carlo over partially grown traces.

    Checkpoints are per character for parallel order and per example
    string for serial orders.  Incremental weights combine the trace's
    conditioning weight with, optionally, the length-prior cost of newly
    created rules, which steers the population toward grammars that will
    convert to short regexes.  Systematic resampling fires when the
    effective sample size drops below half the population.  When a
    reference trajectory is given (conditional SMC), it deterministically
    occupies slot 0 and survives every resampling step.
    """
    base = rng.getrandbits(48)
    streams = [random.Random(base ^ (slot + 1)) for slot in range(particles)]
    resample_rng = random.Random(base ^ 0x5EED)
    guide = reference.choice_map() if reference is not None else None

    states = []
    for slot in range(particles):
        g = guide if (reference is not None and slot == 0) else None
        states.append(initial_trace(data, config, streams[slot], guide=g))
    log_weights = [0.0] * particles
    status = STATUS_OK

    while any(t.status == RUNNING for t in states):
        if deadline is not None and time.monotonic() > deadline:
            status = STATUS_TIMEOUT
            break
        for slot in range(particles):
            t = states[slot]
            if t.status != RUNNING:
                continue
            g = guide if (reference is not None and slot == 0) else None
            advanced = _advance_to_checkpoint(t, data, config, streams[slot], g)
            increment = advanced.log_weight - t.log_weight
            if advanced.status == REJECTED:
                increment = _NEG_INF
            elif use_prior_importance:
                increment += _importance_increment(t, advanced, weights)
            states[slot] = advanced
            if log_weights[slot] != _NEG_INF:
                log_weights[slot] = (
                    _NEG_INF if increment == _NEG_INF else log_weights[slot] + increment
                )
        if all(lw == _NEG_INF for lw in log_weights):
            return EngineResult([], STATUS_ALL_REJECTED, [])
        ess = _effective_sample_size(log_weights)
        if ess < particles / 2.0:
            if reference is not None:
                ancestors = [0] + _systematic_resample(log_weights, particles - 1, resample_rng)
            else:
                ancestors = _systematic_resample(log_weights, particles, resample_rng)
            states = [states[a] for a in ancestors]
            log_weights = [0.0] * particles
    return EngineResult(list(states), status, list(log_weights))


def run_particle_gibbs(data, config: RecognitionConfig, particles: int, sweeps: int,
                       timeout: float | None, rng,
                       weights: TokenWeights = DEFAULT_WEIGHTS,
                       use_prior_importance: bool = True) -> EngineResult:
    """Iterated conditional SMC.

    Sweep 1 is plain SMC; each later sweep holds a reference trajectory
    (drawn proportional to the previous sweep's final weights) fixed as
    one particle.  Survivors of every sweep are collected.  The wall
    clock is checked at each checkpoint; on timeout the engine returns
    everything gathered so far.
    """
    deadline = (time.monotonic() + timeout) if timeout is not None else None
    collected = []
    status = STATUS_OK
    reference = None
    for _ in range(sweeps):
        if deadline is not None and time.monotonic() > deadline:
            status = STATUS_TIMEOUT
            break
        result = run_smc(
            data, config, particles, rng,
            weights=weights,
            use_prior_importance=use_prior_importance,
            reference=reference,
            deadline=deadline,
        )
        if result.status == STATUS_ALL_REJECTED:
            if not collected:
                return EngineResult([], STATUS_ALL_REJECTED)
            break
        collected.extend(t for t in result.traces if t.status != REJECTED)
        if result.status == STATUS_TIMEOUT:
            status = STATUS_TIMEOUT
            break
        finished = [
            (t, lw) for t, lw in zip(result.traces, result.log_weights)
            if t.status == COMPLETE and lw != _NEG_INF
        ]
        if not finished:
            break
        reference = _draw_reference(finished, rng)
    return EngineResult(collected, status)


def _draw_reference(finished, rng) -> Trace:
    peak = max(lw for _, lw in finished)
    ws = [math.exp(lw - peak) for _, lw in finished]
    total = sum(ws)
    u = rng.random() * total
    acc = 0.0
    for (trace, _), w in zip(finished, ws):
        acc += w
        if u < acc:
            return trace
    return finished[-1][0]


# ---------------------------------------------------------------------------
# ensemble


@dataclass
class RoundInfo:
    spec: EngineSpec
    status: str
    traces: int


@dataclass
class EnsembleOutcome:
    ranking: scoring.Ranking
    rounds: list
    traces_collected: int = 0
    grammars_seen: int = 0
    dropped_conversions: int = 0

    @property
    def status(self) -> str:
        return self.ranking.status

    @property
    def candidates(self) -> list:
        return self.ranking.candidates


def _run_round(spec: EngineSpec, data, config: RecognitionConfig, rng,
               weights: TokenWeights, budget_left: float | None) -> EngineResult:
    timeout = spec.timeout
    if budget_left is not None:
        timeout = budget_left if timeout is None else min(timeout, budget_left)
    if spec.kind == REJECTION:
        return run_rejection(data, config, spec.samples, rng)
    if spec.kind == MH:
        return run_mh(data, config, spec.samples, rng)
    if spec.kind == SMC:
        deadline = (time.monotonic() + timeout) if timeout else None
        return run_smc(
            data, config, spec.particles, rng,
            weights=weights,
            use_prior_importance=spec.use_prior_importance,
            deadline=deadline,
        )
    return run_particle_gibbs(
        data, config, spec.particles, spec.sweeps, timeout, rng,
        weights=weights,
        use_prior_importance=spec.use_prior_importance,
    )


def run_ensemble(data, ensemble: EnsembleConfig,
                 budget_seconds: float | None = None) -> EnsembleOutcome:
    """Run every round, merge and deduplicate discoveries, rescore, rank.

    `budget_seconds` is a wall-clock cap across rounds (used by the
    interactive service): rounds that would start past the deadline are
    skipped and engine timeouts are clamped to the remaining budget.
    """
    registry = ensemble.registry
    recognition._validate_data(data, registry)
    deadline = (time.monotonic() + budget_seconds) if budget_seconds else None

    rounds_info = []
    grammars = {}  # fingerprint -> Grammar
    traces_collected = 0
    for i, spec in enumerate(ensemble.rounds):
        budget_left = None
        if deadline is not None:
            budget_left = deadline - time.monotonic()
            if budget_left <= 0:
                rounds_info.append(RoundInfo(spec, "budget-exhausted", 0))
                continue
        round_rng = random.Random("%s/round/%d" % (ensemble.seed, i))
        config = RecognitionConfig(
            xi=ensemble.weights.xi,
            registry=registry,
            processing_order=spec.processing_order,
            alpha_r_options=ensemble.alpha_r_grid,
            alpha_n_options=ensemble.alpha_n_grid,
        )
        result = _run_round(spec, data, config, round_rng, ensemble.weights, budget_left)
        kept = 0
        for trace in result.traces:
            if trace.status == REJECTED:
                continue
            kept += 1
            grammars.setdefault(trace.grammar.fingerprint(), trace.grammar)
        traces_collected += kept
        rounds_info.append(RoundInfo(spec, result.status, kept))

    candidates = {}
    dropped = 0
    for grammar in grammars.values():
        try:
            ast = grammar_to_regex(grammar)
        except (ConversionBudgetError, EmptyLanguageError):
            dropped += 1
            continue
        canonical = print_regex(ast)
        if canonical in candidates:
            continue
        candidates[canonical] = scoring.score_candidate(
            ast, data, registry, ensemble.weights
        )
    ranking = scoring.normalize_posterior(list(candidates.values()), data, registry)
    return EnsembleOutcome(
        ranking=ranking,
        rounds=rounds_info,
        traces_collected=traces_collected,
        grammars_seen=len(grammars),
        dropped_conversions=dropped,
    )


# ---------------------------------------------------------------------------
# ensemble config file format (JSON)


def ensemble_to_dict(ensemble: EnsembleConfig) -> dict:
    return {
        "seed": ensemble.seed,
        "gamma": ensemble.weights.gamma,
        "xi": ensemble.weights.xi,
        "operator_weight": ensemble.weights.operator_weight,
        "alpha_r_grid": list(ensemble.alpha_r_grid),
        "alpha_n_grid": list(ensemble.alpha_n_grid),
        "rounds": [
            {
                "kind": spec.kind,
                "samples": spec.samples,
                "particles": spec.particles,
                "sweeps": spec.sweeps,
                "timeout": spec.timeout,
                "processing_order": spec.processing_order,
                "use_prior_importance": spec.use_prior_importance,
            }
            for spec in ensemble.rounds
        ],
    }


def ensemble_from_dict(payload: dict, registry: ClassRegistry = STANDARD_REGISTRY) -> EnsembleConfig:
    weights = TokenWeights(
        gamma=payload.get("gamma", DEFAULT_WEIGHTS.gamma),
        xi=payload.get("xi", DEFAULT_WEIGHTS.xi),
        operator_weight=payload.get("operator_weight", DEFAULT_WEIGHTS.operator_weight),
    )
    rounds = tuple(
        EngineSpec(
            kind=r["kind"],
            samples=r.get("samples", 0),
            particles=r.get("particles", 0),
            sweeps=r.get("sweeps", 1),
            timeout=r.get("timeout"),
            processing_order=r.get("processing_order", SERIAL),
            use_prior_importance=r.get("use_prior_importance", True),
        )
        for r in payload["rounds"]
    ) if "rounds" in payload else standard_rounds()
    return EnsembleConfig(
        rounds=rounds,
        alpha_r_grid=tuple(payload.get("alpha_r_grid", EnsembleConfig.alpha_r_grid)),
        alpha_n_grid=tuple(payload.get("alpha_n_grid", EnsembleConfig.alpha_n_grid)),
        seed=payload.get("seed", 0),
        weights=weights,
        registry=registry,
    )


def load_ensemble(path, registry: ClassRegistry = STANDARD_REGISTRY,
                  seed: int | None = None) -> EnsembleConfig:
    with open(path) as fh:
        payload = json.load(fh)
    ensemble = ensemble_from_dict(payload, registry)
    if seed is not None:
        ensemble = replace(ensemble, seed=seed)
    return ensemble


def save_ensemble(ensemble: EnsembleConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(ensemble_to_dict(ensemble), fh, indent=2)
        fh.write("\n")

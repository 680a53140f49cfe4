"""Automaton bridge between regexes and grammars.

regex -> grammar goes through a Glushkov position automaton followed by a
bisimulation quotient, which canonicalizes the result: every regex maps
to one deterministic grammar, so downstream scores are a function of the
regex alone.  grammar -> regex is classic state elimination with a
cheapest-state-first heuristic.  Language equivalence runs a product
walk over lazily determinized automata.

Grammars only derive nonempty strings (every rule emits a character), so
all language comparisons here are over nonempty strings; whether a
pattern also matches the empty string is deliberately ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import ClassRegistry, Emission, Grammar, Rule, STANDARD_REGISTRY
from .regex import Alt, ClassRef, Concat, Literal, RegexAst, Star, alt, concat, star


class EmptyLanguageError(Exception):
    """The grammar derives no string at all."""


class ConversionBudgetError(Exception):
    """State elimination produced an unreasonably large expression."""


@dataclass(frozen=True)
class _Atom:
    kind: str  # "lit" | "cls"
    value: str

    def charset(self, registry: ClassRegistry) -> str:
        if self.kind == "lit":
            return self.value
        return registry.get(self.value).members

    def to_ast(self) -> RegexAst:
        return Literal(self.value) if self.kind == "lit" else ClassRef(self.value)

    def to_emission(self) -> Emission:
        return Emission(self.kind, self.value)


class Nfa:
    """Position automaton: state 0 is the start, atoms label transitions."""

    __slots__ = ("n", "transitions", "finals", "nullable", "registry")

    def __init__(self, n, transitions, finals, nullable, registry):
        self.n = n
        self.transitions = transitions  # list[list[(_Atom, target)]]
        self.finals = finals  # frozenset[int]
        self.nullable = nullable
        self.registry = registry


def _linearize(ast: RegexAst, atoms: list) -> tuple[bool, tuple, tuple, list]:
    """Returns (nullable, first, last, follow) over 1-based positions."""
    if isinstance(ast, Literal):
        atoms.append(_Atom("lit", ast.char))
        p = len(atoms)
        return False, (p,), (p,), []
    if isinstance(ast, ClassRef):
        atoms.append(_Atom("cls", ast.class_id))
        p = len(atoms)
        return False, (p,), (p,), []
    if isinstance(ast, Star):
        nullable, first, last, follow = _linearize(ast.inner, atoms)
        follow = follow + [(i, j) for i in last for j in first]
        return True, first, last, follow
    if isinstance(ast, Alt):
        nullable = False
        first: tuple = ()
        last: tuple = ()
        follow: list = []
        for option in ast.options:
            n, f, l, fo = _linearize(option, atoms)
            nullable = nullable or n
            first += f
            last += l
            follow += fo
        return nullable, first, last, follow
    if isinstance(ast, Concat):
        nullable, first, last, follow = _linearize(ast.parts[0], atoms)
        for part in ast.parts[1:]:
            n2, f2, l2, fo2 = _linearize(part, atoms)
            follow += fo2 + [(i, j) for i in last for j in f2]
            if nullable:
                first += f2
            last = last + l2 if n2 else l2
            nullable = nullable and n2
        return nullable, first, last, follow
    raise TypeError("not a regex AST node: %r" % (ast,))


def glushkov_nfa(ast: RegexAst, registry: ClassRegistry = STANDARD_REGISTRY) -> Nfa:
    atoms: list[_Atom] = []
    nullable, first, last, follow = _linearize(ast, atoms)
    n = len(atoms) + 1
    transitions: list[list] = [[] for _ in range(n)]
    seen = [set() for _ in range(n)]
    for p in first:
        transitions[0].append((atoms[p - 1], p))
        seen[0].add(p)
    for i, j in follow:
        if j not in seen[i]:
            seen[i].add(j)
            transitions[i].append((atoms[j - 1], j))
    return Nfa(n, transitions, frozenset(last), nullable, registry)


def nfa_accepts(nfa: Nfa, s: str) -> bool:
    """Membership over nonempty strings (the empty string never counts)."""
    if not s:
        return False
    active = {0}
    registry = nfa.registry
    for ch in s:
        nxt = set()
        for state in active:
            for atom, target in nfa.transitions[state]:
                if target not in nxt and ch in atom.charset(registry):
                    nxt.add(target)
        if not nxt:
            return False
        active = nxt
    return bool(active & nfa.finals)


class RegexMatcher:
    """Reusable anchored matcher for one pattern (NFA built once)."""

    def __init__(self, ast: RegexAst, registry: ClassRegistry = STANDARD_REGISTRY):
        self.ast = ast
        self.nfa = glushkov_nfa(ast, registry)

    def accepts(self, s: str) -> bool:
        return nfa_accepts(self.nfa, s)


def regex_accepts(ast: RegexAst, s: str, registry: ClassRegistry = STANDARD_REGISTRY) -> bool:
    return nfa_accepts(glushkov_nfa(ast, registry), s)


# ---------------------------------------------------------------------------
# regex -> grammar


def _coreachable(nfa: Nfa) -> set[int]:
    preds: list[set[int]] = [set() for _ in range(nfa.n)]
    for u in range(nfa.n):
        for _, v in nfa.transitions[u]:
            preds[v].add(u)
    alive = set(nfa.finals)
    queue = list(alive)
    while queue:
        v = queue.pop()
        for u in preds[v]:
            if u not in alive:
                alive.add(u)
                queue.append(u)
    return alive


def _bisim_quotient(states, exits, conts, start):
    """Coarsest forward bisimulation over (exit emissions, successors).

    `exits[u]` is a frozenset of emission keys ending a derivation at u;
    `conts[u]` lists (emission key, target state) pairs.  Returns the
    list of blocks, start block first, others ordered by smallest member.
    Merging bisimilar states never changes the recognized language.
    """
    block = {u: 0 for u in states}
    while True:
        sigs = {}
        for u in states:
            sigs[u] = (
                block[u],
                exits[u],
                frozenset((key, block[v]) for key, v in conts[u]),
            )
        order: dict = {}
        new_block = {}
        for u in states:  # renumber by first appearance for determinism
            sig = sigs[u]
            if sig not in order:
                order[sig] = len(order)
            new_block[u] = order[sig]
        if new_block == block:
            break
        block = new_block
    blocks: dict[int, list] = {}
    for u in states:
        blocks.setdefault(block[u], []).append(u)
    ordered = sorted(blocks.values(), key=lambda members: min(members))
    ordered.sort(key=lambda members: start not in members)
    return ordered


def regex_to_grammar(ast: RegexAst, registry: ClassRegistry = STANDARD_REGISTRY) -> Grammar:
    """Canonical grammar for a regex.

    Glushkov automaton, dead-state pruning, then a bisimulation quotient
    so structurally duplicated positions collapse (e.g. the two `b`
    positions of `ab*b` share one nonterminal).  Deterministic for a
    given AST.
    """
    nfa = glushkov_nfa(ast, registry)
    alive = _coreachable(nfa)
    if 0 not in alive:
        raise EmptyLanguageError("pattern denotes no nonempty string")

    trans = {
        u: [(a, v) for a, v in nfa.transitions[u] if v in alive]
        for u in sorted(alive)
    }
    # states that carry rules; final-only sinks disappear into size-1 rules
    worthy = sorted(u for u in alive if trans[u])
    key = {a: (a.kind, a.value) for u in worthy for a, _ in trans[u]}
    exits = {
        u: frozenset(key[a] for a, v in trans[u] if v in nfa.finals) for u in worthy
    }
    conts = {
        u: [(key[a], v) for a, v in trans[u] if trans.get(v)] for u in worthy
    }
    ordered = _bisim_quotient(worthy, exits, conts, 0)
    index = {}
    for i, members in enumerate(ordered):
        for u in members:
            index[u] = i

    rules = []
    for members in ordered:
        for u in sorted(members):
            for a, v in trans[u]:
                if trans.get(v):
                    rules.append(Rule(index[u], a.to_emission(), index[v]))
                if v in nfa.finals:
                    rules.append(Rule(index[u], a.to_emission(), None))
    return Grammar(len(ordered), rules, registry)


def normalize_grammar(grammar: Grammar) -> Grammar:
    """Language-preserving simplification of a grown grammar.

    Drops nonterminals that are unreachable or cannot finish a
    derivation, then merges bisimilar nonterminals.  Grown grammars are
    frequently tangles of redundant branches; collapsing them before
    state elimination keeps converted regexes short, which matters
    because printed length drives the prior.  Raises EmptyLanguageError
    when nothing is derivable.
    """
    succ: dict[int, set] = {nt: set() for nt in range(grammar.nonterminal_count)}
    for rule in grammar.rules:
        if rule.continuation is not None:
            succ[rule.lhs].add(rule.continuation)
    reachable = {0}
    queue = [0]
    while queue:
        u = queue.pop()
        for v in succ[u]:
            if v not in reachable:
                reachable.add(v)
                queue.append(v)
    # states that can finish: have an exit rule or reach one
    can_finish = {r.lhs for r in grammar.rules if r.continuation is None}
    changed = True
    while changed:
        changed = False
        for rule in grammar.rules:
            if (
                rule.continuation is not None
                and rule.continuation in can_finish
                and rule.lhs not in can_finish
            ):
                can_finish.add(rule.lhs)
                changed = True
    alive = reachable & can_finish
    if 0 not in alive:
        raise EmptyLanguageError("grammar derives no string")

    key = lambda e: (e.kind, e.value)
    exits = {
        u: frozenset(
            key(r.emission)
            for r in grammar.rules_for(u)
            if r.continuation is None
        )
        for u in alive
    }
    conts = {
        u: [
            (key(r.emission), r.continuation)
            for r in grammar.rules_for(u)
            if r.continuation is not None and r.continuation in alive
        ]
        for u in alive
    }
    ordered = _bisim_quotient(sorted(alive), exits, conts, 0)
    if len(ordered) == grammar.nonterminal_count and all(
        len(members) == 1 for members in ordered
    ):
        renumber = {members[0]: i for i, members in enumerate(ordered)}
        if all(renumber[u] == u for u in renumber):
            return grammar  # already normal
    index = {}
    for i, members in enumerate(ordered):
        for u in members:
            index[u] = i
    rules = []
    for members in ordered:
        for u in sorted(members):
            for rule in grammar.rules_for(u):
                if rule.continuation is None:
                    rules.append(Rule(index[u], rule.emission, None))
                elif rule.continuation in alive:
                    rules.append(Rule(index[u], rule.emission, index[rule.continuation]))
    return Grammar(len(ordered), rules, grammar.registry)


# ---------------------------------------------------------------------------
# grammar -> regex (state elimination)

_EPS = object()  # label of the synthetic start edge only


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.spent = 0

    def charge(self, amount: int = 1):
        self.spent += amount
        if self.spent > self.limit:
            raise ConversionBudgetError("regex grew past %d nodes" % self.limit)


def _concat_label(parts, budget: _Budget) -> RegexAst:
    real = [p for p in parts if p is not None and p is not _EPS]
    budget.charge(len(real) + 1)
    return concat(real)


def grammar_to_regex(grammar: Grammar, node_budget: int = 500_000) -> RegexAst:
    """Language-equivalent regex via state elimination.

    The grammar is first normalized (pruned and quotiented, language
    unchanged); states are then eliminated cheapest first (fewest in*out
    transitions, ties by index).  Both steps keep outputs short and
    deterministic.  Raises EmptyLanguageError when the grammar derives
    nothing.
    """
    grammar = normalize_grammar(grammar)
    n = grammar.nonterminal_count
    start, final = -1, n
    budget = _Budget(node_budget)
    edges: dict[tuple[int, int], object] = {(start, 0): _EPS}

    def add_edge(p, q, label):
        old = edges.get((p, q))
        if old is None:
            edges[(p, q)] = label
        else:
            budget.charge()
            edges[(p, q)] = alt([old, label])

    for rule in grammar.rules:
        atom = _Atom(rule.emission.kind, rule.emission.value)
        target = final if rule.continuation is None else rule.continuation
        add_edge(rule.lhs, target, atom.to_ast())

    succs: dict[int, set[int]] = {}
    preds: dict[int, set[int]] = {}
    for p, q in edges:
        succs.setdefault(p, set()).add(q)
        preds.setdefault(q, set()).add(p)

    def bfs(root, adjacency):
        seen = {root}
        queue = [root]
        while queue:
            u = queue.pop()
            for v in adjacency.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    reachable = bfs(start, succs)
    coreachable = bfs(final, preds)
    if final not in reachable:
        raise EmptyLanguageError("grammar derives no string")
    keep = reachable & coreachable
    edges = {pq: label for pq, label in edges.items() if pq[0] in keep and pq[1] in keep}

    remaining = sorted(s for s in keep if s not in (start, final))
    while remaining:
        def cost(s):
            ins = sum(1 for (p, q) in edges if q == s and p != s)
            outs = sum(1 for (p, q) in edges if p == s and q != s)
            return (ins * outs, s)

        s = min(remaining, key=cost)
        remaining.remove(s)
        loop = edges.pop((s, s), None)
        loop_star = star(loop) if loop is not None else None
        sources = [p for (p, q) in edges if q == s]
        targets = [q for (p, q) in edges if p == s]
        for p in sources:
            for q in targets:
                label = _concat_label((edges[(p, s)], loop_star, edges[(s, q)]), budget)
                add_edge(p, q, label)
        edges = {pq: label for pq, label in edges.items() if s not in pq}

    result = edges.get((start, final))
    if result is None or result is _EPS:
        raise EmptyLanguageError("grammar derives no string")
    return result


def grammar_accepts_by_regex(grammar: Grammar, s: str) -> bool:
    """Membership via the converted regex; an independent cross-check path."""
    return regex_accepts(grammar_to_regex(grammar), s, grammar.registry)


# ---------------------------------------------------------------------------
# language equivalence


def _char_groups(nfas) -> list[str]:
    """One representative character per behavioral equivalence class."""
    registry = nfas[0].registry
    charsets = []
    seen = set()
    for nfa in nfas:
        for row in nfa.transitions:
            for atom, _ in row:
                cs = atom.charset(registry)
                if cs not in seen:
                    seen.add(cs)
                    charsets.append(cs)
    reps = {}
    for ch in registry.alphabet:
        sig = tuple(ch in cs for cs in charsets)
        if sig not in reps:
            reps[sig] = ch
    return list(reps.values())


def _dfa_step(nfa: Nfa, states: frozenset, ch: str, cache: dict) -> frozenset:
    key = (states, ch)
    hit = cache.get(key)
    if hit is not None:
        return hit
    registry = nfa.registry
    nxt = set()
    for state in states:
        for atom, target in nfa.transitions[state]:
            if ch in atom.charset(registry):
                nxt.add(target)
    result = frozenset(nxt)
    cache[key] = result
    return result


def nfa_equivalent(a: Nfa, b: Nfa) -> bool:
    """Equality of the two languages restricted to nonempty strings."""
    reps = _char_groups((a, b))
    cache_a: dict = {}
    cache_b: dict = {}
    start = (frozenset([0]), frozenset([0]))
    seen = {start}
    queue = [start]
    while queue:
        pa, pb = queue.pop()
        for ch in reps:
            qa = _dfa_step(a, pa, ch, cache_a)
            qb = _dfa_step(b, pb, ch, cache_b)
            if bool(qa & a.finals) != bool(qb & b.finals):
                return False
            pair = (qa, qb)
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return True


def equivalent(a: RegexAst, b: RegexAst, registry: ClassRegistry = STANDARD_REGISTRY) -> bool:
    """True iff the regexes denote the same language over nonempty strings."""
    return nfa_equivalent(glushkov_nfa(a, registry), glushkov_nfa(b, registry))

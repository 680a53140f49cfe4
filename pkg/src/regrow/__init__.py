"""regrow: regex synthesis from positive and negative example strings.

The pipeline interprets candidate regexes as probabilistic regular
grammars, grows grammars along the positive examples with a resumable
stochastic recognition procedure, explores the space with an ensemble of
trace-based inference engines, and ranks the discovered regexes by a
length prior times a generative likelihood.
"""

from .automata import (
    ConversionBudgetError,
    EmptyLanguageError,
    RegexMatcher,
    equivalent,
    grammar_to_regex,
    regex_accepts,
    regex_to_grammar,
)
from .corpus import Dataset, FIXTURES, fixture, load_corpus, save_corpus
from .earley import ParseResult, accepts, string_logprob
from .grammar import (
    ALPHA,
    CharClass,
    ClassRegistry,
    DEFAULT_ALPHABET,
    DIGIT,
    DOT,
    Emission,
    Grammar,
    Rule,
    STANDARD_REGISTRY,
    classless_registry,
    enumerate_strings,
    format_grammar,
    matching_rules,
    parse_grammar,
    rule_probability,
    sample_string,
    standard_registry,
)
from .inference import (
    EngineSpec,
    EnsembleConfig,
    default_ensemble,
    run_ensemble,
    run_mh,
    run_particle_gibbs,
    run_rejection,
    run_smc,
)
from .recognition import (
    Choice,
    PositivesRequiredError,
    RecognitionConfig,
    Trace,
    grow,
    replay,
    sample_nonterminal,
    step,
)
from .regex import (
    Alt,
    ClassRef,
    Concat,
    Literal,
    RegexParseError,
    Star,
    TokenWeights,
    parse_regex,
    print_regex,
    token_weight_product,
)
from .scoring import Candidate, Ranking, likelihood, normalize_posterior, prior

__version__ = "0.1.0"

import math

import pytest

from regrow.corpus import dataset
from regrow.regex import parse_regex, print_regex
from regrow.scoring import (
    Candidate,
    STATUS_NO_CONSISTENT,
    STATUS_OK,
    likelihood,
    normalize_posterior,
    prior,
    score_candidate,
)

LOG_GAMMA = math.log(0.0002)


def test_prior_values():
    assert prior(parse_regex("a")) == pytest.approx(LOG_GAMMA)
    assert prior(parse_regex("\\d")) == pytest.approx(math.log(0.002))
    assert prior(parse_regex("\\d\\d")) == pytest.approx(2 * math.log(0.002))


def test_likelihood_fig1_dataset():
    got = likelihood(parse_regex("ab*b"), dataset("d", ["ab", "abb"]))
    assert got == pytest.approx(math.log(0.125))


def test_likelihood_rejects_on_negative():
    assert likelihood(parse_regex("ab*b"), dataset("d", ["ab"], ["abb"])) is None


def test_likelihood_rejects_on_underivable_positive():
    assert likelihood(parse_regex("ab*b"), dataset("d", ["ab", "ba"])) is None


def test_likelihood_requires_positives():
    with pytest.raises(ValueError):
        likelihood(parse_regex("a"), dataset("d", []))


def test_representative_strings_favor_tighter_regex():
    data = dataset("d", ["abababab"])
    tight = likelihood(parse_regex("(ab)*"), data)
    loose = likelihood(parse_regex("(a|b)*"), data)
    assert tight > loose


def test_normalize_single_candidate():
    data = dataset("d", ["ab", "abb"])
    ranking = normalize_posterior([score_candidate(parse_regex("ab*b"), data)], data)
    assert ranking.status == STATUS_OK
    assert ranking.candidates[0].posterior == pytest.approx(1.0)


def test_normalize_tie_breaks_lexicographically():
    # same language, same printed length: identical scores
    data = dataset("d", ["ab", "abb"])
    a = score_candidate(parse_regex("ab*b"), data)
    b = score_candidate(parse_regex("abb*"), data)
    assert a.log_score == pytest.approx(b.log_score)
    ranking = normalize_posterior([b, a], data)
    assert [c.canonical for c in ranking.candidates] == ["ab*b", "abb*"]
    assert ranking.candidates[0].posterior == pytest.approx(0.5)
    assert sum(c.posterior for c in ranking.candidates) == pytest.approx(1.0, abs=1e-9)


def test_normalize_all_rejected():
    data = dataset("d", ["ab"], ["zz"])
    dead = Candidate(parse_regex("q"), "q", -1.0, None)
    ranking = normalize_posterior([dead], data)
    assert ranking.status == STATUS_NO_CONSISTENT
    assert ranking.candidates == []


def test_normalize_consistency_recheck_drops_liars():
    data = dataset("d", ["ab"], [])
    liar = Candidate(parse_regex("zz"), "zz", -1.0, log_likelihood=-1.0)
    honest = score_candidate(parse_regex("ab"), data)
    ranking = normalize_posterior([liar, honest], data)
    assert ranking.inconsistent_dropped == 1
    assert [c.canonical for c in ranking.candidates] == ["ab"]


def test_posterior_ratios_invariant_under_extension():
    data = dataset("d", ["ab", "abb"])
    a = score_candidate(parse_regex("ab*b"), data)
    b = score_candidate(parse_regex("a(b|bb)"), data)
    c = score_candidate(parse_regex("ab|abb"), data)
    two = normalize_posterior([a, b], data)
    ratio_two = two.candidates[0].posterior / two.candidates[1].posterior
    three = normalize_posterior([a, b, c], data)
    by_name = {cand.canonical: cand.posterior for cand in three.candidates}
    ratio_three = by_name["ab*b"] / by_name["a(b|bb)"]
    assert ratio_two == pytest.approx(ratio_three, rel=1e-9)


def test_prior_depends_only_on_printed_form():
    x = parse_regex("a(b|bb)")
    y = parse_regex(print_regex(x))
    assert prior(x) == prior(y)


def test_long_regex_log_domain_is_finite():
    long_ast = parse_regex("a" * 200)
    data = dataset("d", ["a" * 200])
    cand = score_candidate(long_ast, data)
    assert math.isfinite(cand.log_prior)
    assert math.isfinite(cand.log_likelihood)
    ranking = normalize_posterior([cand], data)
    assert ranking.candidates[0].posterior == pytest.approx(1.0)

import json

import pytest

from regrow.corpus import (
    CorpusFormatError,
    FIXTURES,
    breakdown,
    build_report,
    dataset,
    fixture,
    kbest_score,
    load_corpus,
    report_csv,
    report_to_dict,
    save_corpus,
    save_results,
    target_rank,
)
from regrow.scoring import Candidate
from regrow.regex import parse_regex


def make_candidate(text, posterior=0.5):
    ast = parse_regex(text)
    return Candidate(ast, text, -1.0, -1.0, posterior)


def test_fixture_strings_are_verbatim():
    assert fixture("fig1-toy").positives == ("ab", "abb")
    assert fixture("dogs-cat").positives == ("dogs",)
    assert fixture("dogs-cat").negatives == ("cat",)
    assert fixture("number-parser").positives == ("123", "123.456", "-123", ".456")
    assert fixture("number-parser").negatives == (".", "123.456.7")
    assert fixture("bracket-teaching").positives == ("[dog]", "[cat]", "cat")
    assert fixture("bracket-teaching").negatives == ("dog", "[123]", "123")
    assert fixture("star-s").positives == (
        "fj38fj498js",
        "r5iffffkkkks",
        "59yhkgyg7s",
        "FJEFJISFJs",
    )
    assert fixture("star-s").negatives == (
        "SIJF$$FES",
        "48f94wfwh",
        "GRSRSRSFJh",
        "sw4wfJEHSFK",
    )
    assert fixture("bracket-hard").positives == ("[hello]",)
    assert fixture("bracket-hard").negatives == (
        "hello]",
        "[hello",
        "[]hello",
        "hello[]",
    )
    assert fixture("bracket-hard").human_recovery == 0.9
    assert fixture("a-aa-aaa").positives == ("a", "aa", "aaa")
    assert fixture("tjbuss").positives == ("tjbuss",)


def test_fixtures_ship_with_package():
    import os

    import regrow

    path = os.path.join(os.path.dirname(regrow.__file__), "data", "fixtures.jsonl")
    shipped = load_corpus(path)
    assert shipped == list(FIXTURES)


def test_dataset_validation():
    with pytest.raises(CorpusFormatError):
        dataset("x", ["a"], ["a"])
    with pytest.raises(CorpusFormatError):
        dataset("x", ["a"], [], human_recovery=1.5)
    ds = dataset("x", [], ["aaa"])
    assert not ds.runnable
    assert not dataset("x", [""]).runnable
    with pytest.raises(CorpusFormatError):
        dataset("x", ["a\x01"]).validate_alphabet()


def test_corpus_round_trip(tmp_path):
    path = tmp_path / "corpus.jsonl"
    save_corpus(FIXTURES, path)
    assert load_corpus(path) == list(FIXTURES)


def test_corpus_errors(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "positives": ["x"]}\nnot json\n')
    with pytest.raises(CorpusFormatError) as err:
        load_corpus(path)
    assert "line 2" in str(err.value)

    path.write_text('{"id": "a", "positives": ["x"]}\n{"id": "a", "positives": ["y"]}\n')
    with pytest.raises(CorpusFormatError) as err:
        load_corpus(path)
    assert "duplicate" in str(err.value)

    path.write_text('{"positives": ["x"]}\n')
    with pytest.raises(CorpusFormatError):
        load_corpus(path)


def test_empty_positives_parse_but_flagged(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "neg-only", "positives": [], "negatives": ["a", "aaa"]}\n')
    (ds,) = load_corpus(path)
    assert not ds.runnable


def test_target_rank_uses_semantic_equivalence():
    # "aaa*a" and "aaaa*" both denote three-or-more a's; spelling differs
    ds = dataset("d", ["aaa"], [], target="aaaa*")
    rank, posterior = target_rank(ds, [make_candidate("aaa*a", 0.8)])
    assert rank == 1
    assert posterior == 0.8
    rank, _ = target_rank(ds, [make_candidate("aa", 0.8)])
    assert rank is None


def test_kbest_arithmetic():
    found = make_candidate("ab", 1.0)
    results = [
        (dataset("1", ["ab"], target="ab"), [found]),
        (dataset("2", ["ab"], target="ab"), [found]),
        (dataset("3", ["ab"], target="ab"), [found]),
        (dataset("4", ["ab"], target="zz"), [found]),
    ]
    score, skipped = kbest_score(results, 1)
    assert score == 0.75
    assert skipped == 0


def test_kbest_rank_beyond_k_not_counted():
    filler = [make_candidate(t, 0.01) for t in ("ab", "a.", ".b", "..", "[a-z]b")]
    target_cand = make_candidate("a(b|)") if False else make_candidate("ab*b")
    results = [(dataset("1", ["ab"], target="ab*b"), filler + [target_cand])]
    score, _ = kbest_score(results, 5)
    assert score == 0.0
    score, _ = kbest_score(results, 6)
    assert score == 1.0


def test_kbest_nondecreasing_in_k():
    filler = [make_candidate(t, 0.1) for t in ("a.", ".b", "..")]
    results = [
        (dataset("1", ["ab"], target="ab"), filler + [make_candidate("ab", 0.05)]),
        (dataset("2", ["ab"], target="ab"), [make_candidate("ab", 1.0)]),
        (dataset("3", ["ab"], target="zz"), filler),
    ]
    scores = [kbest_score(results, k)[0] for k in range(1, 7)]
    assert scores == sorted(scores)
    assert scores[0] == pytest.approx(1 / 3)
    assert scores[-1] == pytest.approx(2 / 3)


def test_kbest_k_larger_than_list():
    results = [(dataset("1", ["ab"], target="ab"), [make_candidate("ab", 1.0)])]
    score, _ = kbest_score(results, 50)
    assert score == 1.0


def test_kbest_excludes_missing_targets():
    results = [(dataset("1", ["ab"]), [make_candidate("ab", 1.0)])]
    score, skipped = kbest_score(results, 1)
    assert skipped == 1


def test_breakdown_arithmetic():
    cand = make_candidate("ab", 1.0)
    wrong = make_candidate("zb", 1.0)
    results = [
        (dataset("1", ["ab"], target="ab", human_recovery=0.9), [cand]),
        (dataset("2", ["ab"], target="ab", human_recovery=0.9), [cand]),
        (dataset("3", ["ab"], target="ab", human_recovery=0.1), [cand]),
        (dataset("4", ["zb"], target="ab", human_recovery=0.1), [wrong]),
    ]
    high, low, mean_recovery, excluded = breakdown(results, 10)
    assert (high, low, mean_recovery) == (1.0, 0.5, 0.5)
    assert excluded == 0


def test_breakdown_empty_bucket_reported_absent():
    cand = make_candidate("ab", 1.0)
    results = [(dataset("1", ["ab"], target="ab", human_recovery=1.0), [cand])]
    high, low, _, _ = breakdown(results, 10)
    assert high == 1.0
    assert low is None


def test_breakdown_excludes_missing_recovery():
    cand = make_candidate("ab", 1.0)
    results = [
        (dataset("1", ["ab"], target="ab", human_recovery=0.9), [cand]),
        (dataset("2", ["ab"], target="ab"), [cand]),
    ]
    _, _, _, excluded = breakdown(results, 10)
    assert excluded == 1


def test_report_round_trip(tmp_path):
    cand = make_candidate("ab", 1.0)
    results = [
        (dataset("1", ["ab"], target="ab", human_recovery=0.9), [cand]),
        (dataset("2", ["ab"], target="zb", human_recovery=0.2), [cand]),
        (dataset("3", ["ab"]), [cand]),
    ]
    report = build_report(results, (1, 5, 10))
    assert report.k_best[1] == 0.5
    # aggregates recompute exactly from rows
    rows_found = [r for r in report.rows if r.status == "ok"]
    assert report.k_best[10] == sum(r.found for r in rows_found) / len(rows_found)
    payload = report_to_dict(report)
    assert payload["k_best"]["1"] == 0.5
    csv_text = report_csv(report)
    assert csv_text.splitlines()[0] == "id,found,rank,target_posterior,human_recovery"
    assert len(csv_text.splitlines()) == 4
    json_path, csv_path = save_results(report, tmp_path / "out")
    assert json.load(open(json_path))["k_best"] == payload["k_best"]
    assert open(csv_path).read() == csv_text

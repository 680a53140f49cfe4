"""Command line interface: synth, eval, convert, serve.

Exit codes: 0 success, 2 bad arguments (argparse), 3 unparseable input,
4 positives required, 5 no consistent candidate, 1 unexpected failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import corpus, inference
from .automata import EmptyLanguageError, grammar_to_regex, regex_to_grammar
from .grammar import GrammarError, format_grammar, parse_grammar
from .recognition import PositivesRequiredError
from .regex import RegexParseError, parse_regex, print_regex
from .scoring import STATUS_NO_CONSISTENT

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_POSITIVES_REQUIRED = 4
EXIT_NO_CONSISTENT = 5

UNINFORMATIVE_THRESHOLD = 0.9


def _load_single_dataset(path, dataset_id=None):
    datasets = corpus.load_corpus(path)
    if not datasets:
        raise corpus.CorpusFormatError("no datasets in %s" % path)
    if dataset_id is not None:
        for ds in datasets:
            if ds.id == dataset_id:
                return ds
        raise corpus.CorpusFormatError("no dataset with id %r in %s" % (dataset_id, path))
    if len(datasets) > 1:
        raise corpus.CorpusFormatError(
            "%s holds %d datasets; pick one with --id" % (path, len(datasets))
        )
    return datasets[0]


def _ensemble_for(args):
    if getattr(args, "ensemble", None):
        return inference.load_ensemble(args.ensemble, seed=args.seed)
    return inference.default_ensemble(seed=args.seed)


def cmd_synth(args) -> int:
    ds = _load_single_dataset(args.data, getattr(args, "id", None))
    ds.validate_alphabet()
    if not ds.runnable:
        print("error: positive examples are required to grow a grammar", file=sys.stderr)
        return EXIT_POSITIVES_REQUIRED
    outcome = inference.run_ensemble(ds, _ensemble_for(args))
    if outcome.status == STATUS_NO_CONSISTENT:
        print("no consistent candidate; add more (or different) examples")
        return EXIT_NO_CONSISTENT
    top = outcome.candidates[: args.k]
    print("top %d of %d candidates:" % (len(top), len(outcome.candidates)))
    for i, cand in enumerate(top, start=1):
        print("%3d  %-30s posterior=%.6f" % (i, cand.canonical, cand.posterior))
    if outcome.candidates[0].posterior < UNINFORMATIVE_THRESHOLD:
        print(
            "status: uninformative: posterior max %.3f < %.2f; "
            "more examples would sharpen the ranking"
            % (outcome.candidates[0].posterior, UNINFORMATIVE_THRESHOLD)
        )
    else:
        print("status: ok")
    return EXIT_OK


def cmd_eval(args) -> int:
    datasets = corpus.load_corpus(args.corpus)
    if not datasets:
        print("error: empty corpus", file=sys.stderr)
        return EXIT_INPUT
    k_values = tuple(int(k) for k in args.k.split(","))
    results = []
    failures = []
    for ds in datasets:
        if not ds.runnable:
            failures.append((ds.id, "positives-required"))
            results.append((ds, []))
            continue
        try:
            ds.validate_alphabet()
            outcome = inference.run_ensemble(ds, _ensemble_for(args))
            results.append((ds, outcome.candidates))
        except Exception as exc:  # keep evaluating the rest of the corpus
            failures.append((ds.id, str(exc)))
            results.append((ds, []))
    report = corpus.build_report(results, k_values)
    for ds_id, why in failures:
        report.warnings.append("dataset %r failed: %s" % (ds_id, why))
    json_path, csv_path = corpus.save_results(report, args.out)
    print("k-best scores:")
    for k in k_values:
        print("  k=%-3d %.3f" % (k, report.k_best[k]))
    print("breakdown (human majority / minority):")
    for k in k_values:
        b = report.breakdown_by_k[k]
        print(
            "  k=%-3d %s / %s"
            % (
                k,
                "n/a" if b["human_majority"] is None else "%.3f" % b["human_majority"],
                "n/a" if b["human_minority"] is None else "%.3f" % b["human_minority"],
            )
        )
    if report.mean_human_recovery is not None:
        print("mean human recovery: %.3f" % report.mean_human_recovery)
    print("wrote %s and %s" % (json_path, csv_path))
    return EXIT_OK


def cmd_convert(args) -> int:
    text = open(args.input).read() if args.input else sys.stdin.read()
    if args.to == "grammar":
        ast = parse_regex(text.strip())
        print(format_grammar(regex_to_grammar(ast)))
    else:
        grammar = parse_grammar(text)
        print(print_regex(grammar_to_regex(grammar)))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(max_budget=args.max_budget)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regrow",
        description="Synthesize regexes from positive and negative example strings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="rank candidate regexes for one dataset")
    p.add_argument("--data", required=True, help="dataset file (JSON lines)")
    p.add_argument("--id", help="dataset id when the file holds several")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ensemble", help="ensemble configuration JSON")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="k-best evaluation over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", default="1,5,10", help="comma-separated k values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory for reports")
    p.add_argument("--ensemble", help="ensemble configuration JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("convert", help="convert between regex and grammar text")
    p.add_argument("--to", choices=("regex", "grammar"), required=True)
    p.add_argument("--input", help="input file (default: stdin)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("serve", help="run the interactive teaching service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-budget", type=float, default=60.0,
                   help="server-side cap on per-job inference seconds")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PositivesRequiredError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_POSITIVES_REQUIRED
    except (corpus.CorpusFormatError, RegexParseError, GrammarError, EmptyLanguageError,
            json.JSONDecodeError, FileNotFoundError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

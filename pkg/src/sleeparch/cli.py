"""Command-line entry point.

Subcommands: simulate, analyze, features, classify, graph. Outputs are
always files; diagnostics go to stderr. Exit codes: 0 success, 1 bad input,
2 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .classifiers import MODEL_NAMES, LabeledFeatureSet, ModelSpec, cross_validate
from .exceptions import InputError
from .features import FEATURE_NAMES, format_feature_csv, parse_feature_csv
from .markov import count_transitions, per_transition_tests, transition_matrix
from .report import build_report, cv_to_dict, dumps_canonical, export_transition_graph, export_violin_data, graph_from_report
from .simulator import builtin_spec, generate_corpus, spec_from_json, spec_to_json
from .stages import COHORTS, format_hypnogram, read_manifest

log = logging.getLogger("sleeparch")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def _write(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _read_text(path: str, flag: str) -> str:
    if not os.path.isfile(path):
        raise InputError(f"{flag}: file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_simulate(args) -> None:
    if args.spec:
        spec = spec_from_json(_read_text(args.spec, "--spec"))
    else:
        spec = builtin_spec(args.cohort)
    os.makedirs(args.out, exist_ok=True)
    if args.dump_spec:
        _write(os.path.join(args.out, f"{spec.name}_spec.json"), spec_to_json(spec))
        return
    corpus = generate_corpus(spec, args.recordings, args.epochs, args.seed, cohort=args.cohort)
    entries = []
    for h in corpus:
        fname = f"{h.subject_id}.csv"
        _write(os.path.join(args.out, fname), format_hypnogram(h))
        entries.append({"path": fname, "subject_id": h.subject_id, "cohort": h.cohort})

    # Merge into an existing manifest so both cohorts can share one directory.
    mpath = os.path.join(args.out, "manifest.json")
    existing = []
    if os.path.isfile(mpath):
        existing = json.loads(_read_text(mpath, "manifest"))
    new_ids = {e["subject_id"] for e in entries}
    merged = [e for e in existing if e["subject_id"] not in new_ids] + entries
    _write(mpath, json.dumps(merged, indent=2) + "\n")
    log.info("wrote %d recordings to %s", len(entries), args.out)


def cmd_analyze(args) -> None:
    text = _read_text(args.manifest, "--manifest")
    d = read_manifest(args.manifest)
    report = build_report(d, args.alpha, args.epsilon, text)
    _write(args.out, dumps_canonical(report))
    if args.graphs:
        os.makedirs(args.graphs, exist_ok=True)
        a, b = (count_transitions(d, c) for c in COHORTS)
        tests = per_transition_tests(a, b, args.alpha)
        for c, counts in (("patient", a), ("healthy", b)):
            export_transition_graph(transition_matrix(counts, True), tests, args.alpha,
                                    os.path.join(args.graphs, f"{c}.dot"))
    if args.violin_out:
        export_violin_data(d, args.violin_feature, args.violin_out)


def cmd_features(args) -> None:
    _read_text(args.manifest, "--manifest")
    d = read_manifest(args.manifest)
    _write(args.out, format_feature_csv(d))


def _model_params(args, name: str) -> dict:
    table = {
        "logreg": {"l2": args.l2, "lr": args.lr, "max_iter": args.max_iter, "tol": args.tol},
        "tree": {"max_depth": args.max_depth, "min_split": args.min_split},
        "forest": {"n_trees": args.n_trees, "max_depth": args.max_depth, "min_split": args.min_split},
        "svm": {"lam": args.svm_lambda, "iters": args.svm_iters},
    }
    return {k: v for k, v in table[name].items() if v is not None}


def cmd_classify(args) -> None:
    ids, cohorts, X = parse_feature_csv(_read_text(args.features, "--features"))
    S = LabeledFeatureSet.from_cohorts(X, cohorts, ids, FEATURE_NAMES)
    if args.columns:
        cols = [c.strip() for c in args.columns.split(",") if c.strip()]
        unknown = [c for c in cols if c not in FEATURE_NAMES]
        if unknown:
            raise InputError(f"--columns: unknown feature(s) {', '.join(unknown)}")
        S = S.select(cols)
    names = MODEL_NAMES if args.model == "all" else (args.model,)
    out = {
        "features": list(S.feature_names),
        "k": args.k,
        "seed": args.seed,
        "results": {n: cv_to_dict(cross_validate(S, ModelSpec(n, _model_params(args, n)), args.k, args.seed)) for n in names},
    }
    _write(args.out, dumps_canonical(out))


def cmd_graph(args) -> None:
    try:
        report = json.loads(_read_text(args.report, "--report"))
    except json.JSONDecodeError as exc:
        raise InputError(f"--report: invalid JSON: {exc}") from None
    _write(args.out, graph_from_report(report, args.cohort))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sleeparch", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="generate a synthetic cohort from a Markov spec")
    s.add_argument("--cohort", choices=COHORTS, required=True)
    s.add_argument("--recordings", type=int, default=100)
    s.add_argument("--epochs", type=int, default=960)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--spec", help="JSON spec file overriding the builtin one")
    s.add_argument("--dump-spec", action="store_true", help="only write the spec JSON")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="transition statistics for a two-cohort manifest")
    a.add_argument("--manifest", required=True)
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--epsilon", type=float, default=1e-9)
    a.add_argument("--out", required=True)
    a.add_argument("--graphs", help="directory for patient.dot / healthy.dot")
    a.add_argument("--violin-out", help="CSV path for per-recording feature values")
    a.add_argument("--violin-feature", default="avg_run_length", choices=FEATURE_NAMES)
    a.set_defaults(func=cmd_analyze)

    f = sub.add_parser("features", help="export the 27-feature table")
    f.add_argument("--manifest", required=True)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_features)

    c = sub.add_parser("classify", help="k-fold cohort classification")
    c.add_argument("--features", required=True)
    c.add_argument("--model", choices=(*MODEL_NAMES, "all"), default="all")
    c.add_argument("--k", type=int, default=5)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--columns", help="comma-separated subset of feature names")
    c.add_argument("--l2", type=float)
    c.add_argument("--lr", type=float)
    c.add_argument("--max-iter", type=int)
    c.add_argument("--tol", type=float)
    c.add_argument("--max-depth", type=int)
    c.add_argument("--min-split", type=int)
    c.add_argument("--n-trees", type=int)
    c.add_argument("--svm-lambda", type=float)
    c.add_argument("--svm-iters", type=int)
    c.set_defaults(func=cmd_classify)

    g = sub.add_parser("graph", help="DOT transition graph from a report")
    g.add_argument("--report", required=True)
    g.add_argument("--cohort", choices=COHORTS, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_graph)
    return p


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            log.setLevel(logging.INFO)
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0

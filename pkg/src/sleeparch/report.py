"""Analysis report assembly, canonical JSON, DOT graphs and violin-plot data."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .classifiers import CvResult
from .exceptions import InputError
from .features import FEATURE_NAMES, extract_features, feature_matrix
from .markov import (
    NON_SELF_PAIRS,
    ChiSquareResult,
    TransitionTestResult,
    chi_square_overall,
    count_transitions,
    kl_divergence,
    per_transition_tests,
    stage_frequency_test,
    transition_matrix,
)
from .special import format_p_value
from .stages import COHORTS, STAGES, CohortDataset, SleepStage

__all__ = [
    "canonical_number",
    "dumps_canonical",
    "build_report",
    "cv_to_dict",
    "probability_color",
    "EdgeColor",
    "format_transition_graph",
    "export_transition_graph",
    "graph_from_report",
    "export_violin_data",
]


def canonical_number(x):
    """Round to 12 significant digits; non-finite values become None."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _canon(obj):
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canon(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    return canonical_number(obj)


def dumps_canonical(obj) -> str:
    """JSON with insertion-ordered keys, 12 significant digits and a trailing LF."""
    return json.dumps(_canon(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _p(p: float):
    return format_p_value(p)


def _chi_dict(r: ChiSquareResult) -> dict:
    return {
        "statistic": r.statistic,
        "df": r.df,
        "p_value": _p(r.p_value),
        "dropped_categories": list(r.dropped_categories),
    }


def _test_dict(t: TransitionTestResult) -> dict:
    return {
        "from": t.source.name,
        "to": t.target.name,
        "statistic": t.statistic,
        "df": t.df,
        "p_value": _p(t.p_value),
        "significant": t.significant,
    }


def _summary(X: np.ndarray) -> dict:
    return {
        name: {"mean": X[:, i].mean(), "min": X[:, i].min(), "max": X[:, i].max()}
        for i, name in enumerate(FEATURE_NAMES)
    }


def cv_to_dict(cv: CvResult) -> dict:
    return {
        "model": cv.model,
        "k": cv.k,
        "seed": cv.seed,
        "per_fold": [{"accuracy": f.accuracy, "auc": f.auc, "n_test": f.n_test} for f in cv.per_fold],
        "mean_accuracy": cv.mean_accuracy,
        "mean_auc": cv.mean_auc,
        "auc_variance": cv.auc_variance,
    }


def build_report(d: CohortDataset, alpha: float = 0.05, epsilon: float = 1e-9, manifest_text: str = "",
                 cv: dict[str, CvResult] | None = None) -> dict:
    """Run the two-cohort comparison and collect everything in one ordered dict.

    KL divergence is patient relative to healthy, on self-excluded matrices.
    """
    d.require_both_cohorts()
    pat, hea = d.cohort("patient"), d.cohort("healthy")
    counts = {c: count_transitions(d, c) for c in COHORTS}
    mats = {c: transition_matrix(counts[c], exclude_self=True) for c in COHORTS}
    div = kl_divergence(mats["patient"], mats["healthy"], epsilon)
    overall = chi_square_overall(counts["patient"], counts["healthy"], exclude_self=True)
    tests = per_transition_tests(counts["patient"], counts["healthy"], alpha)
    freq = stage_frequency_test(pat, hea)

    cohorts = {}
    for c, sub in (("patient", pat), ("healthy", hea)):
        m = mats[c]
        cohorts[c] = {
            "n_recordings": len(sub),
            "total_epochs": counts[c].total_epochs,
            "transition_counts": counts[c].counts,
            "transition_matrix": {
                "exclude_self": m.exclude_self,
                "probs": m.probs,
                "row_support": m.row_support,
                "empty_rows": [STAGES[i].name for i in m.empty_rows],
            },
            "feature_summary": _summary(feature_matrix(sub)),
        }

    report = {
        "tool": "sleeparch",
        "version": __version__,
        "manifest_sha256": hashlib.sha256(manifest_text.encode("utf-8")).hexdigest(),
        "parameters": {"alpha": alpha, "epsilon": epsilon, "exclude_self": True},
        "stage_order": [s.name for s in STAGES],
        "feature_names": list(FEATURE_NAMES),
        "cohorts": cohorts,
        "divergence": {
            "direction": "patient||healthy",
            "log_base": "e",
            "per_state_kl": [v if s else None for v, s in zip(div.per_state_kl, div.supported)],
            "average_kl": div.average_kl,
            "smoothing_epsilon": div.smoothing_epsilon,
        },
        "overall_chi_square": _chi_dict(overall),
        "per_transition_tests": [_test_dict(t) for t in tests],
        "n_significant": sum(t.significant for t in tests),
        "stage_frequency_test": _chi_dict(freq),
    }
    if cv:
        report["cross_validation"] = {name: cv_to_dict(r) for name, r in cv.items()}
    return report


@dataclass(frozen=True)
class EdgeColor:
    r: int
    g: int
    b: int

    @property
    def hex(self) -> str:
        return f"#{self.r:02X}{self.g:02X}{self.b:02X}"


def _channel(v: float) -> int:
    return int(math.floor(v * 255.0 + 0.5))


def probability_color(p: float) -> EdgeColor:
    """Blue (0) -> yellow (0.5) -> red (1) ramp used for transition edges."""
    t = min(1.0, max(0.0, float(p)))
    if t <= 0.5:
        r, g, b = 2 * t, 2 * t, 1 - 2 * t
    else:
        r, g, b = 1.0, 2 - 2 * t, 0.0
    return EdgeColor(_channel(r), _channel(g), _channel(b))


def format_transition_graph(probs, significant, name: str = "transitions") -> str:
    """DOT digraph with one edge per significant non-self transition.

    `probs` is a 5x5 matrix; `significant` maps (from, to) stage pairs to bool.
    Edges appear in canonical pair order.
    """
    probs = np.asarray(probs, dtype=np.float64)
    lines = [f'digraph "{name}" {{', "  node [shape=circle];"]
    lines.extend(f"  {s.name};" for s in STAGES)
    for a, b in NON_SELF_PAIRS:
        if significant.get((a, b), False):
            p = probs[a, b]
            lines.append(f'  {a.name} -> {b.name} [label="{p:.3f}", color="{probability_color(p).hex}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_transition_graph(m, tests, alpha: float, path) -> str:
    """Write the DOT graph of matrix `m`, keeping edges whose test p < alpha."""
    sig = {(t.source, t.target): t.p_value < alpha and t.source != t.target for t in tests}
    text = format_transition_graph(m.probs, sig)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def graph_from_report(report: dict, cohort: str) -> str:
    """DOT text for `cohort` using the matrix and significance flags stored in a report."""
    if cohort not in report.get("cohorts", {}):
        raise InputError(f"report has no cohort {cohort!r}")
    probs = report["cohorts"][cohort]["transition_matrix"]["probs"]
    sig = {
        (SleepStage[t["from"]], SleepStage[t["to"]]): bool(t["significant"])
        for t in report["per_transition_tests"]
    }
    return format_transition_graph(probs, sig, cohort)


def _quantile_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}_quantiles{ext or '.csv'}"


def export_violin_data(d: CohortDataset, feature: str, path) -> tuple[str, str]:
    """Per-recording values of one feature plus per-cohort quantiles.

    Writes ``path`` (subject_id, cohort, value) and ``<path>_quantiles.csv``
    (cohort, n, min, q1, median, q3, max). Returns both file paths.
    """
    if feature not in FEATURE_NAMES:
        raise InputError(f"unknown feature {feature!r}")
    idx = FEATURE_NAMES.index(feature)
    path = os.fspath(path)
    values = [(h.subject_id, h.cohort, float(extract_features(h)[idx])) for h in d]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject_id", "cohort", "value"])
    for sid, c, v in values:
        w.writerow([sid, c, repr(canonical_number(v))])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())

    qbuf = io.StringIO()
    w = csv.writer(qbuf, lineterminator="\n")
    w.writerow(["cohort", "n", "min", "q1", "median", "q3", "max"])
    for c in COHORTS:
        vals = np.array([v for _, coh, v in values if coh == c])
        if vals.size == 0:
            continue
        qs = np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0])
        w.writerow([c, vals.size, *(repr(canonical_number(q)) for q in qs)])
    qpath = _quantile_path(path)
    with open(qpath, "w", encoding="utf-8", newline="") as fh:
        fh.write(qbuf.getvalue())
    return path, qpath

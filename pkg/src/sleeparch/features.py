"""Structural and sequential features of a single hypnogram.

The canonical vector has 27 entries:

====== ===========================================================
0-19   relative frequency of each non-self bigram (W->N1, W->N2, ...)
20     average run length (epochs)
21     maximum run length (epochs)
22     Shannon entropy of stage occupancy (bits)
23-26  proportion of epochs in N1, N2, N3, REM
====== ===========================================================

W's proportion is left out because the five proportions sum to one.
"""

from __future__ import annotations

import csv
import io
from typing import Sequence

import numpy as np

from .exceptions import InputError
from .stages import N_STAGES, CohortDataset, Hypnogram, run_lengths
from .markov import NON_SELF_PAIRS

__all__ = [
    "FEATURE_NAMES",
    "N_FEATURES",
    "average_run_length",
    "max_run_length",
    "stage_entropy",
    "stage_proportions",
    "bigram_frequencies",
    "extract_features",
    "feature_matrix",
    "format_feature_csv",
    "parse_feature_csv",
]

FEATURE_NAMES: tuple[str, ...] = (
    *(f"bigram_{a.name}_{b.name}" for a, b in NON_SELF_PAIRS),
    "avg_run_length",
    "max_run_length",
    "stage_entropy",
    "prop_N1",
    "prop_N2",
    "prop_N3",
    "prop_REM",
)
N_FEATURES = len(FEATURE_NAMES)

_OFF_DIAG = ~np.eye(N_STAGES, dtype=bool)


def average_run_length(h: Hypnogram) -> float:
    """Epoch count divided by the number of runs."""
    return len(h) / run_lengths(h.codes).size


def max_run_length(h: Hypnogram) -> int:
    return int(run_lengths(h.codes).max())


def stage_proportions(h: Hypnogram) -> np.ndarray:
    return np.bincount(h.codes, minlength=N_STAGES) / len(h)


def stage_entropy(h: Hypnogram) -> float:
    """Shannon entropy in bits of the stage occupancy distribution."""
    q = stage_proportions(h)
    q = q[q > 0]
    return float(max(0.0, -np.sum(q * np.log2(q))))


def bigram_frequencies(h: Hypnogram) -> np.ndarray:
    """Share of each non-self stage change among all stage changes.

    All zeros when the hypnogram never changes stage.
    """
    c = h.codes
    counts = np.bincount(c[:-1] * N_STAGES + c[1:], minlength=N_STAGES * N_STAGES)
    off = counts.reshape(N_STAGES, N_STAGES)[_OFF_DIAG].astype(np.float64)
    total = off.sum()
    return off / total if total else off


def extract_features(h: Hypnogram) -> np.ndarray:
    """Assemble the 27-entry feature vector (see module docstring for layout)."""
    runs = run_lengths(h.codes)
    props = stage_proportions(h)
    vec = np.empty(N_FEATURES)
    vec[:20] = bigram_frequencies(h)
    vec[20] = len(h) / runs.size
    vec[21] = runs.max()
    vec[22] = stage_entropy(h)
    vec[23:27] = props[1:]
    return vec


def feature_matrix(d: CohortDataset | Sequence[Hypnogram]) -> np.ndarray:
    recs = list(d)
    if not recs:
        return np.empty((0, N_FEATURES))
    return np.vstack([extract_features(h) for h in recs])


def _fmt(x: float) -> str:
    return repr(float(f"{x:.12g}"))


def format_feature_csv(d: CohortDataset | Sequence[Hypnogram]) -> str:
    """Feature table as CSV: subject_id, cohort, then the 27 named features."""
    recs = list(d)
    X = feature_matrix(recs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject_id", "cohort", *FEATURE_NAMES])
    for h, row in zip(recs, X):
        w.writerow([h.subject_id, h.cohort, *(_fmt(v) for v in row)])
    return buf.getvalue()


def parse_feature_csv(text: str) -> tuple[list[str], list[str], np.ndarray]:
    """Inverse of :func:`format_feature_csv`: (subject_ids, cohorts, X)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:2] != ["subject_id", "cohort"] or tuple(rows[0][2:]) != FEATURE_NAMES:
        raise InputError("feature CSV header does not match the canonical 27-feature layout")
    ids, cohorts, values = [], [], []
    for n, r in enumerate(rows[1:], start=2):
        if not r:
            continue
        if len(r) != 2 + N_FEATURES:
            raise InputError(f"feature CSV line {n}: expected {2 + N_FEATURES} columns")
        ids.append(r[0])
        cohorts.append(r[1])
        try:
            values.append([float(v) for v in r[2:]])
        except ValueError:
            raise InputError(f"feature CSV line {n}: non-numeric value") from None
    X = np.array(values, dtype=np.float64).reshape(-1, N_FEATURES)
    if not np.isfinite(X).all():
        raise InputError("feature CSV contains non-finite values")
    return ids, cohorts, X

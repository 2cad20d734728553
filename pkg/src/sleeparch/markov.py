"""Transition counting, conditional matrices, KL divergence and chi-square tests.

All matrices are 5x5 in canonical stage order (W, N1, N2, N3, REM).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .exceptions import InputError
from .special import chi_square_sf
from .stages import N_STAGES, STAGES, CohortDataset, Hypnogram, SleepStage

__all__ = [
    "TransitionCounts",
    "TransitionMatrix",
    "TransitionTestResult",
    "DivergenceReport",
    "ChiSquareResult",
    "NON_SELF_PAIRS",
    "count_transitions",
    "stage_occupancy",
    "transition_matrix",
    "kl_divergence",
    "pearson_chi_square",
    "chi_square_overall",
    "per_transition_tests",
    "stage_frequency_test",
]

# 20 ordered (from, to) pairs with from != to, row-major.
NON_SELF_PAIRS: tuple[tuple[SleepStage, SleepStage], ...] = tuple(
    (a, b) for a in STAGES for b in STAGES if a != b
)

_OFF_DIAG = ~np.eye(N_STAGES, dtype=bool)


def _admitted_mask(exclude_self: bool) -> np.ndarray:
    return _OFF_DIAG.copy() if exclude_self else np.ones((N_STAGES, N_STAGES), dtype=bool)


@dataclass(frozen=True)
class TransitionCounts:
    """Adjacent-pair tallies. ``counts[i, j]`` counts stage i followed by j."""

    counts: np.ndarray
    total_epochs: int
    n_recordings: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (N_STAGES, N_STAGES) or (c < 0).any():
            raise InputError("counts must be a non-negative 5x5 integer array")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n_transitions(self) -> int:
        return int(self.counts.sum())

    def non_self(self) -> np.ndarray:
        """The 20 non-self counts in canonical pair order."""
        return self.counts[_OFF_DIAG]


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-conditional transition probabilities.

    ``row_support[i]`` is the outgoing count used to normalize row i; rows
    with zero support are all-zero and listed in ``empty_rows``.
    """

    probs: np.ndarray
    exclude_self: bool
    row_support: np.ndarray

    @property
    def empty_rows(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.row_support == 0))

    @property
    def supported(self) -> np.ndarray:
        return self.row_support > 0


@dataclass(frozen=True)
class TransitionTestResult:
    source: SleepStage
    target: SleepStage
    statistic: float
    df: int
    p_value: float
    significant: bool

    @property
    def label(self) -> str:
        return f"{self.source.name}->{self.target.name}"


@dataclass(frozen=True)
class DivergenceReport:
    """Per-state KL(P_i || Q_i) in nats plus their unweighted mean.

    States lacking support in either matrix get 0.0 and are excluded from
    the average (see ``supported``).
    """

    per_state_kl: np.ndarray
    average_kl: float
    smoothing_epsilon: float
    supported: np.ndarray


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float
    dropped_categories: tuple[str, ...] = field(default=())


def _recordings(d, cohort_filter) -> list[Hypnogram]:
    if isinstance(d, Hypnogram):
        recs = [d]
    elif isinstance(d, CohortDataset):
        recs = list(d.recordings)
    else:
        recs = list(d)
    if cohort_filter is not None:
        recs = [h for h in recs if h.cohort == cohort_filter]
    return recs


def count_transitions(d: CohortDataset | Hypnogram | Iterable[Hypnogram], cohort_filter: str | None = None) -> TransitionCounts:
    """Tally adjacent stage pairs within each recording, never across recordings.

    Raises
    ------
    InputError
        If no selected recording has at least two epochs.
    """
    recs = _recordings(d, cohort_filter)
    if not any(len(h) >= 2 for h in recs):
        raise InputError("no recording with at least 2 epochs in selection")
    counts = np.zeros(N_STAGES * N_STAGES, dtype=np.int64)
    total = 0
    for h in recs:
        c = h.codes
        total += c.size
        counts += np.bincount(c[:-1] * N_STAGES + c[1:], minlength=N_STAGES * N_STAGES)
    return TransitionCounts(counts.reshape(N_STAGES, N_STAGES), total, len(recs))


def stage_occupancy(d: CohortDataset | Hypnogram | Iterable[Hypnogram], cohort_filter: str | None = None) -> np.ndarray:
    """Epoch count per stage, summed over recordings."""
    recs = _recordings(d, cohort_filter)
    occ = np.zeros(N_STAGES, dtype=np.int64)
    for h in recs:
        occ += np.bincount(h.codes, minlength=N_STAGES)
    return occ


def transition_matrix(c: TransitionCounts, exclude_self: bool = True) -> TransitionMatrix:
    """Normalize each row of `c` over its admitted cells.

    With ``exclude_self`` the diagonal is dropped before normalizing, so each
    supported row is the next-stage distribution given that the stage changes.
    """
    admitted = np.where(_admitted_mask(exclude_self), c.counts, 0).astype(np.float64)
    support = admitted.sum(axis=1)
    probs = np.zeros_like(admitted)
    nz = support > 0
    probs[nz] = admitted[nz] / support[nz, None]
    return TransitionMatrix(probs, bool(exclude_self), support.astype(np.int64))


def kl_divergence(P: TransitionMatrix, Q: TransitionMatrix, epsilon: float = 1e-9) -> DivergenceReport:
    """Row-wise KL(P || Q) with additive smoothing.

    Each admitted cell of both rows gets `epsilon` added, rows are
    renormalized, then ``sum p log(p / q)`` (natural log) is taken.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be > 0")
    if P.exclude_self != Q.exclude_self:
        raise InputError("matrices disagree on exclude_self")
    mask = _admitted_mask(P.exclude_self)
    supported = P.supported & Q.supported
    kl = np.zeros(N_STAGES)
    for i in np.flatnonzero(supported):
        p = P.probs[i][mask[i]] + epsilon
        q = Q.probs[i][mask[i]] + epsilon
        p = p / p.sum()
        q = q / q.sum()
        kl[i] = max(0.0, float(np.sum(p * np.log(p / q))))
    avg = float(kl[supported].mean()) if supported.any() else 0.0
    return DivergenceReport(kl, avg, float(epsilon), supported)


def pearson_chi_square(table) -> tuple[float, int, np.ndarray]:
    """Pearson chi-square for an R x K contingency table.

    Rows and columns with zero totals (zero expected counts) are dropped and
    the degrees of freedom reduced accordingly.

    Returns
    -------
    statistic, df, kept_columns
        ``df`` is 0 when fewer than two rows or columns remain.
    """
    t = np.asarray(table, dtype=np.float64)
    t = t[t.sum(axis=1) > 0]
    keep = t.sum(axis=0) > 0 if t.size else np.zeros(np.shape(table)[1], dtype=bool)
    t = t[:, keep]
    r, k = t.shape
    if r < 2 or k < 2:
        return 0.0, 0, keep
    row = t.sum(axis=1)
    col = t.sum(axis=0)
    n = row.sum()
    stat = 0.0
    # Per column, add the row terms first: keeps the value bit-identical when rows are swapped.
    for j in range(k):
        col_term = 0.0
        for i in range(r):
            e = row[i] * col[j] / n
            col_term += (t[i, j] - e) ** 2 / e
        stat += col_term
    return float(stat), (r - 1) * (k - 1), keep


def _category_labels(exclude_self: bool) -> list[str]:
    mask = _admitted_mask(exclude_self)
    return [f"{a.name}->{b.name}" for a in STAGES for b in STAGES if mask[a, b]]


def chi_square_overall(a: TransitionCounts, b: TransitionCounts, exclude_self: bool = True) -> ChiSquareResult:
    """Homogeneity test of the transition-category mix between two cohorts.

    The 2 x K table has one column per admitted transition (K = 20 with
    ``exclude_self``); unobserved categories are dropped.
    """
    mask = _admitted_mask(exclude_self)
    table = np.vstack([a.counts[mask], b.counts[mask]])
    if table[0].sum() == 0 or table[1].sum() == 0:
        raise InputError("each cohort needs at least one admitted transition")
    labels = _category_labels(exclude_self)
    stat, df, keep = pearson_chi_square(table)
    if keep.sum() < 2:
        raise InputError("fewer than 2 admitted transition categories observed")
    dropped = tuple(lbl for lbl, k in zip(labels, keep) if not k)
    return ChiSquareResult(stat, df, chi_square_sf(stat, df), dropped)


def per_transition_tests(a: TransitionCounts, b: TransitionCounts, alpha: float = 0.05) -> list[TransitionTestResult]:
    """One 2x2 test per ordered non-self pair.

    For pair (i, j) the table is ``[[a_ij, A - a_ij], [b_ij, B - b_ij]]``
    where A and B are the cohorts' total non-self transitions. Pearson
    statistic without continuity correction, df = 1. Degenerate tables give
    statistic 0 and p = 1.
    """
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    na, nb = a.non_self(), b.non_self()
    ta, tb = int(na.sum()), int(nb.sum())
    results = []
    for k, (src, dst) in enumerate(NON_SELF_PAIRS):
        table = [[na[k], ta - na[k]], [nb[k], tb - nb[k]]]
        stat, df, _ = pearson_chi_square(table)
        p = chi_square_sf(stat, 1) if df else 1.0
        if not df:
            stat = 0.0
        results.append(TransitionTestResult(src, dst, stat, 1, p, p < alpha))
    return results


def stage_frequency_test(a, b) -> ChiSquareResult:
    """Pearson test on the 2 x 5 stage-occupancy table of two recording sets."""
    occ_a, occ_b = stage_occupancy(a), stage_occupancy(b)
    if occ_a.sum() == 0 or occ_b.sum() == 0:
        raise InputError("stage frequency test needs two non-empty selections")
    stat, df, keep = pearson_chi_square(np.vstack([occ_a, occ_b]))
    dropped = tuple(s.name for s, k in zip(STAGES, keep) if not k)
    p = chi_square_sf(stat, df) if df else 1.0
    return ChiSquareResult(stat, df, p, dropped)

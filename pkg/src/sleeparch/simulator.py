"""Seeded Markov-chain hypnogram generator.

A chain is described by two parts: ``conditional_change[i]``, the next-stage
distribution given that the stage changes (diagonal 0), and
``self_stay[i]``, the probability of repeating stage i. The built-in
cohort specs take their change rows from published transition graphs of a
stroke cohort and a healthy cohort; the self-stay values are synthetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError
from .rng import SplitMix64, derive_seed
from .stages import N_STAGES, STAGES, CohortDataset, Hypnogram, SleepStage, parse_stage

__all__ = [
    "MarkovChainSpec",
    "PUBLISHED_EDGES",
    "DEFAULT_SELF_STAY",
    "builtin_spec",
    "generate",
    "generate_corpus",
    "spec_to_json",
    "spec_from_json",
    "full_transition_matrix",
    "stationary_distribution",
]

# Significant non-self edges of the two published transition graphs.
# Rows shown there do not always sum to one since insignificant edges were omitted.
PUBLISHED_EDGES: dict[str, dict[tuple[str, str], float]] = {
    "patient": {
        ("N1", "REM"): 0.068,
        ("N2", "N1"): 0.223,
        ("N2", "N3"): 0.242,
        ("N2", "REM"): 0.181,
        ("N2", "W"): 0.354,
        ("N3", "N1"): 0.080,
        ("N3", "N2"): 0.699,
        ("N3", "REM"): 0.058,
        ("N3", "W"): 0.163,
        ("REM", "N1"): 0.263,
        ("REM", "N2"): 0.415,
        ("W", "N1"): 0.629,
        ("W", "N2"): 0.344,
    },
    "healthy": {
        ("N1", "REM"): 0.104,
        ("N2", "N1"): 0.289,
        ("N2", "N3"): 0.418,
        ("N2", "REM"): 0.130,
        ("N2", "W"): 0.164,
        ("N3", "N1"): 0.028,
        ("N3", "N2"): 0.918,
        ("N3", "REM"): 0.005,
        ("N3", "W"): 0.049,
        ("REM", "N1"): 0.469,
        ("REM", "N2"): 0.222,
        ("W", "N1"): 0.933,
        ("W", "N2"): 0.044,
    },
}

# Synthetic; chosen so mean run lengths are about 5 (patient) and 10 (healthy) epochs.
DEFAULT_SELF_STAY = {"patient": 0.80, "healthy": 0.90}


@dataclass(frozen=True, eq=False)
class MarkovChainSpec:
    conditional_change: np.ndarray
    self_stay: np.ndarray
    initial_stage: SleepStage = SleepStage.W
    name: str = "custom"
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        C = np.array(self.conditional_change, dtype=np.float64)
        s = np.array(self.self_stay, dtype=np.float64)
        if C.shape != (N_STAGES, N_STAGES) or s.shape != (N_STAGES,):
            raise InputError("conditional_change must be 5x5 and self_stay length 5")
        if (C < 0).any() or np.any(np.diag(C) != 0):
            raise InputError("conditional_change must be non-negative with a zero diagonal")
        if np.any(np.abs(C.sum(axis=1) - 1.0) > 1e-12):
            raise InputError("each conditional_change row must sum to 1")
        if (s < 0).any() or (s >= 1).any():
            raise InputError("self_stay values must lie in [0, 1)")
        C.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "conditional_change", C)
        object.__setattr__(self, "self_stay", s)
        object.__setattr__(self, "initial_stage", SleepStage(int(self.initial_stage)))


def builtin_spec(cohort: str, self_stay: float | None = None) -> MarkovChainSpec:
    """Spec built from the published edges of `cohort` ("patient" or "healthy").

    Each row is renormalized over its shown edges; the applied row sums are
    kept in ``provenance["row_sums"]``.
    """
    if cohort not in PUBLISHED_EDGES:
        raise InputError(f"no builtin spec for cohort {cohort!r}")
    raw = np.zeros((N_STAGES, N_STAGES))
    for (a, b), p in PUBLISHED_EDGES[cohort].items():
        raw[parse_stage(a), parse_stage(b)] = p
    sums = raw.sum(axis=1)
    C = raw / sums[:, None]
    stay = DEFAULT_SELF_STAY[cohort] if self_stay is None else self_stay
    prov = {
        "source": "published transition graph, significant edges only",
        "row_sums": {s.name: round(float(v), 12) for s, v in zip(STAGES, sums)},
        "self_stay": "synthetic",
    }
    return MarkovChainSpec(C, np.full(N_STAGES, stay), SleepStage.W, cohort, prov)


def _cumulative_rows(C: np.ndarray) -> list[list[float]]:
    return [list(np.cumsum(row)) for row in C]


def _sample_codes(spec: MarkovChainSpec, n_epochs: int, seed: int) -> list[int]:
    rng = SplitMix64(seed)
    cum = _cumulative_rows(spec.conditional_change)
    last_nz = [int(np.flatnonzero(row)[-1]) for row in spec.conditional_change]
    stay = [float(v) for v in spec.self_stay]
    cur = int(spec.initial_stage)
    out = [cur]
    for _ in range(n_epochs - 1):
        if rng.random() >= stay[cur]:
            u = rng.random()
            row = cum[cur]
            nxt = last_nz[cur]
            for j in range(N_STAGES):
                if u < row[j]:
                    nxt = j
                    break
            cur = nxt
        out.append(cur)
    return out


def generate(spec: MarkovChainSpec, n_epochs: int, seed: int, subject_id: str | None = None, cohort: str | None = None) -> Hypnogram:
    """Simulate one hypnogram of `n_epochs` epochs.

    Starts in ``spec.initial_stage``. Each step draws u from the SplitMix64
    stream; the stage repeats when ``u < self_stay[current]``, otherwise a
    second draw picks the next stage by inverse CDF over the change row in
    canonical order.
    """
    if n_epochs < 1:
        raise InputError("n_epochs must be >= 1")
    cohort = cohort or (spec.name if spec.name in PUBLISHED_EDGES else "patient")
    subject_id = subject_id or f"sim-{spec.name}-0"
    return Hypnogram.from_codes(subject_id, cohort, _sample_codes(spec, n_epochs, seed))


def generate_corpus(spec: MarkovChainSpec, n_recordings: int, epochs_per_recording: int, seed: int, cohort: str | None = None) -> CohortDataset:
    """`n_recordings` independent recordings; recording r uses ``derive_seed(seed, r)``."""
    if n_recordings < 1 or epochs_per_recording < 1:
        raise InputError("corpus sizes must be positive")
    recs = tuple(
        generate(spec, epochs_per_recording, derive_seed(seed, r), f"sim-{spec.name}-{r}", cohort)
        for r in range(n_recordings)
    )
    return CohortDataset(recs)


def full_transition_matrix(spec: MarkovChainSpec) -> np.ndarray:
    """One-step matrix including self transitions."""
    s = spec.self_stay
    return np.diag(s) + (1.0 - s)[:, None] * spec.conditional_change


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Left eigenvector for eigenvalue 1, via numpy's eigensolver."""
    w, v = np.linalg.eig(P.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1.0))])
    return pi / pi.sum()


def spec_to_json(spec: MarkovChainSpec) -> str:
    doc = {
        "name": spec.name,
        "initial_stage": spec.initial_stage.name,
        "conditional_change": [[float(x) for x in row] for row in spec.conditional_change],
        "self_stay": [float(x) for x in spec.self_stay],
        "provenance": spec.provenance,
    }
    return json.dumps(doc, indent=2) + "\n"


def spec_from_json(text: str) -> MarkovChainSpec:
    try:
        doc = json.loads(text)
        return MarkovChainSpec(
            np.array(doc["conditional_change"], dtype=np.float64),
            np.array(doc["self_stay"], dtype=np.float64),
            parse_stage(doc.get("initial_stage", "W")),
            str(doc.get("name", "custom")),
            doc.get("provenance", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"invalid spec file: {exc}") from None

"""Sleep-stage alphabet, hypnograms, run-length encoding and dataset ingestion.

Hypnogram CSV files have a header ``epoch,stage`` followed by one row per
30 s epoch. A manifest is a JSON array of
``{"path": ..., "subject_id": ..., "cohort": "patient" | "healthy"}``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InputError

__all__ = [
    "SleepStage",
    "STAGES",
    "N_STAGES",
    "COHORTS",
    "Hypnogram",
    "Run",
    "CohortDataset",
    "parse_stage",
    "parse_hypnogram",
    "format_hypnogram",
    "read_hypnogram",
    "load_manifest",
    "read_manifest",
    "run_length_encode",
    "run_length_decode",
]


class SleepStage(enum.IntEnum):
    """Five-valued stage alphabet in canonical index order."""

    W = 0
    N1 = 1
    N2 = 2
    N3 = 3
    REM = 4

    def __str__(self) -> str:
        return self.name


STAGES: tuple[SleepStage, ...] = tuple(SleepStage)
N_STAGES = len(STAGES)
COHORTS = ("patient", "healthy")

_ALIASES = {
    "W": SleepStage.W,
    "WAKE": SleepStage.W,
    "N1": SleepStage.N1,
    "N2": SleepStage.N2,
    "N3": SleepStage.N3,
    "REM": SleepStage.REM,
    "R": SleepStage.REM,
}


def parse_stage(token: str) -> SleepStage:
    """Map a stage token (case-insensitive, aliases allowed) to a SleepStage.

    ``Wake`` is accepted for W and ``R`` for REM. N4 is rejected: inputs are
    expected to be R&K-merged already.
    """
    try:
        return _ALIASES[token.strip().upper()]
    except KeyError:
        raise InputError(f"unknown stage token {token!r}") from None


def _check_cohort(cohort: str) -> str:
    if cohort not in COHORTS:
        raise InputError(f"invalid cohort label {cohort!r}; expected one of {COHORTS}")
    return cohort


@dataclass(frozen=True)
class Hypnogram:
    """One subject's stage sequence, one entry per epoch.

    Parameters
    ----------
    subject_id : str
    cohort : {"patient", "healthy"}
    stages : sequence of SleepStage
        Coerced to a tuple of :class:`SleepStage`.
    epoch_seconds : int
        Epoch duration. Carried for provenance only; every analysis in this
        package counts epochs.
    """

    subject_id: str
    cohort: str
    stages: tuple[SleepStage, ...]
    epoch_seconds: int = 30

    def __post_init__(self):
        stages = tuple(SleepStage(int(s)) for s in self.stages)
        if not stages:
            raise InputError(f"hypnogram {self.subject_id!r} is empty")
        if int(self.epoch_seconds) <= 0:
            raise InputError("epoch_seconds must be positive")
        _check_cohort(self.cohort)
        object.__setattr__(self, "stages", stages)

    def __len__(self) -> int:
        return len(self.stages)

    @cached_property
    def codes(self) -> np.ndarray:
        """Stage indices as a read-only int64 array."""
        arr = np.fromiter((int(s) for s in self.stages), dtype=np.int64, count=len(self.stages))
        arr.setflags(write=False)
        return arr

    @classmethod
    def from_codes(cls, subject_id: str, cohort: str, codes: Iterable[int], epoch_seconds: int = 30):
        return cls(subject_id, cohort, tuple(SleepStage(int(c)) for c in codes), epoch_seconds)


@dataclass(frozen=True)
class Run:
    """Maximal stretch of consecutive epochs with the same stage."""

    stage: SleepStage
    start: int
    length: int


@dataclass(frozen=True)
class CohortDataset:
    """Labelled collection of hypnograms, kept in manifest order."""

    recordings: tuple[Hypnogram, ...]
    manifest_path: str = ""

    def __post_init__(self):
        recs = tuple(self.recordings)
        seen = set()
        for h in recs:
            if h.subject_id in seen:
                raise InputError(f"duplicate subject_id {h.subject_id!r}")
            seen.add(h.subject_id)
        object.__setattr__(self, "recordings", recs)

    def __len__(self) -> int:
        return len(self.recordings)

    def __iter__(self):
        return iter(self.recordings)

    def cohort(self, label: str) -> "CohortDataset":
        """Sub-dataset holding only recordings of one cohort."""
        _check_cohort(label)
        return CohortDataset(tuple(h for h in self.recordings if h.cohort == label), self.manifest_path)

    def require_both_cohorts(self) -> None:
        present = {h.cohort for h in self.recordings}
        missing = [c for c in COHORTS if c not in present]
        if missing:
            raise InputError(f"dataset lacks cohort(s): {', '.join(missing)}")

    def merged(self, other: "CohortDataset") -> "CohortDataset":
        return CohortDataset(self.recordings + other.recordings, self.manifest_path)


def parse_hypnogram(csv_text: str, subject_id: str, cohort: str, epoch_seconds: int = 30) -> Hypnogram:
    """Parse hypnogram CSV text.

    The header must be ``epoch,stage``; epoch indices must be strictly
    increasing. Errors name the offending line.

    Examples
    --------
    >>> parse_hypnogram("epoch,stage\\n0,W\\n1,N1", "s1", "healthy").stages
    (<SleepStage.W: 0>, <SleepStage.N1: 1>)
    """
    _check_cohort(cohort)
    reader = csv.reader(io.StringIO(csv_text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError(f"{subject_id}: empty hypnogram file") from None
    if [c.strip().lower() for c in header] != ["epoch", "stage"]:
        raise InputError(f"{subject_id}: header must be 'epoch,stage', got {','.join(header)!r}")

    stages = []
    last_epoch = None
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputError(f"{subject_id}: line {lineno}: expected 2 columns, got {len(row)}")
        try:
            epoch = int(row[0])
        except ValueError:
            raise InputError(f"{subject_id}: line {lineno}: bad epoch index {row[0]!r}") from None
        if last_epoch is not None and epoch <= last_epoch:
            raise InputError(f"{subject_id}: line {lineno}: non-monotonic epoch index {epoch}")
        last_epoch = epoch
        try:
            stages.append(parse_stage(row[1]))
        except InputError:
            raise InputError(f"{subject_id}: line {lineno}: unknown stage token {row[1]!r}") from None
    if not stages:
        raise InputError(f"{subject_id}: hypnogram has an empty body")
    return Hypnogram(subject_id, cohort, tuple(stages), epoch_seconds)


def format_hypnogram(h: Hypnogram) -> str:
    """Serialize to canonical CSV (LF endings, canonical stage spelling)."""
    lines = ["epoch,stage"]
    lines.extend(f"{i},{s.name}" for i, s in enumerate(h.stages))
    return "\n".join(lines) + "\n"


def read_hypnogram(path: str | os.PathLike, subject_id: str, cohort: str) -> Hypnogram:
    with open(path, encoding="utf-8") as fh:
        return parse_hypnogram(fh.read(), subject_id, cohort)


def load_manifest(json_text: str, base_dir: str | os.PathLike = ".", manifest_path: str = "") -> CohortDataset:
    """Build a dataset from manifest JSON; relative paths resolve against `base_dir`."""
    try:
        entries = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest is not valid JSON: {exc}") from None
    if not isinstance(entries, list):
        raise InputError("manifest must be a JSON array")

    seen = set()
    recordings = []
    for n, entry in enumerate(entries):
        if not isinstance(entry, dict) or not {"path", "subject_id", "cohort"} <= entry.keys():
            raise InputError(f"manifest entry {n} must have path, subject_id and cohort")
        sid = str(entry["subject_id"])
        cohort = _check_cohort(entry["cohort"])
        if sid in seen:
            raise InputError(f"duplicate subject_id {sid!r} in manifest")
        seen.add(sid)
        path = os.path.join(base_dir, entry["path"])
        if not os.path.isfile(path):
            raise InputError(f"missing hypnogram file {path!r} (subject {sid})")
        recordings.append(read_hypnogram(path, sid, cohort))
    return CohortDataset(tuple(recordings), manifest_path)


def read_manifest(path: str | os.PathLike) -> CohortDataset:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise InputError(f"manifest file not found: {path!r}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_manifest(text, os.path.dirname(path) or ".", path)


def run_length_encode(h: Hypnogram | Sequence[int]) -> list[Run]:
    """Split a stage sequence into maximal constant runs.

    >>> [(r.stage.name, r.start, r.length) for r in run_length_encode(
    ...     Hypnogram.from_codes("x", "healthy", [0, 1, 1, 2]))]
    [('W', 0, 1), ('N1', 1, 2), ('N2', 3, 1)]
    """
    codes = h.codes if isinstance(h, Hypnogram) else np.asarray(h, dtype=np.int64)
    if codes.size == 0:
        return []
    starts = np.flatnonzero(np.r_[True, codes[1:] != codes[:-1]])
    lengths = np.diff(np.r_[starts, codes.size])
    return [Run(SleepStage(int(codes[s])), int(s), int(n)) for s, n in zip(starts, lengths)]


def run_length_decode(runs: Iterable[Run]) -> tuple[SleepStage, ...]:
    out: list[SleepStage] = []
    for r in runs:
        out.extend([r.stage] * r.length)
    return tuple(out)


def run_lengths(codes: np.ndarray) -> np.ndarray:
    """Run lengths of an integer code array (no Run objects)."""
    starts = np.flatnonzero(np.r_[True, codes[1:] != codes[:-1]])
    return np.diff(np.r_[starts, codes.size])

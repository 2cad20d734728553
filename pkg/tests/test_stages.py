import json

import pytest
from hypothesis import given, strategies as st

from sleeparch import (
    CohortDataset,
    Hypnogram,
    InputError,
    SleepStage,
    format_hypnogram,
    load_manifest,
    parse_hypnogram,
    read_manifest,
    run_length_decode,
    run_length_encode,
)
from sleeparch.stages import parse_stage

W, N1, N2, N3, REM = SleepStage


def hyp(codes, cohort="healthy", sid="s"):
    return Hypnogram.from_codes(sid, cohort, codes)


def test_canonical_order():
    assert [s.name for s in SleepStage] == ["W", "N1", "N2", "N3", "REM"]
    assert [int(s) for s in SleepStage] == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("token,stage", [("w", W), ("Wake", W), ("n3", N3), ("R", REM), ("rem", REM), (" N2 ", N2)])
def test_parse_stage_aliases(token, stage):
    assert parse_stage(token) is stage


@pytest.mark.parametrize("token", ["N4", "MT", "?", "", "S1"])
def test_parse_stage_rejects(token):
    with pytest.raises(InputError):
        parse_stage(token)


def test_parse_minimal():
    h = parse_hypnogram("epoch,stage\n0,W\n1,N1", "s1", "healthy")
    assert h.stages == (W, N1)
    assert h.epoch_seconds == 30


def test_parse_crlf():
    h = parse_hypnogram("epoch,stage\r\n0,W\r\n1,R\r\n", "s1", "patient")
    assert h.stages == (W, REM)


def test_parse_unknown_stage_names_token_and_line():
    with pytest.raises(InputError, match=r"line 2.*N4"):
        parse_hypnogram("epoch,stage\n0,N4", "s", "healthy")


def test_parse_non_monotonic():
    with pytest.raises(InputError, match="non-monotonic"):
        parse_hypnogram("epoch,stage\n0,W\n0,W", "s", "healthy")


@pytest.mark.parametrize("text", ["epoch,stage\n", "", "epoch,stage\n\n"])
def test_parse_empty(text):
    with pytest.raises(InputError):
        parse_hypnogram(text, "s", "healthy")


def test_parse_bad_header():
    with pytest.raises(InputError, match="header"):
        parse_hypnogram("idx,label\n0,W", "s", "healthy")


def test_serializer_roundtrip_is_byte_stable():
    text = "epoch,stage\n0,W\n1,N1\n2,N2\n3,N3\n4,REM\n"
    h = parse_hypnogram(text, "s", "healthy")
    assert format_hypnogram(h) == text
    # alias spelling is normalized on output
    h2 = parse_hypnogram("epoch,stage\n0,wake\n1,r\n", "s", "healthy")
    assert format_hypnogram(h2) == "epoch,stage\n0,W\n1,REM\n"


def test_hypnogram_invariants():
    with pytest.raises(InputError):
        Hypnogram("s", "healthy", ())
    with pytest.raises(InputError):
        Hypnogram("s", "stroke", (W,))


def _write_manifest(tmp_path, entries, files):
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    m = tmp_path / "manifest.json"
    m.write_text(json.dumps(entries))
    return m


def test_manifest_two_entries(tmp_path):
    m = _write_manifest(
        tmp_path,
        [{"path": "a.csv", "subject_id": "a", "cohort": "patient"},
         {"path": "b.csv", "subject_id": "b", "cohort": "healthy"}],
        {"a.csv": "epoch,stage\n0,W\n1,N1\n", "b.csv": "epoch,stage\n0,N2\n"},
    )
    d = read_manifest(m)
    assert len(d) == 2
    assert [h.subject_id for h in d] == ["a", "b"]
    assert d.manifest_path == str(m)
    d.require_both_cohorts()


def test_manifest_invalid_cohort(tmp_path):
    m = _write_manifest(tmp_path, [{"path": "a.csv", "subject_id": "a", "cohort": "stroke"}],
                        {"a.csv": "epoch,stage\n0,W\n"})
    with pytest.raises(InputError, match="invalid cohort"):
        read_manifest(m)


def test_manifest_duplicate(tmp_path):
    m = _write_manifest(
        tmp_path,
        [{"path": "a.csv", "subject_id": "a", "cohort": "patient"},
         {"path": "a.csv", "subject_id": "a", "cohort": "healthy"}],
        {"a.csv": "epoch,stage\n0,W\n"},
    )
    with pytest.raises(InputError, match="duplicate"):
        read_manifest(m)


def test_manifest_missing_file(tmp_path):
    with pytest.raises(InputError, match="missing"):
        load_manifest(json.dumps([{"path": "nope.csv", "subject_id": "a", "cohort": "patient"}]), tmp_path)


def test_dataset_duplicate_ids():
    with pytest.raises(InputError):
        CohortDataset((hyp([0], sid="x"), hyp([1], sid="x")))


def test_require_both_cohorts():
    with pytest.raises(InputError, match="patient"):
        CohortDataset((hyp([0]),)).require_both_cohorts()


def _rle(codes):
    return [(r.stage, r.start, r.length) for r in run_length_encode(hyp(codes))]


def test_rle_examples():
    assert _rle([0, 0, 0]) == [(W, 0, 3)]
    assert _rle([0, 1, 1, 2]) == [(W, 0, 1), (N1, 1, 2), (N2, 3, 1)]
    assert _rle([4]) == [(REM, 0, 1)]


@given(st.lists(st.integers(0, 4), min_size=1, max_size=300))
def test_rle_properties(codes):
    h = hyp(codes)
    runs = run_length_encode(h)
    assert run_length_decode(runs) == h.stages
    assert sum(r.length for r in runs) == len(codes)
    changes = sum(a != b for a, b in zip(codes, codes[1:]))
    assert len(runs) == changes + 1
    assert all(a.stage != b.stage for a, b in zip(runs, runs[1:]))
    assert all(b.start == a.start + a.length for a, b in zip(runs, runs[1:]))

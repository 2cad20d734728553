import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sleeparch import Hypnogram
from sleeparch.features import (
    FEATURE_NAMES,
    N_FEATURES,
    average_run_length,
    bigram_frequencies,
    extract_features,
    format_feature_csv,
    max_run_length,
    parse_feature_csv,
    stage_entropy,
)
from sleeparch.simulator import builtin_spec, generate

seqs = st.lists(st.integers(0, 4), min_size=1, max_size=200)


def hyp(codes, sid="s", cohort="healthy"):
    return Hypnogram.from_codes(sid, cohort, codes)


def scripted_features(codes):
    """Plain-Python recomputation of the 27-feature layout."""
    pairs = [(a, b) for a in range(5) for b in range(5) if a != b]
    changes = [(a, b) for a, b in zip(codes, codes[1:]) if a != b]
    bigrams = [changes.count(p) / len(changes) if changes else 0.0 for p in pairs]
    runs, cur = [], 1
    for a, b in zip(codes, codes[1:]):
        if a == b:
            cur += 1
        else:
            runs.append(cur)
            cur = 1
    runs.append(cur)
    n = len(codes)
    q = [codes.count(s) / n for s in range(5)]
    ent = -sum(x * math.log2(x) for x in q if x > 0)
    return bigrams + [n / len(runs), max(runs), ent] + q[1:]


def test_layout():
    assert N_FEATURES == 27 == len(FEATURE_NAMES) == len(set(FEATURE_NAMES))
    assert FEATURE_NAMES[0] == "bigram_W_N1"
    assert FEATURE_NAMES[20:23] == ("avg_run_length", "max_run_length", "stage_entropy")
    assert FEATURE_NAMES[23:] == ("prop_N1", "prop_N2", "prop_N3", "prop_REM")


@pytest.mark.parametrize("codes,expected", [([0] * 4, 4.0), ([0, 1, 0, 1], 1.0), ([0, 0, 1, 1, 1, 2], 2.0)])
def test_average_run_length(codes, expected):
    assert average_run_length(hyp(codes)) == expected


@pytest.mark.parametrize("codes,expected", [([0], 1), ([0, 1, 1, 1, 2], 3), ([3] * 17, 17)])
def test_max_run_length(codes, expected):
    assert max_run_length(hyp(codes)) == expected


def test_entropy_examples():
    assert stage_entropy(hyp([2] * 9)) == 0.0
    assert stage_entropy(hyp([0, 1, 2, 3, 4] * 3)) == pytest.approx(math.log2(5), abs=1e-12)
    assert stage_entropy(hyp([0, 1] * 4)) == pytest.approx(1.0, abs=1e-15)


def test_bigram_examples():
    b = bigram_frequencies(hyp([0, 1, 0]))
    assert b[FEATURE_NAMES.index("bigram_W_N1")] == 0.5
    assert b[FEATURE_NAMES.index("bigram_N1_W")] == 0.5
    assert b.sum() == 1.0
    assert not bigram_frequencies(hyp([0, 0, 0])).any()


def test_constant_recording():
    v = extract_features(hyp([0] * 10))
    assert not v[:20].any()
    assert v[20] == 10 and v[21] == 10 and v[22] == 0
    assert not v[23:].any()


def test_simulated_recording_matches_script():
    h = generate(builtin_spec("patient"), 960, seed=42)
    codes = [int(s) for s in h.stages]
    np.testing.assert_allclose(extract_features(h), scripted_features(codes), rtol=0, atol=1e-12)


@given(seqs)
def test_feature_contract(codes):
    v = extract_features(hyp(codes))
    assert v.shape == (27,) and np.isfinite(v).all()
    np.testing.assert_allclose(v, scripted_features(codes), atol=1e-12)
    has_change = any(a != b for a, b in zip(codes, codes[1:]))
    if has_change:
        assert abs(v[:20].sum() - 1.0) <= 1e-12
    else:
        assert not v[:20].any()
    assert 0.0 <= v[22] <= math.log2(5) + 1e-12
    assert ((v[23:] >= 0) & (v[23:] <= 1)).all() and v[23:].sum() <= 1 + 1e-12
    assert v[21] >= v[20]


@given(seqs)
def test_reversal_changes_order_features_only(codes):
    fwd, rev = extract_features(hyp(codes)), extract_features(hyp(codes[::-1]))
    np.testing.assert_allclose(fwd[20:], rev[20:], atol=1e-12)
    # reversing transposes the bigram table
    pairs = [(a, b) for a in range(5) for b in range(5) if a != b]
    transposed = [fwd[pairs.index((b, a))] for a, b in pairs]
    np.testing.assert_allclose(rev[:20], transposed, atol=1e-12)


def test_reversal_of_non_palindrome_changes_bigrams():
    codes = [0, 1, 2, 2, 3]
    assert not np.allclose(extract_features(hyp(codes))[:20], extract_features(hyp(codes[::-1]))[:20])


@given(seqs)
def test_self_concatenation_run_count(codes):
    h = hyp(codes)
    runs = len(codes) / average_run_length(h)
    seam_change = codes[-1] != codes[0]
    expected_runs = 2 * runs - (0 if seam_change else 1)
    doubled = hyp(codes + codes)
    assert average_run_length(doubled) == pytest.approx(2 * len(codes) / expected_runs, rel=1e-12)


def test_csv_roundtrip():
    recs = [hyp([0, 1, 2, 2], "a", "patient"), hyp([3, 3, 4], "b", "healthy")]
    text = format_feature_csv(recs)
    assert text.splitlines()[0].split(",")[:3] == ["subject_id", "cohort", "bigram_W_N1"]
    ids, cohorts, X = parse_feature_csv(text)
    assert ids == ["a", "b"] and cohorts == ["patient", "healthy"]
    np.testing.assert_allclose(X, [extract_features(r) for r in recs], rtol=1e-11)

import json

import numpy as np
import pytest

from sleeparch import InputError, SleepStage
from sleeparch.markov import count_transitions, transition_matrix
from sleeparch.rng import SplitMix64, derive_seed
from sleeparch.simulator import (
    MarkovChainSpec,
    builtin_spec,
    full_transition_matrix,
    generate,
    generate_corpus,
    spec_from_json,
    spec_to_json,
)
from sleeparch.stages import run_lengths

W, N1, N2, N3, REM = SleepStage


def test_splitmix_reference_values():
    # published reference outputs for SplitMix64 seeded with 1234567
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_splitmix_helpers():
    rng = SplitMix64(9)
    xs = [rng.random() for _ in range(1000)]
    assert all(0 <= x < 1 for x in xs)
    items = list(range(20))
    rng.shuffle(items)
    assert sorted(items) == list(range(20))
    s = rng.sample(10, 4)
    assert len(set(s)) == 4 and all(0 <= i < 10 for i in s)
    assert derive_seed(1, 0) != derive_seed(1, 1) != derive_seed(2, 0)


def test_builtin_patient_n3_row():
    spec = builtin_spec("patient")
    np.testing.assert_allclose(spec.conditional_change[N3, [W, N1, N2, REM]], [0.163, 0.080, 0.699, 0.058], atol=1e-12)


def test_builtin_healthy_w_row_renormalized():
    spec = builtin_spec("healthy")
    row = spec.conditional_change[W]
    assert row[N1] == pytest.approx(0.933 / 0.977, abs=1e-15)
    assert round(row[N1], 3) == 0.955 and round(row[N2], 3) == 0.045
    assert spec.provenance["row_sums"]["W"] == pytest.approx(0.977)


@pytest.mark.parametrize("cohort", ["patient", "healthy"])
def test_builtin_rows_valid(cohort):
    spec = builtin_spec(cohort)
    assert np.all(np.abs(spec.conditional_change.sum(axis=1) - 1) <= 1e-12)
    assert not np.diag(spec.conditional_change).any()
    assert spec.initial_stage is W


def test_invalid_specs():
    C = builtin_spec("patient").conditional_change
    with pytest.raises(InputError):
        MarkovChainSpec(C, np.full(5, 1.0))
    with pytest.raises(InputError):
        MarkovChainSpec(np.eye(5), np.zeros(5))
    with pytest.raises(InputError):
        MarkovChainSpec(C * 0.9, np.zeros(5))
    with pytest.raises(InputError):
        builtin_spec("stroke")


def test_degenerate_alternation():
    C = np.zeros((5, 5))
    C[W, N1] = C[N1, W] = 1.0
    C[2:, 0] = 1.0
    spec = MarkovChainSpec(C, np.zeros(5), W, "alt")
    h = generate(spec, 9, seed=3)
    assert [s.name for s in h.stages] == ["W", "N1"] * 4 + ["W"]


def test_generate_deterministic():
    spec = builtin_spec("healthy")
    assert generate(spec, 500, 77).stages == generate(spec, 500, 77).stages
    assert generate(spec, 500, 77).stages != generate(spec, 500, 78).stages
    with pytest.raises(InputError):
        generate(spec, 0, 1)


def test_corpus_layout():
    spec = builtin_spec("patient")
    d = generate_corpus(spec, 2, 10, 5)
    assert [h.subject_id for h in d] == ["sim-patient-0", "sim-patient-1"]
    assert all(len(h) == 10 and h.cohort == "patient" for h in d)
    assert d.recordings[0].stages == generate(spec, 10, derive_seed(5, 0)).stages
    assert generate_corpus(spec, 2, 10, 5) == d


def test_law_of_large_numbers_single_recording():
    spec = builtin_spec("patient")
    h = generate(spec, 50_000, seed=123)
    m = transition_matrix(count_transitions(h), exclude_self=True)
    ok = m.row_support >= 500
    assert ok.sum() >= 4
    assert np.abs(m.probs - spec.conditional_change)[ok].max() <= 0.02


@pytest.mark.parametrize("stay", [0.8, 0.9, 0.5])
def test_run_lengths_geometric(stay):
    spec = builtin_spec("patient", self_stay=stay)
    codes = generate(spec, 100_000, seed=31).codes
    runs = run_lengths(codes)
    expected = 1.0 / (1.0 - stay)
    assert abs(runs[1:-1].mean() - expected) / expected <= 0.05


def power_iteration(P, iters=10_000):
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(iters):
        pi = pi @ P
    return pi / pi.sum()


@pytest.mark.parametrize("cohort", ["patient", "healthy"])
def test_stationary_marginals(cohort):
    spec = builtin_spec(cohort)
    pi = power_iteration(full_transition_matrix(spec))
    codes = generate(spec, 200_000, seed=99).codes
    occ = np.bincount(codes, minlength=5) / codes.size
    assert np.abs(occ - pi).max() <= 0.02


def test_spec_json_roundtrip():
    spec = builtin_spec("healthy")
    again = spec_from_json(spec_to_json(spec))
    assert again.name == spec.name and again.initial_stage is spec.initial_stage
    np.testing.assert_array_equal(again.self_stay, spec.self_stay)
    np.testing.assert_array_equal(again.conditional_change, spec.conditional_change)
    with pytest.raises(InputError):
        spec_from_json(json.dumps({"name": "x"}))


def test_estimator_unbiased_across_seeds():
    """Standardized estimation errors of the change matrix look like N(0, 1)."""
    z = []
    for cohort in ("patient", "healthy"):
        spec = builtin_spec(cohort)
        P = spec.conditional_change
        for seed in range(10):
            m = transition_matrix(count_transitions(generate_corpus(spec, 20, 960, 500 + seed)), exclude_self=True)
            sel = (m.row_support[:, None] >= 100) & (P > 0) & (P < 1)
            se = np.sqrt(P * (1 - P) / m.row_support.clip(1)[:, None])
            z.extend(((m.probs - P) / np.where(sel, se, 1.0))[sel])
    z = np.asarray(z)
    assert z.size > 150
    assert abs(z.mean()) < 4 / np.sqrt(z.size)
    assert 0.8 < z.std() < 1.2

"""
Transition graphs of two simulated cohorts
==========================================

Simulate a stroke-like and a healthy-like cohort, estimate their
stage-change matrices, test each transition, and write DOT graphs that keep
only the significant edges.
"""

import os
import tempfile

import numpy as np

from sleeparch import builtin_spec, count_transitions, generate_corpus, per_transition_tests, transition_matrix
from sleeparch.report import export_transition_graph

out = tempfile.mkdtemp(prefix="sleeparch-")

# 100 recordings of 960 epochs (8 h of 30 s epochs) per cohort
patients = generate_corpus(builtin_spec("patient"), 100, 960, seed=1, cohort="patient")
healthy = generate_corpus(builtin_spec("healthy"), 100, 960, seed=2, cohort="healthy")

counts_p = count_transitions(patients)
counts_h = count_transitions(healthy)

# Self transitions dropped: each row is "where do we go when the stage changes"
mat_p = transition_matrix(counts_p, exclude_self=True)
mat_h = transition_matrix(counts_h, exclude_self=True)

np.set_printoptions(precision=3, suppress=True)
print("patient change matrix (rows: from W, N1, N2, N3, REM)")
print(mat_p.probs)
print("healthy change matrix")
print(mat_h.probs)

tests = per_transition_tests(counts_p, counts_h, alpha=0.05)
for t in tests:
    flag = "*" if t.significant else " "
    print(f"{flag} {t.label:8s} chi2={t.statistic:9.2f}  p={t.p_value:.3g}")
print(f"{sum(t.significant for t in tests)} of {len(tests)} transitions differ at alpha=0.05")

export_transition_graph(mat_p, tests, 0.05, os.path.join(out, "patient.dot"))
export_transition_graph(mat_h, tests, 0.05, os.path.join(out, "healthy.dot"))
print("DOT files in", out, "- render with: dot -Tsvg patient.dot > patient.svg")

"""
How different are the two sleep architectures?
==============================================

Row-wise KL divergence between the published change matrices, and the
overall chi-square homogeneity test on simulated transition counts.
"""

import numpy as np

from sleeparch import builtin_spec, chi_square_overall, count_transitions, generate_corpus, kl_divergence
from sleeparch.markov import TransitionMatrix, stage_frequency_test
from sleeparch.special import chi_square_sf, format_p_value

# The builtin specs carry the published edges, renormalized per row.
P = TransitionMatrix(builtin_spec("patient").conditional_change, True, np.ones(5, dtype=int))
Q = TransitionMatrix(builtin_spec("healthy").conditional_change, True, np.ones(5, dtype=int))

div = kl_divergence(P, Q)
print("per-stage KL(patient || healthy), nats:", np.round(div.per_state_kl, 4))
print("average KL:", round(div.average_kl, 4))
print("reverse direction average:", round(kl_divergence(Q, P).average_kl, 4))

pat = generate_corpus(builtin_spec("patient"), 100, 960, seed=1, cohort="patient")
hea = generate_corpus(builtin_spec("healthy"), 100, 960, seed=2, cohort="healthy")
overall = chi_square_overall(count_transitions(pat), count_transitions(hea))
print(f"overall chi2 = {overall.statistic:.1f} on {overall.df} df, p = {format_p_value(overall.p_value)}")
# Categories that never occur in either cohort are dropped from the table
print("dropped:", ", ".join(overall.dropped_categories))

freq = stage_frequency_test(pat, hea)
print(f"stage occupancy chi2 = {freq.statistic:.1f} on {freq.df} df")

# The survival function itself
for x in (3.841, 6.635, 10.828):
    print(f"P(chi2_1 >= {x}) = {chi_square_sf(x, 1):.4f}")

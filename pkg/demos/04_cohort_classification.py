"""
Classifying recordings by cohort
================================

Five-fold stratified cross-validation of the four from-scratch classifiers,
first on the average run length alone and then on all 27 features.
"""

from sleeparch import builtin_spec, generate_corpus
from sleeparch.classifiers import LabeledFeatureSet, ModelSpec, cross_validate
from sleeparch.features import FEATURE_NAMES, feature_matrix

pat = generate_corpus(builtin_spec("patient"), 100, 960, seed=1, cohort="patient")
hea = generate_corpus(builtin_spec("healthy"), 100, 960, seed=2, cohort="healthy")
data = pat.merged(hea)

S = LabeledFeatureSet.from_cohorts(
    feature_matrix(data), [h.cohort for h in data], [h.subject_id for h in data], FEATURE_NAMES
)

for label, subset in (("avg_run_length only", S.select(["avg_run_length"])), ("all 27 features", S)):
    print(label)
    for name in ("logreg", "tree", "forest", "svm"):
        # fewer trees keeps the demo quick
        spec = ModelSpec(name, {"n_trees": 30} if name == "forest" else {})
        r = cross_validate(subset, spec, k=5, seed=0)
        accs = " ".join(f"{f.accuracy:.2f}" for f in r.per_fold)
        print(f"  {name:7s} fold acc [{accs}]  mean AUC {r.mean_auc:.3f}  AUC var {r.auc_variance:.2g}")

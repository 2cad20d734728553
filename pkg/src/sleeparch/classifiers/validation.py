"""Feature sets, standardization, ROC AUC and stratified cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from ..exceptions import InputError
from ..rng import SplitMix64, derive_seed
from .linear import LinearSVM, LogisticRegression
from .tree import DecisionTree, RandomForest

MODEL_NAMES = ("logreg", "tree", "forest", "svm")

DEFAULT_PARAMS = {
    "logreg": {"l2": 1e-4, "lr": 0.1, "max_iter": 2000, "tol": 1e-8},
    "tree": {"max_depth": 5, "min_split": 2},
    "forest": {"n_trees": 100, "max_depth": 5, "min_split": 2},
    "svm": {"lam": 1e-3, "iters": 10_000},
}


@dataclass(frozen=True)
class LabeledFeatureSet:
    """Rows of features with binary labels (1 = patient)."""

    X: np.ndarray
    y: np.ndarray
    subject_ids: tuple[str, ...]
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] != y.size or len(self.subject_ids) != y.size:
            raise InputError("X, y and subject_ids must have matching lengths")
        if not np.isfinite(X).all():
            raise InputError("feature matrix contains non-finite values")
        if not np.isin(y, (0, 1)).all():
            raise InputError("labels must be 0/1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))

    @classmethod
    def from_cohorts(cls, X, cohorts, subject_ids, feature_names=()):
        y = [1 if c == "patient" else 0 for c in cohorts]
        return cls(np.asarray(X), np.asarray(y), tuple(subject_ids), tuple(feature_names))

    def select(self, columns) -> "LabeledFeatureSet":
        """Keep only the named (or indexed) feature columns."""
        idx = [self.feature_names.index(c) if isinstance(c, str) else int(c) for c in columns]
        names = tuple(self.feature_names[i] for i in idx) if self.feature_names else ()
        return LabeledFeatureSet(self.X[:, idx], self.y, self.subject_ids, names)


def standardize(X_train, X_apply):
    """Z-score both arrays with the training mean and population std.

    Zero-variance columns are only centred (std treated as 1).
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    X_apply = np.asarray(X_apply, dtype=np.float64)
    if X_train.shape[0] == 0:
        raise InputError("cannot standardize an empty training set")
    means = X_train.mean(axis=0)
    stds = X_train.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return (X_train - means) / stds, (X_apply - means) / stds, means, stds


def auc_roc(scores, y) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie)."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    n_pos = int((y == 1).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("AUC needs both classes")
    ranks = rankdata(scores)  # average ranks on ties
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise InputError(f"unknown model {self.name!r}; choose from {MODEL_NAMES}")

    def resolved_params(self) -> dict:
        return {**DEFAULT_PARAMS[self.name], **self.params}

    def build(self, seed: int = 0):
        p = self.resolved_params()
        if self.name == "logreg":
            return LogisticRegression(**p)
        if self.name == "tree":
            return DecisionTree(**p)
        if self.name == "forest":
            return RandomForest(seed=seed, **p)
        return LinearSVM(seed=seed, **p)


def train_logistic_regression(S: LabeledFeatureSet, l2=1e-4, lr=0.1, max_iter=2000, tol=1e-8) -> LogisticRegression:
    return LogisticRegression(l2, lr, max_iter, tol).fit(S.X, S.y)


def train_decision_tree(S: LabeledFeatureSet, max_depth=5, min_split=2) -> DecisionTree:
    return DecisionTree(max_depth, min_split).fit(S.X, S.y)


def train_random_forest(S: LabeledFeatureSet, n_trees=100, seed=0, max_depth=5, min_split=2, bootstrap=True) -> RandomForest:
    return RandomForest(n_trees, seed, max_depth, min_split, bootstrap,
                        "sqrt" if bootstrap else None).fit(S.X, S.y)


def train_linear_svm(S: LabeledFeatureSet, lam=1e-3, iters=10_000, seed=0) -> LinearSVM:
    return LinearSVM(lam, iters, seed).fit(S.X, S.y)


@dataclass(frozen=True)
class FoldResult:
    accuracy: float
    auc: float
    n_test: int


@dataclass(frozen=True)
class CvResult:
    model: str
    k: int
    seed: int
    per_fold: tuple[FoldResult, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean([f.accuracy for f in self.per_fold]))

    @property
    def mean_auc(self) -> float:
        return float(np.mean([f.auc for f in self.per_fold]))

    @property
    def auc_variance(self) -> float:
        """Population variance (divide by k) of the per-fold AUCs."""
        return float(np.var([f.auc for f in self.per_fold]))


def stratified_folds(y, subject_ids, k: int, seed: int) -> list[np.ndarray]:
    """Assign subjects to `k` folds, class by class, after a seeded shuffle.

    Rows sharing a subject id always land in the same fold. Subjects of each
    class are dealt round-robin, continuing the fold counter across classes,
    so per-class fold counts differ by at most one.
    """
    y = np.asarray(y)
    if k < 2:
        raise InputError("k must be >= 2")
    subjects: dict[str, int] = {}
    for sid, label in zip(subject_ids, y):
        if subjects.setdefault(sid, int(label)) != int(label):
            raise InputError(f"subject {sid!r} has conflicting labels")
    rng = SplitMix64(seed)
    fold_of: dict[str, int] = {}
    pos = 0
    for label in (0, 1):
        group = [s for s, lab in subjects.items() if lab == label]
        if len(group) < k:
            raise InputError(f"k={k} exceeds the {len(group)} subjects of class {label}")
        rng.shuffle(group)
        for s in group:
            fold_of[s] = pos % k
            pos += 1
    assignment = np.array([fold_of[s] for s in subject_ids])
    return [np.flatnonzero(assignment == f) for f in range(k)]


def cross_validate(S: LabeledFeatureSet, model_spec: ModelSpec | str, k: int = 5, seed: int = 0) -> CvResult:
    """Stratified subject-level k-fold CV with in-fold standardization.

    Fold f trains with seed ``derive_seed(seed, f)`` for seeded models.
    """
    if isinstance(model_spec, str):
        model_spec = ModelSpec(model_spec)
    folds = stratified_folds(S.y, S.subject_ids, k, seed)
    results = []
    for f, test_idx in enumerate(folds):
        train_mask = np.ones(S.y.size, dtype=bool)
        train_mask[test_idx] = False
        Xtr, Xte, _, _ = standardize(S.X[train_mask], S.X[test_idx])
        model = model_spec.build(derive_seed(seed, f)).fit(Xtr, S.y[train_mask])
        y_te = S.y[test_idx]
        acc = float((model.predict(Xte) == y_te).mean())
        auc = auc_roc(model.decision_function(Xte), y_te)
        results.append(FoldResult(acc, auc, int(test_idx.size)))
    return CvResult(model_spec.name, k, seed, tuple(results))

"""From-scratch binary classifiers and cross-validation."""

from .linear import LinearSVM, LogisticRegression, logistic_gradient, logistic_objective, svm_objective
from .tree import DecisionTree, RandomForest, gini
from .validation import (
    DEFAULT_PARAMS,
    MODEL_NAMES,
    CvResult,
    FoldResult,
    LabeledFeatureSet,
    ModelSpec,
    auc_roc,
    cross_validate,
    standardize,
    stratified_folds,
    train_decision_tree,
    train_linear_svm,
    train_logistic_regression,
    train_random_forest,
)

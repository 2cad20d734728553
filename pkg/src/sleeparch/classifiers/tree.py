"""CART decision tree (Gini) and a bagged random forest."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import InputError
from ..rng import SplitMix64, derive_seed
from .linear import _check_binary


def gini(n_pos: int, n: int) -> float:
    """Gini impurity of a node holding `n_pos` positives out of `n`."""
    if n == 0:
        return 0.0
    p = n_pos / n
    return 1.0 - (p * p + (1.0 - p) * (1.0 - p))


@dataclass
class Node:
    n: int
    n_pos: int
    feature: int = -1
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def value(self) -> float:
        return self.n_pos / self.n


def _best_split(X, y, features):
    """Lowest weighted child Gini over `features` (visited in ascending order).

    Thresholds are midpoints between consecutive distinct sorted values.
    Strict comparison keeps the lowest feature index, then lowest threshold,
    on ties. Returns (feature, threshold, weighted_impurity) or None.
    """
    n = y.size
    best = None
    for f in sorted(features):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        valid = np.flatnonzero(xs[1:] != xs[:-1])
        if valid.size == 0:
            continue
        cum_pos = np.cumsum(ys)
        n_left = valid + 1
        pos_left = cum_pos[valid]
        n_right = n - n_left
        pos_right = cum_pos[-1] - pos_left
        # n * gini(node) = n - (pos^2 + neg^2) / n
        imp_left = n_left - (pos_left**2 + (n_left - pos_left) ** 2) / n_left
        imp_right = n_right - (pos_right**2 + (n_right - pos_right) ** 2) / n_right
        weighted = (imp_left + imp_right) / n
        k = int(np.argmin(weighted))
        if best is None or weighted[k] < best[2]:
            i = valid[k]
            best = (f, (xs[i] + xs[i + 1]) / 2.0, float(weighted[k]))
    return best


class DecisionTree:
    """Binary CART classifier with Gini impurity.

    Parameters
    ----------
    max_depth : int
        Maximum number of splits from root to leaf.
    min_split : int
        Nodes with fewer samples become leaves.
    max_features : int or None
        Candidate features drawn per split; None uses all of them.
    seed : int
        Seeds feature subsampling; unused when ``max_features`` is None.
    """

    name = "tree"

    def __init__(self, max_depth: int = 5, min_split: int = 2, max_features: int | None = None, seed: int = 0):
        self.max_depth = max_depth
        self.min_split = min_split
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = _check_binary(y)
        self.n_features_ = X.shape[1]
        self._rng = SplitMix64(self.seed)
        self.root_ = self._grow(X, y, 0)
        del self._rng
        return self

    def _candidates(self) -> list[int]:
        d = self.n_features_
        if self.max_features is None or self.max_features >= d:
            return list(range(d))
        return self._rng.sample(d, self.max_features)

    def _grow(self, X, y, depth) -> Node:
        node = Node(int(y.size), int(y.sum()))
        if depth >= self.max_depth or node.n < self.min_split or node.n_pos in (0, node.n):
            return node
        split = _best_split(X, y, self._candidates())
        if split is None or split[2] >= gini(node.n_pos, node.n):
            return node
        f, thr, _ = split
        mask = X[:, f] <= thr
        node.feature, node.threshold = f, float(thr)
        node.left = self._grow(X[mask], y[mask], depth + 1)
        node.right = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    def _leaf_values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        for r in range(X.shape[0]):
            node = self.root_
            while not node.is_leaf:
                node = node.left if X[r, node.feature] <= node.threshold else node.right
            out[r] = node.value
        return out

    def predict_proba(self, X) -> np.ndarray:
        return self._leaf_values(X)

    decision_function = predict_proba

    def predict(self, X) -> np.ndarray:
        return (self._leaf_values(X) >= 0.5).astype(np.int64)

    def depth(self) -> int:
        def _d(node):
            return 0 if node.is_leaf else 1 + max(_d(node.left), _d(node.right))

        return _d(self.root_)

    def leaves(self):
        """Yield ``(path, node)`` per leaf; path is a list of (feature, threshold, went_left)."""
        stack = [(self.root_, [])]
        while stack:
            node, path = stack.pop()
            if node.is_leaf:
                yield path, node
            else:
                stack.append((node.right, path + [(node.feature, node.threshold, False)]))
                stack.append((node.left, path + [(node.feature, node.threshold, True)]))


class RandomForest:
    """Bagged CART trees with ``ceil(sqrt(d))`` candidate features per split.

    Tree t draws its bootstrap sample and feature subsets from
    ``derive_seed(seed, t)``. The score is the fraction of trees voting
    positive; prediction is the majority vote (ties go positive).
    """

    name = "forest"

    def __init__(self, n_trees: int = 100, seed: int = 0, max_depth: int = 5, min_split: int = 2,
                 bootstrap: bool = True, max_features: int | str | None = "sqrt"):
        if n_trees < 1:
            raise InputError("n_trees must be >= 1")
        self.n_trees = n_trees
        self.seed = seed
        self.max_depth = max_depth
        self.min_split = min_split
        self.bootstrap = bootstrap
        self.max_features = max_features

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = _check_binary(y)
        n, d = X.shape
        mf = math.ceil(math.sqrt(d)) if self.max_features == "sqrt" else self.max_features
        self.trees_ = []
        for t in range(self.n_trees):
            tseed = derive_seed(self.seed, t)
            if self.bootstrap:
                rng = SplitMix64(tseed)
                idx = np.array([rng.randbelow(n) for _ in range(n)])
                Xb, yb = X[idx], y[idx]
            else:
                Xb, yb = X, y
            tree = DecisionTree(self.max_depth, self.min_split, mf, derive_seed(tseed, 0))
            if yb.min() == yb.max():
                # single-class bootstrap: constant leaf
                tree.n_features_ = d
                tree.root_ = Node(int(yb.size), int(yb.sum()))
            else:
                tree.fit(Xb, yb)
            self.trees_.append(tree)
        return self

    def predict_proba(self, X) -> np.ndarray:
        votes = np.zeros(np.asarray(X).shape[0])
        for tree in self.trees_:
            votes += tree.predict(X)
        return votes / len(self.trees_)

    decision_function = predict_proba

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

"""Bagged Gini trees with per-split feature subsampling."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..seeding import rng_for
from .tree import fit_cart


@dataclass
class RandomForest:
    trees: list = field(default_factory=list)

    def predict_proba(self, X) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)


def default_max_features(n_features: int) -> int:
    return max(1, math.isqrt(n_features))


def _fit_one(X, y, seed, index, max_depth, min_samples_leaf, max_features):
    rng = rng_for(seed, "tree", index)
    n = X.shape[0]
    counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
    return fit_cart(X, y, sample_weight=counts, max_depth=max_depth,
                    min_samples_leaf=min_samples_leaf, max_features=max_features, rng=rng)


def fit_random_forest(X, y, n_estimators=100, max_depth=20, min_samples_leaf=1,
                      max_features=None, seed=0, n_jobs=1) -> RandomForest:
    """Each tree draws its bootstrap and split candidates from its own stream,
    derived from (seed, tree index), so n_jobs never changes the result."""
    X = np.ascontiguousarray(X, dtype=np.uint8)
    y = np.asarray(y)
    if max_features is None:
        max_features = default_max_features(X.shape[1])

    def work(i):
        return _fit_one(X, y, seed, i, max_depth, min_samples_leaf, max_features)

    if n_jobs <= 1:
        trees = [work(i) for i in range(n_estimators)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(work, range(n_estimators)))
    return RandomForest(trees)

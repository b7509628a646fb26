"""Binary-feature decision trees.

Every feature is 0/1, so a split on feature f sends rows with x_f == 0 left
and rows with x_f == 1 right; there is no threshold to search. Split search
reduces to per-feature counts over the node's rows.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class Tree:
    """Flat array representation; node 0 is the root."""

    feature: np.ndarray  # int32, LEAF for leaves
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 leaf output
    weight: np.ndarray  # float64 training weight reaching the node
    gain: np.ndarray  # float64 split gain (impurity decrease or loss reduction), 0 at leaves

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int32)
        rows = np.arange(X.shape[0])
        active = self.feature[node] != LEAF
        while active.any():
            r = rows[active]
            nd = node[r]
            go_right = X[r, self.feature[nd]] != 0
            node[r] = np.where(go_right, self.right[nd], self.left[nd])
            active = self.feature[node] != LEAF
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max()) if self.n_nodes else 0

    def feature_gains(self, n_features: int) -> np.ndarray:
        internal = self.feature != LEAF
        return np.bincount(self.feature[internal], weights=self.gain[internal], minlength=n_features)

    def to_arrays(self, prefix: str) -> dict:
        return {f"{prefix}{name}": getattr(self, name)
                for name in ("feature", "left", "right", "value", "weight", "gain")}

    @classmethod
    def from_arrays(cls, arrays, prefix: str) -> "Tree":
        return cls(**{name: np.asarray(arrays[f"{prefix}{name}"])
                      for name in ("feature", "left", "right", "value", "weight", "gain")})


class _TreeBuilder:
    def __init__(self):
        self.feature, self.left, self.right = [], [], []
        self.value, self.weight, self.gain = [], [], []

    def add(self, value, weight) -> int:
        self.feature.append(LEAF)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(value))
        self.weight.append(float(weight))
        self.gain.append(0.0)
        return len(self.feature) - 1

    def split(self, node, feature, gain, left, right):
        self.feature[node] = int(feature)
        self.gain[node] = float(gain)
        self.left[node] = left
        self.right[node] = right

    def build(self) -> Tree:
        return Tree(
            feature=np.array(self.feature, dtype=np.int32),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            value=np.array(self.value, dtype=np.float64),
            weight=np.array(self.weight, dtype=np.float64),
            gain=np.array(self.gain, dtype=np.float64),
        )


# ---------------------------------------------------------------------------
# Gini CART
# ---------------------------------------------------------------------------

def gini_children_score(w1, p1, w_total, p_total):
    """Weighted child impurity / 2, i.e. sum over children of p(n-p)/n.

    Inputs are integer-valued weights. The fraction is formed from an exact
    integer numerator and denominator and divided once, so splits that tie
    exactly produce identical floats.
    """
    w1 = np.asarray(w1, dtype=np.int64)
    p1 = np.asarray(p1, dtype=np.int64)
    w0 = w_total - w1
    p0 = p_total - p1
    num = p1 * (w1 - p1) * w0 + p0 * (w0 - p0) * w1
    den = w1 * w0
    with np.errstate(divide="ignore", invalid="ignore"):
        return num.astype(np.float64) / den.astype(np.float64)


def _best_split(c1, w1, p1, n_rows, w_total, p_total, min_samples_leaf):
    """Index of the best candidate (lowest child impurity, first on ties) or None."""
    valid = (c1 >= min_samples_leaf) & (n_rows - c1 >= min_samples_leaf)
    if not valid.any():
        return None, None
    score = np.where(valid, gini_children_score(w1, p1, w_total, p_total), np.inf)
    best = int(np.argmin(score))
    return best, score[best]


def fit_cart(X, y, sample_weight=None, max_depth=3, min_samples_leaf=1,
             max_features=None, rng=None) -> Tree:
    """Greedy Gini CART on binary features.

    `sample_weight` must hold non-negative integers (bootstrap counts); rows
    with zero weight are ignored. With `max_features` set, each node draws a
    random feature order and evaluates the first `max_features` features in
    that order that are non-constant in the node. The order is seeded by one
    draw from `rng` plus a digest of the node's row set, so it does not depend
    on the order nodes are visited (mirrored features give a mirrored tree).
    Leaf values are the weighted positive-class proportion.
    """
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.int64)
    n, n_features = X.shape
    w = np.ones(n, dtype=np.int64) if sample_weight is None else np.asarray(sample_weight, dtype=np.int64)
    keep = np.flatnonzero(w > 0)
    if max_features is not None and rng is None:
        raise ValueError("max_features requires an rng")
    tree_key = int(rng.integers(0, 2**63)) if max_features is not None else 0

    Xf = None
    if max_features is None:
        Xf = X.astype(np.float32)  # exact for integer sums below 2**24
    wy = w * y
    w_root = float(w.sum())

    builder = _TreeBuilder()
    root = builder.add(wy[keep].sum() / w[keep].sum() if keep.size else 0.0, w[keep].sum())
    frontier = [(root, keep, 0)]
    while frontier:
        next_frontier = []
        for node, rows, depth in frontier:
            w_total = int(w[rows].sum())
            p_total = int(wy[rows].sum())
            if depth >= max_depth or p_total == 0 or p_total == w_total or rows.size < 2 * min_samples_leaf:
                continue

            if max_features is None:
                cand = None
                if rows.size == n:
                    block = Xf
                else:
                    block = Xf[rows]
                stats = np.stack([np.ones(rows.size), w[rows], wy[rows]]).astype(np.float32) @ block
                c1, w1, p1 = (stats[i].astype(np.int64) for i in range(3))
            else:
                node_rng = np.random.default_rng([tree_key, _rows_digest(rows)])
                cand, c1, w1, p1 = _draw_candidates(X, rows, w, wy, n_features, max_features, node_rng)
                if cand is None:
                    continue

            best, score = _best_split(c1, w1, p1, rows.size, w_total, p_total, min_samples_leaf)
            if best is None:
                continue
            feat = best if cand is None else int(cand[best])

            go_right = X[rows, feat] != 0
            r_rows, l_rows = rows[go_right], rows[~go_right]
            wl, wr = int(w[l_rows].sum()), int(w[r_rows].sum())
            pl, pr = int(wy[l_rows].sum()), int(wy[r_rows].sum())
            # impurity decrease weighted by node fraction of the root weight
            parent_term = 2.0 * p_total * (w_total - p_total) / w_total
            gain = (parent_term - 2.0 * score) / w_root
            left = builder.add(pl / wl, wl)
            right = builder.add(pr / wr, wr)
            builder.split(node, feat, max(gain, 0.0), left, right)
            next_frontier.append((left, l_rows, depth + 1))
            next_frontier.append((right, r_rows, depth + 1))
        frontier = next_frontier
    return builder.build()


_SMALL_NODE = 256


def _rows_digest(rows) -> int:
    return int.from_bytes(hashlib.blake2b(np.asarray(rows, dtype=np.int64).tobytes(),
                                          digest_size=8).digest(), "little")


def _draw_candidates(X, rows, w, wy, n_features, k, rng):
    """First k node-non-constant features of a random permutation, sorted by index."""
    order = rng.permutation(n_features)
    n_rows = rows.size
    if n_rows <= _SMALL_NODE:
        sub = X[rows]
        ones = sub.sum(axis=0, dtype=np.int64)
        nonconst = (ones > 0) & (ones < n_rows)
        chosen = order[nonconst[order]][:k]
    else:
        chosen_parts, found, pos = [], 0, 0
        while found < k and pos < n_features:
            chunk = order[pos:pos + k]
            pos += chunk.size
            ones = X[np.ix_(rows, chunk)].sum(axis=0, dtype=np.int64)
            good = chunk[(ones > 0) & (ones < n_rows)][:k - found]
            chosen_parts.append(good)
            found += good.size
        chosen = np.concatenate(chosen_parts) if chosen_parts else np.empty(0, dtype=np.intp)
    if chosen.size == 0:
        return None, None, None, None
    chosen = np.sort(chosen)
    sub = X[np.ix_(rows, chosen)].astype(np.int64)
    c1 = sub.sum(axis=0)
    w1 = w[rows] @ sub
    p1 = wy[rows] @ sub
    return chosen, c1, w1, p1

"""Second-order gradient boosting for binary logistic loss.

Each round fits a depth-limited regression tree to the gradient/hessian of
the logistic loss at the current margin. Split gain and leaf weights use the
usual Newton formulas with L2 leaf regularisation lam:

    gain = 1/2 [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)]
    leaf = -G/(H+lam)

Trees are grown level by level. Per-feature gradient sums for all nodes of a
level come out of a single matrix product X^T V, where column pairs of V hold
g and h masked to one node; only the smaller sibling of each split is
computed directly, the larger one is parent minus sibling.

Gradients and hessians are snapped to a 2^-30 grid before any summation, so
every per-node sum over binary features is exact in float64. Split search is
then independent of summation order, and mirroring a feature (x -> 1 - x)
only mirrors the split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from .tree import Tree, _TreeBuilder

_QUANTUM = 2.0 ** -30
# |g| <= 1 on the grid is an integer multiple of 2^-30 below 2^30; sums stay exact up to 2^53
MAX_ROWS = 2 ** 22

DEFAULT_MAX_DEPTH = 6
DEFAULT_LAMBDA = 1.0
DEFAULT_MIN_CHILD_HESSIAN = 1e-3


def logistic_loss(y, margin) -> float:
    """Mean negative log-likelihood of labels under logistic margins."""
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * log_expit(margin) + (1 - y) * log_expit(-margin)))


@dataclass
class BoostedTrees:
    base_margin: float
    trees: list = field(default_factory=list)

    def decision_function(self, X) -> np.ndarray:
        margin = np.full(X.shape[0], self.base_margin, dtype=np.float64)
        for tree in self.trees:
            margin += tree.predict(X)
        return margin

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))


def _masked_sums(Xd, g, h, row_sets):
    """Per-feature (sum g, sum h) over rows with x_f == 1, for each row set."""
    V = np.zeros((Xd.shape[0], 2 * len(row_sets)))
    for j, rows in enumerate(row_sets):
        V[rows, 2 * j] = g[rows]
        V[rows, 2 * j + 1] = h[rows]
    S = Xd.T @ V
    return [(S[:, 2 * j], S[:, 2 * j + 1]) for j in range(len(row_sets))]


def _fit_tree(Xd, g, h, learning_rate, max_depth, lam, min_child_hessian):
    """One Newton regression tree. Returns (tree, leaf id per training row)."""
    n = Xd.shape[0]
    builder = _TreeBuilder()
    G, H = float(g.sum()), float(h.sum())
    root = builder.add(-learning_rate * G / (H + lam), H)
    node_of_row = np.zeros(n, dtype=np.int32)
    if max_depth < 1:
        return builder.build(), node_of_row

    all_rows = np.arange(n)
    # each entry: (node id, rows, G, H, (G1, H1) per feature)
    level = [(root, all_rows, G, H, _masked_sums(Xd, g, h, [all_rows])[0])]
    for depth in range(max_depth):
        pairs = []
        for node, rows, Gn, Hn, (G1, H1) in level:
            G0 = Gn - G1
            H0 = Hn - H1
            valid = (H1 >= min_child_hessian) & (H0 >= min_child_hessian)
            if not valid.any():
                continue
            gain = 0.5 * (G1 * G1 / (H1 + lam) + G0 * G0 / (H0 + lam) - Gn * Gn / (Hn + lam))
            gain = np.where(valid, gain, -np.inf)
            feat = int(np.argmax(gain))
            if not gain[feat] > 0.0:
                continue
            go_right = Xd[rows, feat] != 0
            r_rows, l_rows = rows[go_right], rows[~go_right]
            gl, hl = float(G0[feat]), float(H0[feat])
            gr, hr = float(G1[feat]), float(H1[feat])
            left = builder.add(-learning_rate * gl / (hl + lam), hl)
            right = builder.add(-learning_rate * gr / (hr + lam), hr)
            builder.split(node, feat, gain[feat], left, right)
            node_of_row[l_rows] = left
            node_of_row[r_rows] = right
            pairs.append(((left, l_rows, gl, hl), (right, r_rows, gr, hr), (G1, H1)))

        if not pairs or depth + 1 >= max_depth:
            break
        # smaller sibling computed directly, larger one = parent - smaller
        smaller = [0 if lc[1].size <= rc[1].size else 1 for lc, rc, _ in pairs]
        direct = _masked_sums(Xd, g, h, [pair[s][1] for pair, s in zip(pairs, smaller)])
        level = []
        for (lc, rc, (pG1, pH1)), s, (dG1, dH1) in zip(pairs, smaller, direct):
            other = (pG1 - dG1, pH1 - dH1)
            stats = ((dG1, dH1), other) if s == 0 else (other, (dG1, dH1))
            level.append((*lc, stats[0]))
            level.append((*rc, stats[1]))
    return builder.build(), node_of_row


def fit_boosted_trees(X, y, learning_rate=0.1, n_estimators=100, max_depth=DEFAULT_MAX_DEPTH,
                      reg_lambda=DEFAULT_LAMBDA, min_child_hessian=DEFAULT_MIN_CHILD_HESSIAN,
                      callback=None) -> BoostedTrees:
    y = np.asarray(y, dtype=np.float64)
    if y.size > MAX_ROWS:
        raise ValueError(f"at most {MAX_ROWS} training rows are supported")
    Xd = np.asarray(X, dtype=np.float64)
    rate = y.mean()
    base = float(np.log(rate / (1.0 - rate)))
    model = BoostedTrees(base_margin=base)
    margin = np.full(y.size, base)
    for _ in range(n_estimators):
        p = expit(margin)
        g = np.rint((p - y) / _QUANTUM) * _QUANTUM
        h = np.rint(p * (1.0 - p) / _QUANTUM) * _QUANTUM
        tree, leaf_of_row = _fit_tree(Xd, g, h, learning_rate, max_depth, reg_lambda, min_child_hessian)
        margin = margin + tree.value[leaf_of_row]
        model.trees.append(tree)
        if callback is not None:
            callback(model, margin)
    return model

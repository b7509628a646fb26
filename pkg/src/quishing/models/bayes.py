"""Gaussian naive Bayes with additive variance smoothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp


@dataclass
class GaussianNB:
    means: np.ndarray  # (2, n_features)
    variances: np.ndarray  # (2, n_features), smoothing included
    log_priors: np.ndarray  # (2,)

    def joint_log_likelihood(self, X, chunk=2048) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((X.shape[0], 2))
        norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.variances), axis=1)
        for start in range(0, X.shape[0], chunk):
            block = X[start:start + chunk]
            for c in range(2):
                sq = (block - self.means[c]) ** 2 / self.variances[c]
                out[start:start + chunk, c] = self.log_priors[c] + norm[c] - 0.5 * sq.sum(axis=1)
        return out

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.exp(jll[:, 1] - logsumexp(jll, axis=1))


def fit_gaussian_nb(X, y, var_smoothing=1e-9) -> GaussianNB:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    epsilon = var_smoothing * float(np.var(X, axis=0).max()) if X.size else 0.0
    means, variances, priors = [], [], []
    for c in (0, 1):
        Xc = X[y == c]
        means.append(Xc.mean(axis=0))
        variances.append(Xc.var(axis=0) + epsilon)
        priors.append(Xc.shape[0] / X.shape[0])
    return GaussianNB(np.array(means), np.array(variances), np.log(np.array(priors)))

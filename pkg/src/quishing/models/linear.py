"""L2-regularised binary logistic regression.

Objective over parameters theta = (w, b):

    f(theta) = sum_i log(1 + exp(-s_i (x_i.w + b))) + ||w||^2 / (2C),   s_i = 2y_i - 1

The intercept b is not penalised. Minimised with a Newton trust-region
method (Hessian-vector products only) to gradient 2-norm <= 1e-6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit

GRAD_TOL = 1e-6


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    converged: bool = True
    grad_norm: float = 0.0

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))


def objective(theta, X, y, C):
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    s = 2.0 * y - 1.0
    return float(-np.sum(log_expit(s * z)) + 0.5 * (w @ w) / C)


def gradient(theta, X, y, C):
    w, b = theta[:-1], theta[-1]
    r = expit(X @ w + b) - y
    return np.concatenate([X.T @ r + w / C, [r.sum()]])


def hessian_vector(theta, v, X, y, C):
    w, b = theta[:-1], theta[-1]
    p = expit(X @ w + b)
    d = p * (1.0 - p)
    vw, vb = v[:-1], v[-1]
    u = d * (X @ vw + vb)
    return np.concatenate([X.T @ u + vw / C, [u.sum()]])


def fit_logistic(X, y, C=0.1, tol=GRAD_TOL, max_iter=200) -> LogisticModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    theta0 = np.zeros(X.shape[1] + 1)
    res = minimize(
        objective, theta0, args=(X, y, C), method="trust-ncg",
        jac=gradient, hessp=hessian_vector,
        options={"gtol": tol, "maxiter": max_iter},
    )
    theta = res.x
    gnorm = float(np.linalg.norm(gradient(theta, X, y, C)))
    return LogisticModel(weights=theta[:-1].copy(), intercept=float(theta[-1]),
                         converged=gnorm <= tol, grad_norm=gnorm)

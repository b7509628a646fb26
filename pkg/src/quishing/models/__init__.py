"""The six classifier families behind one train / score interface.

Families and their default hyperparameters:

    logreg    C=0.1
    dtree     max_depth=3, min_samples_leaf=1
    rforest   max_depth=20, n_estimators=100
    gnb       var_smoothing=1e-9
    gbt_cfg1  learning_rate=0.1, n_estimators=200   (LightGBM-like settings)
    gbt_cfg2  learning_rate=0.2, n_estimators=150   (XGBoost-like settings)

Both gbt configurations share one boosting implementation with tree depth 6,
L2 leaf regularisation 1.0 and minimum child hessian 1e-3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ShapeMismatch, SingleClassTraining, UnsupportedFamily
from .bayes import GaussianNB, fit_gaussian_nb
from .boosting import BoostedTrees, fit_boosted_trees
from .forest import RandomForest, fit_random_forest
from .linear import LogisticModel, fit_logistic
from .tree import Tree, fit_cart

FAMILIES = ("logreg", "dtree", "rforest", "gnb", "gbt_cfg2", "gbt_cfg1")
TREE_FAMILIES = ("dtree", "rforest", "gbt_cfg1", "gbt_cfg2")

_GBT_FIXED = {"max_depth": 6, "reg_lambda": 1.0, "min_child_hessian": 1e-3}

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "logreg": {"C": 0.1},
    "dtree": {"max_depth": 3, "min_samples_leaf": 1},
    "rforest": {"max_depth": 20, "n_estimators": 100, "min_samples_leaf": 1, "max_features": None},
    "gnb": {"var_smoothing": 1e-9},
    "gbt_cfg1": {"learning_rate": 0.1, "n_estimators": 200, **_GBT_FIXED},
    "gbt_cfg2": {"learning_rate": 0.2, "n_estimators": 150, **_GBT_FIXED},
}

DISPLAY_NAMES = {
    "logreg": "Logistic Regression",
    "dtree": "Decision Tree",
    "rforest": "Random Forest",
    "gnb": "Gaussian NB",
    "gbt_cfg2": "Boosted Trees cfg2 (XGBoost-like)",
    "gbt_cfg1": "Boosted Trees cfg1 (LightGBM-like)",
}

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in DEFAULT_PARAMS:
            raise UnsupportedFamily(f"unknown model family {self.family!r}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.family])
        if unknown:
            raise ValueError(f"unknown parameters for {self.family}: {sorted(unknown)}")
        object.__setattr__(self, "params", {**DEFAULT_PARAMS[self.family], **self.params})

    @classmethod
    def default(cls, family: str) -> "ModelConfig":
        return cls(family)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


@dataclass(frozen=True, eq=False)
class TrainedModel:
    config: ModelConfig
    fitted: Any
    feature_indices: np.ndarray
    n_input: int
    seed: int = 0

    @property
    def family(self) -> str:
        return self.config.family

    def _select(self, X) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_input:
            raise ShapeMismatch(f"expected {self.n_input} columns, got shape {X.shape}")
        if self.feature_indices.size == self.n_input:
            return X
        return X[:, self.feature_indices]


def _check_training_data(X, y):
    X = np.asarray(X)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ShapeMismatch(f"X must be a non-empty 2-D array, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ShapeMismatch(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise SingleClassTraining("training labels contain a single class")
    return X, y.astype(np.int64)


def train(config: ModelConfig, X, y, seed: int = 0, feature_indices=None, n_jobs: int = 1) -> TrainedModel:
    """Fit one model. Deterministic in (config, X, y, seed, feature_indices)."""
    X, y = _check_training_data(X, y)
    n_input = X.shape[1]
    if feature_indices is None:
        feature_indices = np.arange(n_input)
    else:
        feature_indices = np.unique(np.asarray(feature_indices, dtype=np.int64))
        if feature_indices.size == 0 or feature_indices[0] < 0 or feature_indices[-1] >= n_input:
            raise ShapeMismatch("feature_indices must be a non-empty subset of the input columns")
    Xs = X if feature_indices.size == n_input else X[:, feature_indices]
    p = config.params
    fam = config.family

    if fam == "logreg":
        fitted = fit_logistic(Xs, y, C=p["C"])
    elif fam == "dtree":
        fitted = fit_cart(Xs, y, max_depth=p["max_depth"], min_samples_leaf=p["min_samples_leaf"])
    elif fam == "rforest":
        fitted = fit_random_forest(Xs, y, n_estimators=p["n_estimators"], max_depth=p["max_depth"],
                                   min_samples_leaf=p["min_samples_leaf"],
                                   max_features=p["max_features"], seed=seed, n_jobs=n_jobs)
    elif fam == "gnb":
        fitted = fit_gaussian_nb(Xs, y, var_smoothing=p["var_smoothing"])
    else:
        fitted = fit_boosted_trees(Xs, y, learning_rate=p["learning_rate"],
                                   n_estimators=p["n_estimators"], max_depth=p["max_depth"],
                                   reg_lambda=p["reg_lambda"], min_child_hessian=p["min_child_hessian"])
    feature_indices.flags.writeable = False
    return TrainedModel(config, fitted, feature_indices, n_input, int(seed))


def predict_proba(model: TrainedModel, X) -> np.ndarray:
    """Positive-class score per row, in [0, 1]."""
    Xs = model._select(X)
    if isinstance(model.fitted, Tree):
        scores = model.fitted.predict(Xs)
    else:
        scores = model.fitted.predict_proba(Xs)
    return np.clip(scores, 0.0, 1.0)


def predict_label(model: TrainedModel, X, threshold: float = 0.5) -> np.ndarray:
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie strictly between 0 and 1")
    return (predict_proba(model, X) >= threshold).astype(np.uint8)


def importance(model: TrainedModel) -> np.ndarray:
    """Normalised split importance over the model's full input width.

    Gini decrease (weighted by node fraction) for dtree / rforest, total
    loss-reduction gain for the boosted families. All-zero if no split was made.
    """
    if model.family not in TREE_FAMILIES:
        raise UnsupportedFamily(f"importance is not defined for {model.family}")
    n_sel = model.feature_indices.size
    fitted = model.fitted
    trees = [fitted] if isinstance(fitted, Tree) else fitted.trees
    raw = np.zeros(n_sel)
    for tree in trees:
        raw += tree.feature_gains(n_sel)
    out = np.zeros(model.n_input)
    total = raw.sum()
    if total > 0:
        out[model.feature_indices] = raw / total
    return out


# ---------------------------------------------------------------------------
# Serialisation (.npz, no pickles)
# ---------------------------------------------------------------------------

def _fitted_arrays(fitted) -> tuple[str, dict, dict]:
    if isinstance(fitted, LogisticModel):
        return "logistic", {"weights": fitted.weights}, {
            "intercept": fitted.intercept, "converged": fitted.converged, "grad_norm": fitted.grad_norm}
    if isinstance(fitted, GaussianNB):
        return "gnb", {"means": fitted.means, "variances": fitted.variances,
                       "log_priors": fitted.log_priors}, {}
    if isinstance(fitted, Tree):
        return "tree", fitted.to_arrays("t0_"), {"n_trees": 1}
    if isinstance(fitted, RandomForest):
        arrays = {}
        for i, t in enumerate(fitted.trees):
            arrays.update(t.to_arrays(f"t{i}_"))
        return "forest", arrays, {"n_trees": len(fitted.trees)}
    if isinstance(fitted, BoostedTrees):
        arrays = {}
        for i, t in enumerate(fitted.trees):
            arrays.update(t.to_arrays(f"t{i}_"))
        return "boosted", arrays, {"n_trees": len(fitted.trees), "base_margin": fitted.base_margin}
    raise TypeError(f"cannot serialise {type(fitted).__name__}")


def save_model(model: TrainedModel, path) -> None:
    kind, arrays, extra = _fitted_arrays(model.fitted)
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "n_input": model.n_input,
        "seed": model.seed,
        "kind": kind,
        "extra": extra,
    }
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)),
                 feature_indices=model.feature_indices, **arrays)


def load_model(path) -> TrainedModel:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported model format {meta.get('format_version')}")
        kind, extra = meta["kind"], meta["extra"]
        if kind == "logistic":
            fitted = LogisticModel(data["weights"], extra["intercept"], extra["converged"], extra["grad_norm"])
        elif kind == "gnb":
            fitted = GaussianNB(data["means"], data["variances"], data["log_priors"])
        elif kind == "tree":
            fitted = Tree.from_arrays(data, "t0_")
        else:
            trees = [Tree.from_arrays(data, f"t{i}_") for i in range(extra["n_trees"])]
            fitted = RandomForest(trees) if kind == "forest" else BoostedTrees(extra["base_margin"], trees)
        cfg = meta["config"]
        indices = np.array(data["feature_indices"])
    indices.flags.writeable = False
    return TrainedModel(ModelConfig(cfg["family"], cfg["params"]), fitted, indices, meta["n_input"], meta["seed"])


__all__ = [
    "FAMILIES", "TREE_FAMILIES", "DEFAULT_PARAMS", "DISPLAY_NAMES",
    "ModelConfig", "TrainedModel", "train", "predict_proba", "predict_label",
    "importance", "save_model", "load_model",
]

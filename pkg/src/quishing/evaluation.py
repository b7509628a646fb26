"""Metrics, stratified k-fold cross-validation and randomized search."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import models
from .errors import (EmptyInput, EmptyParamSpace, LengthMismatch, SingleClassLabels,
                     TooFewSamplesPerClass)
from .seeding import rng_for, sub_seed

METRICS = ("accuracy", "precision", "recall", "f1", "auc")


@dataclass
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    # names of metrics that hit a zero denominator and were set to 0
    zero_division: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


def _check(labels, scores):
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape or labels.ndim != 1:
        raise LengthMismatch(f"labels {labels.shape} and scores {scores.shape} differ")
    if labels.size == 0:
        raise EmptyInput("no samples")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return labels.astype(np.int64), scores


def auc(labels, scores) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(equal)."""
    labels, scores = _check(labels, scores)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabels("AUC needs both classes")
    _, inverse = np.unique(scores, return_inverse=True)
    pos_at = np.bincount(inverse, weights=labels, minlength=inverse.max() + 1).astype(np.int64)
    neg_at = np.bincount(inverse, weights=1 - labels, minlength=inverse.max() + 1).astype(np.int64)
    neg_below = np.cumsum(neg_at) - neg_at
    # 2U is an exact integer
    twice_u = int(np.sum(pos_at * (2 * neg_below + neg_at)))
    return (twice_u / 2) / (n_pos * n_neg)


def confusion_and_metrics(labels, scores, threshold: float = 0.5) -> EvalReport:
    labels, scores = _check(labels, scores)
    pred = scores >= threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    tn = int(np.sum(~pred & ~pos))
    fn = int(np.sum(~pred & pos))
    zero = []
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        zero.append("precision")
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        zero.append("recall")
    if precision + recall:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        zero.append("f1")
    if 0 < tp + fn < labels.size:
        area = auc(labels, scores)
    else:
        area = float("nan")
        zero.append("auc")
    return EvalReport(
        accuracy=(tp + tn) / labels.size, precision=precision, recall=recall, f1=f1,
        auc=area, threshold=threshold, tp=tp, fp=fp, tn=tn, fn=fn, zero_division=zero,
    )


def evaluate(model, X, y, threshold: float = 0.5) -> EvalReport:
    return confusion_and_metrics(y, models.predict_proba(model, X), threshold)


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------

def stratified_kfold(labels, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """k disjoint validation folds covering every index.

    Each class is shuffled, then dealt round-robin to the folds; the deal
    continues across classes so overall fold sizes also differ by at most 1.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if idx.size < k:
            raise TooFewSamplesPerClass(f"class {c} has {idx.size} samples, need at least {k}")
        idx = rng.permutation(idx)
        for j, i in enumerate(idx):
            folds[(offset + j) % k].append(i)
        offset += idx.size
    return [np.sort(np.array(f, dtype=np.intp)) for f in folds]


@dataclass
class CvResult:
    folds: list  # EvalReport per fold
    fold_indices: list  # validation indices per fold
    mean: dict
    std: dict

    def to_dict(self) -> dict:
        return {
            "folds": [f.to_dict() for f in self.folds],
            "fold_indices": [ix.tolist() for ix in self.fold_indices],
            "mean": self.mean,
            "std": self.std,
        }


def cross_validate(config, X, y, k: int = 10, seed: int = 0, n_jobs: int = 1) -> CvResult:
    X = np.asarray(X)
    y = np.asarray(y)
    folds = stratified_kfold(y, k, seed)
    reports = []
    for i, val in enumerate(folds):
        train_mask = np.ones(y.size, dtype=bool)
        train_mask[val] = False
        model = models.train(config, X[train_mask], y[train_mask],
                             seed=sub_seed(seed, "fold", i), n_jobs=n_jobs)
        reports.append(evaluate(model, X[val], y[val]))
    mean = {m: float(np.mean([getattr(r, m) for r in reports])) for m in METRICS}
    std = {m: float(np.std([getattr(r, m) for r in reports])) for m in METRICS}
    return CvResult(reports, folds, mean, std)


def _grid(param_space: dict) -> list[dict]:
    if not param_space:
        raise EmptyParamSpace("parameter space is empty")
    keys = sorted(param_space)
    values = [list(param_space[k]) for k in keys]
    if any(len(v) == 0 for v in values):
        raise EmptyParamSpace("every parameter needs at least one candidate")
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def random_search(family: str, param_space: dict, X, y, n_iter: int = 10, k: int = 10,
                  seed: int = 0, n_jobs: int = 1):
    """Sample n_iter configurations (without replacement), score by mean CV AUC.

    Returns (best config, its CvResult, list of (params, mean auc) in sampled order).
    Ties go to the earliest sampled configuration.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be at least 1")
    grid = _grid(param_space)
    rng = rng_for(seed, "search", family)
    order = rng.permutation(len(grid))[:n_iter]
    best = None
    history = []
    for j in order:
        cfg = models.ModelConfig(family, grid[j])
        res = cross_validate(cfg, X, y, k=k, seed=sub_seed(seed, "cv"), n_jobs=n_jobs)
        score = res.mean["auc"]
        history.append((grid[j], score))
        if best is None or score > best[2]:
            best = (cfg, res, score)
    return best[0], best[1], history


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.4f}"
    return str(v)


def write_metrics_csv(reports: dict, path) -> None:
    """One row per model: model, accuracy, precision, recall, f1, auc."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", *METRICS])
        for name, rep in reports.items():
            w.writerow([name, *(_fmt(getattr(rep, m)) for m in METRICS)])


def write_report_json(reports: dict, path) -> None:
    payload = {name: (rep.to_dict() if hasattr(rep, "to_dict") else rep) for name, rep in reports.items()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

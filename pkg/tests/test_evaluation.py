import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import auc_pairs
from quishing import evaluation, models
from quishing.errors import (EmptyInput, EmptyParamSpace, LengthMismatch, SingleClassLabels,
                             TooFewSamplesPerClass)
from quishing.models import ModelConfig


def _instance(rng, n):
    labels = rng.integers(0, 2, n)
    labels[0], labels[1] = 0, 1
    # a small pool of values forces ties
    scores = rng.choice(rng.random(int(rng.integers(1, n + 1))), n)
    return labels, scores


# ---------------------------------------------------------------------------
# AUC
# ---------------------------------------------------------------------------


def test_auc_examples():
    assert evaluation.auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == 0.75
    assert evaluation.auc([0, 0, 1, 1], [0.1, 0.2, 0.3, 0.4]) == 1.0
    assert evaluation.auc([0, 1, 0, 1], [0.3] * 4) == 0.5


@given(st.integers(0, 2**32 - 1), st.integers(2, 200))
@settings(max_examples=200, deadline=None)
def test_auc_matches_pair_count(seed, n):
    labels, scores = _instance(np.random.default_rng(seed), n)
    assert evaluation.auc(labels, scores) == float(auc_pairs(labels, scores))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_auc_monotone_invariance(seed):
    rng = np.random.default_rng(seed)
    labels, scores = _instance(rng, 80)
    base = evaluation.auc(labels, scores)
    assert evaluation.auc(labels, np.exp(3 * scores) - 7) == base
    assert evaluation.auc(labels, scores ** 3) == base
    # reversal is exact in rationals; the float subtraction may round differently
    assert evaluation.auc(labels, -scores) == pytest.approx(1 - base, abs=1e-15)


def test_auc_errors():
    with pytest.raises(SingleClassLabels):
        evaluation.auc([1, 1], [0.2, 0.3])
    with pytest.raises(LengthMismatch):
        evaluation.auc([0, 1], [0.2])
    with pytest.raises(EmptyInput):
        evaluation.auc([], [])


# ---------------------------------------------------------------------------
# thresholded metrics
# ---------------------------------------------------------------------------


def test_metrics_hand_counted():
    r = evaluation.confusion_and_metrics([1, 1, 0, 0], [0.9, 0.4, 0.3, 0.2])
    assert (r.tp, r.fp, r.tn, r.fn) == (1, 0, 2, 1)
    assert r.accuracy == 0.75 and r.precision == 1.0 and r.recall == 0.5
    assert r.f1 == pytest.approx(2 / 3, abs=1e-15)
    assert r.auc == 1.0
    assert r.zero_division == []


def test_metrics_zero_denominators():
    r = evaluation.confusion_and_metrics([0, 0, 0], [0.0, 0.0, 0.0])
    assert r.accuracy == 1.0
    assert (r.precision, r.recall, r.f1) == (0.0, 0.0, 0.0)
    assert set(r.zero_division) == {"precision", "recall", "f1", "auc"}
    assert math.isnan(r.auc)
    assert r.to_dict()["auc"] is None


def test_threshold_at_score_is_positive():
    r = evaluation.confusion_and_metrics([1, 0], [0.5, 0.49])
    assert (r.tp, r.tn) == (1, 1)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_threshold_sweep_extremes(seed):
    labels, scores = _instance(np.random.default_rng(seed), 50)
    at_zero = evaluation.confusion_and_metrics(labels, scores, threshold=0.0)
    assert at_zero.accuracy == pytest.approx(labels.mean())
    above = evaluation.confusion_and_metrics(labels, scores, threshold=scores.max() + 1e-9)
    assert above.accuracy == pytest.approx(1 - labels.mean())


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_report_invariants(seed):
    labels, scores = _instance(np.random.default_rng(seed), 60)
    r = evaluation.confusion_and_metrics(labels, scores)
    assert r.accuracy == (r.tp + r.tn) / (r.tp + r.tn + r.fp + r.fn)
    if r.precision + r.recall > 0:
        assert r.f1 == pytest.approx(2 * r.precision * r.recall / (r.precision + r.recall))


# ---------------------------------------------------------------------------
# folds and CV
# ---------------------------------------------------------------------------


def test_kfold_one_per_class_per_fold():
    labels = np.array([0] * 10 + [1] * 10)
    folds = evaluation.stratified_kfold(labels, k=10, seed=3)
    assert len(folds) == 10
    for f in folds:
        assert sorted(labels[f].tolist()) == [0, 1]


@given(st.integers(2, 10), st.integers(10, 60), st.integers(10, 60), st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_kfold_partition_and_balance(k, n0, n1, seed):
    labels = np.array([0] * n0 + [1] * n1)
    np.random.default_rng(seed).shuffle(labels)
    folds = evaluation.stratified_kfold(labels, k=k, seed=seed)
    joined = np.concatenate(folds)
    assert np.array_equal(np.sort(joined), np.arange(labels.size))
    for c in (0, 1):
        per = [int((labels[f] == c).sum()) for f in folds]
        assert max(per) - min(per) <= 1
    sizes = [f.size for f in folds]
    assert max(sizes) - min(sizes) <= 1
    again = evaluation.stratified_kfold(labels, k=k, seed=seed)
    assert all(np.array_equal(a, b) for a, b in zip(folds, again))


def test_kfold_errors():
    with pytest.raises(TooFewSamplesPerClass):
        evaluation.stratified_kfold(np.array([0] * 20 + [1] * 5), k=10)
    with pytest.raises(ValueError):
        evaluation.stratified_kfold(np.array([0, 1]), k=1)


def test_cv_two_folds_on_four_rows():
    X = np.array([[0, 1], [1, 0], [0, 1], [1, 0]], dtype=np.uint8)
    y = np.array([0, 1, 0, 1])
    res = evaluation.cross_validate(ModelConfig("dtree"), X, y, k=2, seed=0)
    assert len(res.folds) == 2
    assert res.mean["accuracy"] == np.mean([f.accuracy for f in res.folds])
    assert res.std["accuracy"] == np.std([f.accuracy for f in res.folds])


def test_cv_constant_model_auc_half(small_split):
    train, _ = small_split
    # a depth-0 tree scores every row with the training base rate
    res = evaluation.cross_validate(ModelConfig("dtree", {"max_depth": 0}),
                                    train.features, train.labels, k=5, seed=1)
    assert res.mean["auc"] == 0.5


def test_cv_is_reproducible(small_split):
    train, _ = small_split
    a = evaluation.cross_validate(ModelConfig("dtree"), train.features, train.labels, k=3, seed=4)
    b = evaluation.cross_validate(ModelConfig("dtree"), train.features, train.labels, k=3, seed=4)
    assert a.to_dict() == b.to_dict()


# ---------------------------------------------------------------------------
# randomized search
# ---------------------------------------------------------------------------


def test_search_singleton(small_split):
    train, _ = small_split
    cfg, res, history = evaluation.random_search("dtree", {"max_depth": [2]}, train.features,
                                                 train.labels, n_iter=3, k=3)
    assert cfg.params["max_depth"] == 2
    assert len(history) == 1


def test_search_is_reproducible(small_split):
    train, _ = small_split
    space = {"max_depth": [1, 2, 3, 4], "min_samples_leaf": [1, 5]}
    a = evaluation.random_search("dtree", space, train.features, train.labels, n_iter=3, k=3, seed=9)
    b = evaluation.random_search("dtree", space, train.features, train.labels, n_iter=3, k=3, seed=9)
    assert a[0] == b[0] and a[2] == b[2]
    assert len({tuple(sorted(p.items())) for p, _ in a[2]}) == 3


def test_search_prefers_moderate_regularisation(rng):
    # easy linear task; tiny C underfits badly, so it is dominated
    X = (rng.random((200, 20)) < 0.5).astype(np.uint8)
    y = (X[:, :5].sum(axis=1) >= 3).astype(int)
    space = {"C": [1e-6, 1e-5, 0.1]}
    cfg, _, history = evaluation.random_search("logreg", space, X, y, n_iter=3, k=5, seed=0)
    scores = dict((p["C"], s) for p, s in history)
    assert cfg.params["C"] == 0.1 or scores[cfg.params["C"]] == scores[0.1]


def test_search_errors():
    with pytest.raises(EmptyParamSpace):
        evaluation.random_search("dtree", {}, np.zeros((4, 2)), np.array([0, 1, 0, 1]))
    with pytest.raises(EmptyParamSpace):
        evaluation.random_search("dtree", {"max_depth": []}, np.zeros((4, 2)), np.array([0, 1, 0, 1]))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def test_metrics_csv_layout(tmp_path, small_split):
    train, test = small_split
    m = models.train(ModelConfig("dtree"), train.features, train.labels)
    reports = {"dtree": evaluation.evaluate(m, test.features, test.labels)}
    evaluation.write_metrics_csv(reports, tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "model,accuracy,precision,recall,f1,auc"
    assert lines[1].startswith("dtree,") and len(lines[1].split(",")) == 6
    evaluation.write_report_json(reports, tmp_path / "m.json")
    import json
    assert json.loads((tmp_path / "m.json").read_text())["dtree"]["tp"] == reports["dtree"].tp

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hoopcast.dataset import SplitSpec, split
from hoopcast.evaluation import (SingleClassError, accuracy, best_threshold, candidate_thresholds,
                                 evaluate_matrix, per_season_accuracy, roc_and_auc)
from hoopcast.features import FeatureMatrix
from hoopcast.net import TrainConfig


def mann_whitney(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def test_auc_small_examples():
    assert roc_and_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])[1] == 1.0
    assert roc_and_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])[1] == 0.0
    assert roc_and_auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0])[1] == 0.5
    roc, auc = roc_and_auc([0.9, 0.4, 0.6, 0.2], [1, 1, 0, 0])
    assert auc == 0.75
    assert roc.thresholds[0] == np.inf and roc.fpr[-1] == 1.0 and roc.tpr[-1] == 1.0


@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 1)), min_size=2, max_size=60))
def test_auc_equals_pair_counting(rows):
    scores = [s / 8 for s, _ in rows]
    labels = [y for _, y in rows]
    if len(set(labels)) < 2:
        with pytest.raises(SingleClassError):
            roc_and_auc(scores, labels)
        return
    assert roc_and_auc(scores, labels)[1] == pytest.approx(mann_whitney(scores, labels), abs=1e-12)


@given(st.lists(st.tuples(st.integers(1, 9), st.integers(0, 1)), min_size=2, max_size=40))
def test_threshold_is_optimal_over_all_cuts(rows):
    # scores strictly inside (0, 1), as a sigmoid output is
    scores = np.array([s / 10 for s, _ in rows])
    labels = np.array([y for _, y in rows])
    if len(set(labels.tolist())) < 2:
        return
    thr, acc = best_threshold(scores, labels)
    brute = max(accuracy(scores, labels, t) for t in np.linspace(-0.05, 1.05, 221))
    assert acc == pytest.approx(brute)
    assert accuracy(scores, labels, thr) == pytest.approx(acc)


def test_threshold_ties_go_toward_half():
    # every cut between 0.2 and 0.8 is equally good
    thr, acc = best_threshold([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert acc == 1.0 and thr == pytest.approx(0.5)
    assert list(candidate_thresholds([0.2, 0.8])) == [0.0, 0.5, 1.0]
    assert best_threshold([0.6, 0.4], [1, 0]) == (0.5, 1.0)


def test_youden_criterion():
    scores = [0.1, 0.3, 0.35, 0.6, 0.7, 0.9]
    labels = [0, 1, 0, 1, 1, 1]
    thr, _ = best_threshold(scores, labels, "youden")
    # cutting above 0.35 gives TPR 0.75, FPR 0, beating every lower cut
    assert thr == pytest.approx(0.475)
    with pytest.raises(ValueError):
        best_threshold(scores, labels, "f1")


def test_per_season_accuracy_flags_small_seasons():
    res = per_season_accuracy([0.9, 0.1, 0.8], [1, 1, 1], ["a", "a", "b"], 0.5)
    assert [(r.season, r.accuracy, r.n, r.small) for r in res] == [("a", 0.5, 2, True), ("b", 1.0, 1, True)]


def toy_matrix(n=600, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 1))
    y = (rng.random(n) < 1 / (1 + np.exp(-2 * x[:, 0]))).astype(int)
    x[:5] = np.nan
    seasons = np.array(["s1"] * (n // 2) + ["s2"] * (n - n // 2), dtype=object)
    return FeatureMatrix(np.arange(n), seasons, y, x, ("f",))


def test_folds_are_disjoint_and_isolated():
    m = toy_matrix()
    for spec in (SplitSpec(), SplitSpec(disjoint=True)):
        for tr, te in split(m, spec):
            assert not set(tr) & set(te)
            assert len(tr) + len(te) == len(m)
    parts = [set(te) for _, te in split(m, SplitSpec(disjoint=True))]
    assert set().union(*parts) == set(range(len(m)))


def test_temporal_split_rejects_overlap():
    with pytest.raises(ValueError):
        SplitSpec(mode="temporal", train_seasons=("a",), test_seasons=("a",))
    m = toy_matrix()
    (tr, te), = split(m, SplitSpec(mode="temporal", train_seasons=("s1",), test_seasons=("s2",)))
    assert tr.max() < te.min()


def test_evaluate_matrix_report():
    m = toy_matrix()
    r = evaluate_matrix(m, train_cfg=TrainConfig(epochs=15, learning_rate=0.01))
    assert r.n_dropped == 5 and r.n_rows == len(m) - 5
    assert len(r.folds) == 4 and r.auc > 0.7
    assert {s.season for s in r.seasons} == {"s1", "s2"}
    names = [k for k, _ in r.summary()]
    assert "auc_mean" in names and "accuracy_sd" in names


def test_test_scores_do_not_depend_on_test_labels():
    # relabelling test rows must leave their predicted scores untouched
    m = toy_matrix()
    cfg = TrainConfig(epochs=5)
    spec = SplitSpec(folds=1)
    a = evaluate_matrix(m, train_cfg=cfg, split_spec=spec)
    te = a.folds[0].test_rows
    labels = m.labels.copy()
    clean_idx = np.flatnonzero(~m.na_mask)
    labels[clean_idx[te]] = 1 - labels[clean_idx[te]]
    b = evaluate_matrix(FeatureMatrix(m.match_index, m.season_ids, labels, m.X, m.columns),
                        train_cfg=cfg, split_spec=spec)
    np.testing.assert_array_equal(a.folds[0].scores, b.folds[0].scores)


def test_single_class_fold_is_skipped():
    m = toy_matrix(100)
    one = FeatureMatrix(m.match_index, m.season_ids, np.ones(100, dtype=int), m.X, m.columns)
    r = evaluate_matrix(one, train_cfg=TrainConfig(epochs=1))
    assert not r.folds and r.skipped == [0, 1, 2, 3]
    assert np.isnan(r.auc)

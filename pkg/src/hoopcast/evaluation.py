"""ROC/AUC, threshold choice, accuracy and cross-validation."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import SplitSpec, drop_na_rows, split, standardize_fit
from .features import FeatureMatrix, FeatureSpec, build_feature_matrix
from .net import LayerSpec, Network, TrainConfig, TrainHistory, predict_proba, reference_layers, train

logger = logging.getLogger(__name__)

SMALL_SEASON = 50


class SingleClassError(ValueError):
    pass


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # first entry is +inf (nothing predicted positive)


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float).reshape(-1)
    y = np.asarray(labels).reshape(-1).astype(int)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    if y.sum() == 0 or y.sum() == len(y):
        raise SingleClassError("both classes must be present")
    return s, y


def roc_and_auc(scores, labels) -> tuple[RocCurve, float]:
    """ROC points swept from high to low score and the trapezoidal area under them.

    Tied scores move as one block, so their segment is a diagonal and the
    area counts each tied positive/negative pair as one half.
    """
    s, y = _check(scores, labels)
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s)), len(s) - 1]
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    P, N = tp[-1], fp[-1]
    fpr = np.r_[0.0, fp / N]
    tpr = np.r_[0.0, tp / P]
    thr = np.r_[np.inf, s[last]]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, thr), auc


def accuracy(scores, labels, threshold) -> float:
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(int)
    return float(np.mean((s >= threshold).astype(int) == y))


def candidate_thresholds(scores) -> np.ndarray:
    u = np.unique(np.asarray(scores, dtype=float))
    return np.unique(np.r_[0.0, (u[1:] + u[:-1]) / 2.0, 1.0])


def best_threshold(scores, labels, criterion: str = "accuracy") -> tuple[float, float]:
    """Threshold maximizing accuracy (or Youden's TPR - FPR), ties broken toward 0.5.

    Candidates are 0, 1 and the midpoints between consecutive distinct
    scores; a row is predicted positive when its score is >= the threshold.
    """
    s, y = _check(scores, labels)
    cands = candidate_thresholds(s)
    pred = s[None, :] >= cands[:, None]
    tp = (pred & (y == 1)).sum(axis=1)
    fp = (pred & (y == 0)).sum(axis=1)
    P, N = y.sum(), len(y) - y.sum()
    acc = (tp + (N - fp)) / len(y)
    if criterion == "accuracy":
        obj = acc
    elif criterion == "youden":
        obj = tp / P - fp / N
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    best = np.flatnonzero(np.isclose(obj, obj.max(), rtol=0, atol=1e-12))
    i = best[np.argmin(np.abs(cands[best] - 0.5))]
    return float(cands[i]), float(acc[i])


@dataclass
class SeasonAccuracy:
    season: str
    accuracy: float
    n: int
    small: bool


def per_season_accuracy(scores, labels, seasons, threshold) -> list[SeasonAccuracy]:
    """Accuracy per season label; ``threshold`` may be a scalar or one value per row.

    Seasons with fewer than 50 rows are flagged ``small``.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(int)
    seasons = np.asarray(seasons, dtype=object)
    correct = (s >= np.asarray(threshold, dtype=float)).astype(int) == y
    out = []
    for season in dict.fromkeys(seasons.tolist()):
        sel = seasons == season
        n = int(sel.sum())
        out.append(SeasonAccuracy(season, float(correct[sel].mean()), n, n < SMALL_SEASON))
    return out


# -- cross-validation ------------------------------------------------------------

@dataclass
class FoldResult:
    fold: int
    auc: float
    threshold: float
    accuracy: float
    n_train: int
    n_test: int
    roc: RocCurve
    history: TrainHistory
    test_rows: np.ndarray
    scores: np.ndarray
    network: Network | None = None


@dataclass
class EvalReport:
    folds: list[FoldResult] = field(default_factory=list)
    seasons: list[SeasonAccuracy] = field(default_factory=list)
    n_rows: int = 0
    n_dropped: int = 0
    skipped: list[int] = field(default_factory=list)
    criterion: str = "accuracy"

    def _stat(self, name: str) -> tuple[float, float]:
        vals = np.array([getattr(f, name) for f in self.folds], dtype=float)
        if not len(vals):
            return math.nan, math.nan
        sd = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        return float(vals.mean()), sd

    @property
    def auc(self) -> float:
        return self._stat("auc")[0]

    @property
    def accuracy(self) -> float:
        return self._stat("accuracy")[0]

    @property
    def threshold(self) -> float:
        return self._stat("threshold")[0]

    def summary(self) -> list[tuple[str, float]]:
        rows: list[tuple[str, float]] = [("folds", len(self.folds)), ("rows", self.n_rows),
                                         ("dropped_na_rows", self.n_dropped)]
        for name in ("auc", "threshold", "accuracy"):
            mean, sd = self._stat(name)
            rows += [(f"{name}_mean", mean), (f"{name}_sd", sd)]
        for f in self.folds:
            rows += [(f"fold{f.fold}_auc", f.auc), (f"fold{f.fold}_threshold", f.threshold),
                     (f"fold{f.fold}_accuracy", f.accuracy)]
        return rows


def _run_fold(args) -> FoldResult | None:
    fold, m, tr, te, layers, train_cfg, criterion = args
    if len(np.unique(m.labels[te])) < 2:
        return None
    std = standardize_fit(m.X[tr])
    net = Network(m.X.shape[1], layers, seed=train_cfg.seed + fold)
    cfg = TrainConfig(**{**train_cfg.__dict__, "seed": train_cfg.seed + fold})
    net, hist = train(net, std.apply(m.X[tr]), m.labels[tr], cfg)
    scores = predict_proba(net, std.apply(m.X[te]))
    roc, auc = roc_and_auc(scores, m.labels[te])
    thr, acc = best_threshold(scores, m.labels[te], criterion)
    return FoldResult(fold, auc, thr, acc, len(tr), len(te), roc, hist, te, scores, net)


def evaluate_matrix(m: FeatureMatrix, layers: Sequence[LayerSpec] | None = None,
                    train_cfg: TrainConfig = TrainConfig(), split_spec: SplitSpec = SplitSpec(),
                    criterion: str = "accuracy", workers: int = 1) -> EvalReport:
    """Cross-validate a ready feature matrix: drop NA, split, standardize on train, fit, score."""
    layers = list(layers) if layers is not None else reference_layers()
    clean = drop_na_rows(m)
    if not len(clean):
        raise ValueError("no rows with defined features to evaluate")
    report = EvalReport(n_rows=len(clean), n_dropped=clean.dropped, criterion=criterion)
    jobs = [(i, clean, tr, te, layers, train_cfg, criterion)
            for i, (tr, te) in enumerate(split(clean, split_spec))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_fold, jobs))
    else:
        results = [_run_fold(j) for j in jobs]
    for i, r in enumerate(results):
        if r is None:
            logger.warning("fold %d skipped: single-class test set", i)
            report.skipped.append(i)
        else:
            report.folds.append(r)
    if report.folds:
        rows = np.concatenate([f.test_rows for f in report.folds])
        scores = np.concatenate([f.scores for f in report.folds])
        thr = np.concatenate([np.full(len(f.test_rows), f.threshold) for f in report.folds])
        report.seasons = per_season_accuracy(scores, clean.labels[rows], clean.season_ids[rows], thr)
    return report


def cross_validate(d, spec: FeatureSpec, layers=None, train_cfg: TrainConfig = TrainConfig(),
                   split_spec: SplitSpec = SplitSpec(), criterion: str = "accuracy",
                   workers: int = 1) -> EvalReport:
    """Build features for ``spec`` on dataset ``d`` and cross-validate them."""
    return evaluate_matrix(build_feature_matrix(d, spec), layers, train_cfg, split_spec,
                           criterion, workers)

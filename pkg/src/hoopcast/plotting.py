"""Report figures: ROC curves, training curves, sweep response."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvalReport  # noqa: E402
from .net import TrainHistory  # noqa: E402

DPI = 120


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_roc(report: EvalReport, path: str | Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for f in report.folds:
        ax.plot(f.roc.fpr, f.roc.tpr, lw=1, label=f"fold {f.fold}  AUC {f.auc:.4f}")
    ax.plot([0, 1], [0, 1], color="0.6", ls="--", lw=0.8)
    if report.folds:
        ax.set_title(title or f"mean AUC {report.auc:.4f}, threshold {report.threshold:.4f}",
                     fontsize=9)
        ax.legend(loc="lower right", fontsize=7)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    return _finish(fig, path)


def plot_training(history: TrainHistory, path: str | Path) -> Path:
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.2))
    a1.plot(history.epoch, history.train_loss, label="train")
    a1.plot(history.epoch, history.val_loss, label="validation")
    a1.set_xlabel("epoch")
    a1.set_ylabel("loss")
    a1.legend(fontsize=8)
    a2.plot(history.epoch, history.train_acc, label="train")
    a2.plot(history.epoch, history.val_acc, label="validation")
    a2.set_xlabel("epoch")
    a2.set_ylabel("accuracy")
    return _finish(fig, path)


def plot_sweep(param: str, values: Sequence[float], accuracy: Sequence[float],
               auc: Sequence[float], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(values, accuracy, "o-", label="accuracy")
    ax.plot(values, auc, "s--", label="AUC")
    ax.set_xlabel(param)
    ax.legend(fontsize=8)
    return _finish(fig, path)

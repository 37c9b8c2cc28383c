"""Elo and box-score features for basketball outcome prediction."""

from .dataset import (BoxScore, Dataset, DataValidationError, MatchRecord, SplitSpec, load_matches,
                      make_dataset, normalize_franchises, split, write_matches)
from .elo import EloConfig, replay, update_ratings, win_probability
from .evaluation import EvalReport, best_threshold, cross_validate, evaluate_matrix, roc_and_auc
from .features import FeatureSpec, build_feature_matrix, four_factors
from .net import Network, TrainConfig, reference_layers, train
from .synth import LeagueSpec, generate, simulate

__version__ = "0.1.0"

__all__ = [
    "BoxScore", "Dataset", "DataValidationError", "MatchRecord", "SplitSpec", "load_matches",
    "make_dataset", "normalize_franchises", "split", "write_matches",
    "EloConfig", "replay", "update_ratings", "win_probability",
    "EvalReport", "best_threshold", "cross_validate", "evaluate_matrix", "roc_and_auc",
    "FeatureSpec", "build_feature_matrix", "four_factors",
    "Network", "TrainConfig", "reference_layers", "train",
    "LeagueSpec", "generate", "simulate",
]

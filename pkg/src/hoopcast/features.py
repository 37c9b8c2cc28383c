"""diff and Four Factors features with historical/dynamic windows and court split."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import BoxScore, Dataset, MatchRecord
from .elo import EloConfig, elo_feature_column, replay

logger = logging.getLogger(__name__)

FAMILIES = ("elo", "diff", "four_factors")
PERIODICITIES = ("historical", "dynamic")
FACTORS = ("efg_pct", "to_ratio", "oreb_pct", "ft_rate")


# -- per-match box-score statistics -----------------------------------------

def possessions_estimate(b: BoxScore, opp: BoxScore | None = None) -> float:
    """Possessions from the box score: FGA + 0.44*FTA - OREB + TOV.

    A recorded ``poss`` is passed through unchanged. ``opp`` is accepted for
    estimators that use both sides; this one does not.
    """
    if b.poss is not None:
        return float(b.poss)
    est = (b.p2a + b.p3a) + 0.44 * b.fta - b.oreb + b.tov
    if est < 0:
        logger.warning("negative possession estimate %.2f clamped to 0", est)
        return 0.0
    return float(est)


@dataclass(frozen=True)
class FourFactors:
    efg_pct: float
    to_ratio: float
    oreb_pct: float
    ft_rate: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.efg_pct, self.to_ratio, self.oreb_pct, self.ft_rate)


def four_factors(b: BoxScore, opp: BoxScore) -> FourFactors:
    """One team's factors for one match; a zero denominator gives NaN for that factor."""
    fga = b.p2a + b.p3a
    poss = possessions_estimate(b, opp)
    reb = b.oreb + opp.dreb
    nan = math.nan
    return FourFactors(
        efg_pct=(b.p2m + 1.5 * b.p3m) / fga if fga > 0 else nan,
        to_ratio=b.tov / poss if poss > 0 else nan,
        oreb_pct=b.oreb / reb if reb > 0 else nan,
        ft_rate=b.ftm / fga if fga > 0 else nan,
    )


# -- windows -----------------------------------------------------------------

class RunningSeries:
    """Chronological values of one statistic for one team and court view.

    The historical mean keeps a (total, count) pair so a season rollover can
    rescale the accumulated history without forgetting how much of it there is.
    """

    __slots__ = ("values", "total", "count")

    def __init__(self):
        self.values: list[float] = []
        self.total = 0.0
        self.count = 0

    def push(self, v: float) -> None:
        self.values.append(v)
        self.total += v
        self.count += 1

    def historical(self) -> float:
        return self.total / self.count if self.count else math.nan

    def dynamic(self, depth: int) -> float:
        if len(self.values) < depth:
            return math.nan
        return math.fsum(self.values[-depth:]) / depth

    def rollover(self, p: float, grand_mean: float) -> None:
        if self.count and p:
            self.total = self.count * ((1.0 - p) * self.historical() + p * grand_mean)

    def rollover_window(self, p: float, grand_mean: float, depth: int) -> None:
        if p and len(self.values) >= depth:
            blended = (1.0 - p) * self.dynamic(depth) + p * grand_mean
            self.values[-depth:] = [blended] * depth


class _GrandMean:
    __slots__ = ("total", "count")

    def __init__(self):
        self.total = 0.0
        self.count = 0

    def add(self, v: float) -> None:
        self.total += v
        self.count += 1

    @property
    def value(self) -> float:
        return self.total / self.count if self.count else math.nan


@dataclass(frozen=True)
class FeatureSpec:
    family: str = "elo"
    periodicity: str = "historical"
    court_split: bool = False
    depth: int = 2
    regression_pct: float = 0.2
    dynamic_regression: bool = False
    elo: EloConfig = field(default_factory=EloConfig)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.periodicity not in PERIODICITIES:
            raise ValueError(f"periodicity must be one of {PERIODICITIES}, got {self.periodicity!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if not 0.0 <= self.regression_pct <= 1.0:
            raise ValueError("regression_pct must be in [0, 1]")

    @property
    def elo_config(self) -> EloConfig:
        return replace(self.elo, court_split=self.court_split)


def windowed_value(series: Sequence[float], g: int, spec: FeatureSpec,
                   season_ids: Sequence[str] | None = None,
                   grand_means: Sequence[float] | None = None) -> float:
    """Feature value for a team's ``g``-th match (1-based) from its earlier values.

    ``season_ids`` labels each value; at every season change the rollover
    uses the next entry of ``grand_means`` (one per boundary crossed).
    """
    s = RunningSeries()
    boundaries = iter(grand_means or ())
    prev = None
    for i in range(g - 1):
        if season_ids is not None:
            if prev is not None and season_ids[i] != prev:
                _roll(s, spec, next(boundaries))
            prev = season_ids[i]
        s.push(series[i])
    if season_ids is not None and g - 1 < len(season_ids) and prev is not None \
            and season_ids[g - 1] != prev:
        _roll(s, spec, next(boundaries))
    return s.historical() if spec.periodicity == "historical" else s.dynamic(spec.depth)


def _roll(s: RunningSeries, spec: FeatureSpec, gm: float) -> None:
    if spec.periodicity == "historical":
        s.rollover(spec.regression_pct, gm)
    elif spec.dynamic_regression:
        s.rollover_window(spec.regression_pct, gm, spec.depth)


class TeamHistory:
    """Per-team series of per-match statistics in ``all``/``home``/``away`` views."""

    def __init__(self, stats: Sequence[str]):
        self.stats = tuple(stats)
        self.series: dict[tuple[str, str, str], RunningSeries] = {}
        self.grand: dict[tuple[str, str], _GrandMean] = {
            (v, s): _GrandMean() for v in ("all", "home", "away") for s in self.stats
        }

    def get(self, team: str, view: str, stat: str) -> RunningSeries:
        key = (team, view, stat)
        if key not in self.series:
            self.series[key] = RunningSeries()
        return self.series[key]

    def record(self, team: str, court: str, values: dict[str, float]) -> None:
        """Append one match's values for ``team`` playing at ``court`` (home/away)."""
        for stat, v in values.items():
            if math.isnan(v):
                continue
            for view in ("all", court):
                self.get(team, view, stat).push(v)
                self.grand[(view, stat)].add(v)

    def rollover(self, spec: FeatureSpec) -> None:
        for (team, view, stat), s in self.series.items():
            _roll(s, spec, self.grand[(view, stat)].value)

    def played(self, team: str, view: str = "all") -> int:
        return len(self.get(team, view, "win").values)

    def ratio(self, team: str, view: str = "all") -> float:
        """Raw win frequency over every match in the view (no rollover)."""
        vals = self.get(team, view, "win").values
        return sum(vals) / len(vals) if vals else math.nan

    def value(self, team: str, view: str, stat: str, spec: FeatureSpec) -> float:
        s = self.get(team, view, stat)
        return s.historical() if spec.periodicity == "historical" else s.dynamic(spec.depth)

    def update(self, m: MatchRecord, family: str) -> None:
        if family == "diff":
            self.record(m.home_team, "home", {"win": float(m.result)})
            self.record(m.away_team, "away", {"win": float(1 - m.result)})
        else:
            hf = four_factors(m.home_box, m.away_box)
            af = four_factors(m.away_box, m.home_box)
            self.record(m.home_team, "home", dict(zip(FACTORS, hf.as_tuple())))
            self.record(m.away_team, "away", dict(zip(FACTORS, af.as_tuple())))


def _views(spec: FeatureSpec) -> tuple[str, str]:
    return ("home", "away") if spec.court_split else ("all", "all")


def diff_feature(hist: TeamHistory, match: MatchRecord, spec: FeatureSpec) -> float:
    """Home team's win frequency minus away team's, from pre-match state."""
    hv, av = _views(spec)
    return hist.value(match.home_team, hv, "win", spec) - hist.value(match.away_team, av, "win", spec)


def four_factors_feature(hist: TeamHistory, match: MatchRecord, spec: FeatureSpec) -> list[float]:
    hv, av = _views(spec)
    return ([hist.value(match.home_team, hv, f, spec) for f in FACTORS]
            + [hist.value(match.away_team, av, f, spec) for f in FACTORS])


# -- matrices ----------------------------------------------------------------

@dataclass(frozen=True)
class FeatureMatrix:
    match_index: np.ndarray
    season_ids: np.ndarray
    labels: np.ndarray
    X: np.ndarray
    columns: tuple[str, ...]
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def na_mask(self) -> np.ndarray:
        return np.isnan(self.X).any(axis=1)

    def take(self, idx, dropped: int | None = None) -> "FeatureMatrix":
        idx = np.asarray(idx, dtype=int)
        return FeatureMatrix(self.match_index[idx], self.season_ids[idx], self.labels[idx],
                             self.X[idx], self.columns,
                             self.dropped if dropped is None else dropped)

    def with_X(self, X: np.ndarray) -> "FeatureMatrix":
        return replace(self, X=np.asarray(X, dtype=float))


def feature_columns(spec: FeatureSpec) -> tuple[str, ...]:
    if spec.family == "elo":
        return ("elo_diff",)
    if spec.family == "diff":
        return ("diff",)
    return tuple(f"{f}_ht" for f in FACTORS) + tuple(f"{f}_at" for f in FACTORS)


def build_feature_matrix(d: Dataset, spec: FeatureSpec) -> FeatureMatrix:
    """One row per match, every value computed from strictly earlier matches."""
    n = len(d)
    cols = feature_columns(spec)
    if spec.family == "elo":
        X = elo_feature_column(d, spec.elo_config, spec.periodicity, spec.depth,
                               ledger=replay(d, spec.elo_config)).reshape(n, 1)
    else:
        stats = ("win",) if spec.family == "diff" else FACTORS
        hist = TeamHistory(stats)
        X = np.empty((n, len(cols)))
        season = None
        for g, m in enumerate(d.matches):
            if season is not None and m.season_id != season:
                hist.rollover(spec)
            season = m.season_id
            if spec.family == "diff":
                X[g, 0] = diff_feature(hist, m, spec)
            else:
                X[g] = four_factors_feature(hist, m, spec)
            hist.update(m, spec.family)
    return FeatureMatrix(
        match_index=np.array([m.match_index for m in d.matches], dtype=int),
        season_ids=np.array(d.season_ids, dtype=object),
        labels=d.labels,
        X=X,
        columns=cols,
    )


def write_feature_matrix(m: FeatureMatrix, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["match_index", "season", "label", *m.columns])
        for i in range(len(m)):
            vals = ["" if math.isnan(v) else repr(float(v)) for v in m.X[i]]
            w.writerow([int(m.match_index[i]), m.season_ids[i], int(m.labels[i]), *vals])


def read_feature_matrix(path: str | Path) -> FeatureMatrix:
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    cols = tuple(header[3:])
    X = np.array([[float(v) if v else math.nan for v in row[3:]] for row in rows],
                 dtype=float).reshape(len(rows), len(cols))
    return FeatureMatrix(
        match_index=np.array([int(row[0]) for row in rows], dtype=int),
        season_ids=np.array([row[1] for row in rows], dtype=object),
        labels=np.array([int(row[2]) for row in rows], dtype=int),
        X=X,
        columns=cols,
    )

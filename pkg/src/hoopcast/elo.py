"""Elo ratings with home advantage, generalized adjustments and season rollover."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .dataset import Dataset, MatchRecord


@dataclass(frozen=True)
class EloConfig:
    initial_rating: float = 1300.0
    logistic_divisor: float = 400.0
    k: float = 30.0
    home_advantage: float = 40.0
    regression_pct: float = 0.2
    court_split: bool = False

    def __post_init__(self):
        if not self.logistic_divisor > 0:
            raise ValueError("logistic_divisor must be positive")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if not 0.0 <= self.regression_pct <= 1.0:
            raise ValueError("regression_pct must be in [0, 1]")
        for name in ("initial_rating", "home_advantage"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class Adjustments:
    """Per-team advantage (``alpha_adv``) and disadvantage (``beta_dis``) in Elo points."""

    alpha_adv: float = 0.0
    beta_dis: float = 0.0

    @property
    def net(self) -> float:
        return self.alpha_adv - self.beta_dis


NO_ADJ = Adjustments()


def win_probability(r1, r2, cfg: EloConfig, adj1: Adjustments = NO_ADJ,
                    adj2: Adjustments = NO_ADJ) -> tuple[float, float]:
    """Win probabilities for the home side (1) and the away side (2).

    The home advantage and side 1's net adjustment enter side 1's exponent,
    side 2's net adjustment enters its own; both probabilities come from the
    same net gap so they always sum to one.
    """
    vals = (r1, r2, adj1.alpha_adv, adj1.beta_dis, adj2.alpha_adv, adj2.beta_dis)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("win_probability needs finite inputs")
    gap = (r1 - r2) + cfg.home_advantage + adj1.net - adj2.net
    p1 = 1.0 / (1.0 + 10.0 ** (-gap / cfg.logistic_divisor))
    p2 = 1.0 / (1.0 + 10.0 ** (gap / cfg.logistic_divisor))
    return p1, p2


def update_ratings(r1, r2, s: int, cfg: EloConfig, adj1: Adjustments = NO_ADJ,
                   adj2: Adjustments = NO_ADJ) -> tuple[float, float]:
    if s not in (0, 1):
        raise ValueError(f"result must be 0 or 1, got {s!r}")
    p1, p2 = win_probability(r1, r2, cfg, adj1, adj2)
    return r1 + cfg.k * (s - p1), r2 + cfg.k * ((1 - s) - p2)


@dataclass
class EloLedger:
    """Rating state and history produced by a replay.

    ``pre`` holds, per match, the (home, away) ratings read before the update
    (home/away ledgers when court-split). ``history[(team, view)]`` is the
    list of post-match ratings, ``view`` being ``all``, ``home`` or ``away``;
    ``offsets[g]`` is the length of the home/away team's history just before
    match ``g``.
    """

    cfg: EloConfig
    overall: dict[str, float] = field(default_factory=dict)
    home_only: dict[str, float] = field(default_factory=dict)
    away_only: dict[str, float] = field(default_factory=dict)
    history: dict[tuple[str, str], list[float]] = field(default_factory=dict)
    rows: list[tuple[int, str, str, float, float]] = field(default_factory=list)
    pre: list[tuple[float, float]] = field(default_factory=list)
    offsets: list[tuple[int, int]] = field(default_factory=list)
    post_sum: float = 0.0
    post_count: int = 0

    @classmethod
    def start(cls, teams, cfg: EloConfig) -> "EloLedger":
        led = cls(cfg)
        for t in sorted(teams):
            if cfg.court_split:
                led.home_only[t] = cfg.initial_rating
                led.away_only[t] = cfg.initial_rating
                led.history[(t, "home")] = []
                led.history[(t, "away")] = []
            else:
                led.overall[t] = cfg.initial_rating
                led.history[(t, "all")] = []
        return led

    @property
    def grand_mean(self) -> float:
        return self.post_sum / self.post_count

    def books(self) -> tuple[tuple[dict, str], tuple[dict, str]]:
        """(rating map, history view) read for the home side and the away side."""
        if self.cfg.court_split:
            return (self.home_only, "home"), (self.away_only, "away")
        return (self.overall, "all"), (self.overall, "all")

    def total(self) -> float:
        return sum(self.overall.values()) + sum(self.home_only.values()) + sum(self.away_only.values())


def season_rollover(ledger: EloLedger, cfg: EloConfig | None = None) -> EloLedger:
    """Blend every rating toward the mean of all post-match ratings so far."""
    cfg = cfg or ledger.cfg
    if ledger.post_count == 0:
        raise ValueError("season rollover before any match was played")
    p = cfg.regression_pct
    if p == 0.0:
        return ledger
    gm = ledger.grand_mean
    for book in (ledger.overall, ledger.home_only, ledger.away_only):
        for t in book:
            book[t] = (1.0 - p) * book[t] + p * gm
    return ledger


AdjustFn = Callable[[MatchRecord], tuple[Adjustments, Adjustments]]


def replay(d: Dataset, cfg: EloConfig, adjust: AdjustFn | None = None) -> EloLedger:
    """Fold over the matches in order, recording pre-match ratings first."""
    led = EloLedger.start(d.teams, cfg)
    season = None
    for m in d.matches:
        if season is not None and m.season_id != season:
            season_rollover(led, cfg)
        season = m.season_id
        (hbook, hview), (abook, aview) = led.books()
        try:
            r1, r2 = hbook[m.home_team], abook[m.away_team]
        except KeyError as exc:
            raise RuntimeError(f"team {exc} missing from ledger") from None
        hh, ah = led.history[(m.home_team, hview)], led.history[(m.away_team, aview)]
        led.pre.append((r1, r2))
        led.offsets.append((len(hh), len(ah)))
        adj1, adj2 = adjust(m) if adjust else (NO_ADJ, NO_ADJ)
        n1, n2 = update_ratings(r1, r2, m.result, cfg, adj1, adj2)
        hbook[m.home_team], abook[m.away_team] = n1, n2
        hh.append(n1)
        ah.append(n2)
        led.rows.append((m.match_index, m.home_team, hview, r1, n1))
        led.rows.append((m.match_index, m.away_team, aview, r2, n2))
        led.post_sum += n1 + n2
        led.post_count += 2
    return led


def elo_feature(ledger: EloLedger, g: int, match: MatchRecord, periodicity: str = "historical",
                depth: int = 1) -> float:
    """Home-minus-away Elo feature for match number ``g`` of the replay.

    Historical: difference of the pre-match ratings. Dynamic: difference of
    each team's mean over its last ``depth`` post-match ratings, NaN when a
    team has fewer than ``depth`` of them.
    """
    if periodicity == "historical":
        r1, r2 = ledger.pre[g]
        return r1 - r2
    if periodicity != "dynamic":
        raise ValueError(f"unknown periodicity {periodicity!r}")
    hview, aview = ("home", "away") if ledger.cfg.court_split else ("all", "all")
    n1, n2 = ledger.offsets[g]
    if n1 < depth or n2 < depth:
        return math.nan
    h = ledger.history[(match.home_team, hview)][n1 - depth:n1]
    a = ledger.history[(match.away_team, aview)][n2 - depth:n2]
    return sum(h) / depth - sum(a) / depth


def elo_feature_column(d: Dataset, cfg: EloConfig, periodicity: str = "historical",
                       depth: int = 1, ledger: EloLedger | None = None) -> np.ndarray:
    led = ledger if ledger is not None else replay(d, cfg)
    return np.array([elo_feature(led, g, m, periodicity, depth) for g, m in enumerate(d.matches)])


def write_history(ledger: EloLedger, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["match_index", "team", "court_filter", "pre_rating", "post_rating"])
        for idx, team, view, pre, post in ledger.rows:
            w.writerow([idx, team, view, repr(pre), repr(post)])

"""Synthetic leagues with known outcome probabilities.

Outcomes: the home side wins with probability
``1 / (1 + 10 ** (-(s_home - s_away + HA) / 400))`` where ``s`` are latent
strengths in Elo points.

Strengths: drawn N(0, strength_sd) for the first season, then
``s' = carryover * s + sqrt(1 - carryover**2) * strength_sd * eps`` at each
season change (carryover 0 re-randomizes every season), plus an optional
per-round random walk of SD ``in_season_drift``.

Box scores: with ``z = s / strength_sd``, a per-match standard normal
``e`` and a per team-season standard normal ``u`` (a playing style that is
unrelated to strength), a team's per-match targets are

    eFG%      0.50  + 0.025 z + factor_noise * (0.04 e + 0.02  u)   (clip 0.35..0.65)
    TOV/100   0.135 - 0.008 z + factor_noise * (0.02 e + 0.01  u)   (clip 0.05..0.25)
    FTA/FGA   0.28  + 0.02  z + factor_noise * (0.05 e + 0.025 u)   (clip 0.05..0.60)
    OREB%     0.25  + 0.015 z + factor_noise * (0.04 e + 0.02  u)   (clip 0.05..0.50)

FGA is uniform on 78..92 with 35% threes; makes, turnovers, free throws and
offensive rebounds are binomial draws around those targets (3-point rate is
0.7 x the 2-point rate, FT% 0.77). A team's DREB is the opponent's misses
minus the opponent's offensive rebounds. Possessions are left blank.
Box scores depend on strength only, not on the drawn result, and use
their own random stream so ``factor_noise`` never changes the outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .dataset import NBA_TEAMS, BoxScore, Dataset, MatchRecord, make_dataset


@dataclass(frozen=True)
class LeagueSpec:
    team_count: int = 30
    seasons: int = 10
    matches_per_team_per_season: int = 82
    strength_sd: float = 150.0
    home_advantage_true: float = 65.0
    season_carryover: float = 0.9
    in_season_drift: float = 0.0
    factor_noise: float = 1.0
    start_year: int = 2004
    seed: int = 0
    strengths: tuple[float, ...] | None = None  # fixed first-season strengths

    def __post_init__(self):
        if self.team_count < 2 or self.team_count % 2:
            raise ValueError("infeasible schedule: team_count must be even and >= 2")
        if self.seasons < 1 or self.matches_per_team_per_season < 1:
            raise ValueError("infeasible schedule: need at least one season and one round")
        if not 0.0 <= self.season_carryover <= 1.0:
            raise ValueError("season_carryover must be in [0, 1]")
        if self.strengths is not None and len(self.strengths) != self.team_count:
            raise ValueError("strengths must have one entry per team")


@dataclass
class SyntheticLeague:
    dataset: Dataset
    home_prob: np.ndarray  # per match, dataset order
    strengths: dict[str, np.ndarray] = field(default_factory=dict)  # per season

    @property
    def bayes_accuracy(self) -> float:
        return bayes_accuracy(self.home_prob)


def bayes_accuracy(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(np.mean(np.maximum(p, 1.0 - p)))


def home_advantage_for_rate(rate: float, divisor: float = 400.0) -> float:
    """Elo points that give equal-strength home teams win probability ``rate``."""
    return divisor * math.log10(rate / (1.0 - rate))


def team_names(n: int) -> list[str]:
    if n <= len(NBA_TEAMS):
        return sorted(NBA_TEAMS)[:n]
    return [f"Team {i:02d}" for i in range(n)]


def round_robin(n: int) -> list[list[tuple[int, int]]]:
    """Circle-method rounds; each pair meets once, home side alternating."""
    teams = list(range(n))
    rounds = []
    for r in range(n - 1):
        pairs = []
        for i in range(n // 2):
            a, b = teams[i], teams[n - 1 - i]
            pairs.append((a, b) if (r + i) % 2 == 0 else (b, a))
        rounds.append(pairs)
        teams = [teams[0], teams[-1]] + teams[1:-1]
    return rounds


def season_schedule(n: int, n_rounds: int) -> list[list[tuple[int, int]]]:
    base = round_robin(n)
    out = []
    for j in range(n_rounds):
        cycle, r = divmod(j, len(base))
        pairs = base[r]
        out.append(pairs if cycle % 2 == 0 else [(b, a) for a, b in pairs])
    return out


NOISE_SD = np.array([0.04, 0.02, 0.05, 0.04])


def _box(rng, z: float, noise: float, style: np.ndarray):
    fga = int(rng.integers(78, 93))
    p3a = int(round(0.35 * fga))
    p2a = fga - p3a
    e = noise * (NOISE_SD * rng.standard_normal(4) + 0.5 * NOISE_SD * style)
    efg = min(max(0.50 + 0.025 * z + e[0], 0.35), 0.65)
    q2 = min(efg * fga / (p2a + 1.05 * p3a), 1.0)
    p2m = int(rng.binomial(p2a, q2))
    p3m = int(rng.binomial(p3a, 0.7 * q2))
    tov = int(rng.binomial(100, min(max(0.135 - 0.008 * z + e[1], 0.05), 0.25)))
    fta = int(rng.binomial(fga, min(max(0.28 + 0.02 * z + e[2], 0.05), 0.60)))
    ftm = int(rng.binomial(fta, 0.77))
    misses = fga - p2m - p3m
    oreb = int(rng.binomial(misses, min(max(0.25 + 0.015 * z + e[3], 0.05), 0.50)))
    return dict(p2a=p2a, p3a=p3a, fta=fta, p2m=p2m, p3m=p3m, ftm=ftm, oreb=oreb, tov=tov), misses


def simulate(spec: LeagueSpec) -> SyntheticLeague:
    rng = np.random.default_rng([spec.seed, 0])
    box_rng = np.random.default_rng([spec.seed, 1])
    names = team_names(spec.team_count)
    sd = spec.strength_sd
    if spec.strengths is not None:
        s = np.array(spec.strengths, dtype=float)
    else:
        s = rng.normal(0.0, sd, spec.team_count)
    rho = spec.season_carryover
    schedule = season_schedule(spec.team_count, spec.matches_per_team_per_season)
    records, probs, strengths = [], [], {}
    for k in range(spec.seasons):
        year = spec.start_year + k
        label = f"{year}-{year + 1}"
        if k > 0:
            s = rho * s + math.sqrt(1.0 - rho * rho) * sd * rng.standard_normal(spec.team_count)
        strengths[label] = s.copy()
        style = box_rng.standard_normal((spec.team_count, 4))
        start = date(year, 10, 15)
        for j, pairs in enumerate(schedule):
            if spec.in_season_drift and j:
                s = s + spec.in_season_drift * rng.standard_normal(spec.team_count)
            for h, a in pairs:
                gap = s[h] - s[a] + spec.home_advantage_true
                p = 1.0 / (1.0 + 10.0 ** (-gap / 400.0))
                result = int(rng.random() < p)
                zs = (s[h] / sd, s[a] / sd) if sd > 0 else (0.0, 0.0)
                hb, hmiss = _box(box_rng, zs[0], spec.factor_noise, style[h])
                ab, amiss = _box(box_rng, zs[1], spec.factor_noise, style[a])
                hb["dreb"] = amiss - ab["oreb"]
                ab["dreb"] = hmiss - hb["oreb"]
                records.append(MatchRecord(
                    season_id=label, match_index=-1, date=start + timedelta(days=j),
                    home_team=names[h], away_team=names[a], result=result,
                    home_box=BoxScore(**hb), away_box=BoxScore(**ab),
                ))
                probs.append(p)
    return SyntheticLeague(make_dataset(records), np.array(probs), strengths)


def generate(spec: LeagueSpec) -> Dataset:
    return simulate(spec).dataset

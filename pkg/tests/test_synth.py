import math

import numpy as np
import pytest

from hoopcast.dataset import load_matches, write_matches
from hoopcast.features import four_factors
from hoopcast.synth import (LeagueSpec, bayes_accuracy, generate, home_advantage_for_rate,
                            round_robin, season_schedule, simulate)


def binomial_ok(rate, p, n, sigmas=3):
    return abs(rate - p) <= sigmas * math.sqrt(p * (1 - p) / n)


def test_equal_strengths_no_home_advantage_is_a_coin_flip():
    spec = LeagueSpec(team_count=30, seasons=4, strength_sd=0.0, home_advantage_true=0.0, seed=1)
    lg = simulate(spec)
    assert np.all(lg.home_prob == 0.5)
    assert binomial_ok(lg.dataset.labels.mean(), 0.5, len(lg.dataset))


def test_calibrated_home_advantage():
    ha = home_advantage_for_rate(0.5927)
    assert 1 / (1 + 10 ** (-ha / 400)) == pytest.approx(0.5927)
    lg = simulate(LeagueSpec(seasons=10, strength_sd=0.0, home_advantage_true=ha, seed=2))
    assert binomial_ok(lg.dataset.labels.mean(), 0.5927, len(lg.dataset))


def test_outcomes_follow_generator_probabilities():
    lg = simulate(LeagueSpec(seasons=6, seed=3))
    p, y = lg.home_prob, lg.dataset.labels
    for lo, hi in [(0.0, 0.4), (0.4, 0.6), (0.6, 1.0)]:
        sel = (p >= lo) & (p < hi)
        assert abs(y[sel].mean() - p[sel].mean()) <= 3 * math.sqrt(0.25 / sel.sum())


def test_bayes_accuracy_closed_form():
    assert bayes_accuracy([0.2, 0.5, 0.9]) == pytest.approx((0.8 + 0.5 + 0.9) / 3)


def test_schedule_is_balanced():
    rounds = round_robin(6)
    pairs = {frozenset(p) for r in rounds for p in r}
    assert len(rounds) == 5 and len(pairs) == 15
    for r in season_schedule(6, 12):
        assert sorted(t for p in r for t in p) == list(range(6))
    d = generate(LeagueSpec(team_count=6, seasons=1, matches_per_team_per_season=10))
    for t in d.teams:
        assert sum(t in (m.home_team, m.away_team) for m in d.matches) == 10


def test_deterministic_under_seed():
    a = generate(LeagueSpec(team_count=8, seasons=2, seed=11))
    assert a == generate(LeagueSpec(team_count=8, seasons=2, seed=11))
    assert a != generate(LeagueSpec(team_count=8, seasons=2, seed=12))


def test_factor_noise_leaves_outcomes_alone():
    a = generate(LeagueSpec(team_count=8, seasons=2, seed=4, factor_noise=0.5))
    b = generate(LeagueSpec(team_count=8, seasons=2, seed=4, factor_noise=3.0))
    np.testing.assert_array_equal(a.labels, b.labels)


def test_four_factors_track_strength():
    lg = simulate(LeagueSpec(seasons=1, seed=5, factor_noise=0.5))
    s = lg.strengths["2004-2005"]
    names = sorted(lg.dataset.teams)
    efg = {t: [] for t in names}
    for m in lg.dataset.matches:
        efg[m.home_team].append(four_factors(m.home_box, m.away_box).efg_pct)
        efg[m.away_team].append(four_factors(m.away_box, m.home_box).efg_pct)
    means = [np.mean(efg[t]) for t in names]
    assert np.corrcoef(s, means)[0, 1] > 0.5


def test_csv_roundtrip(tmp_path):
    d = generate(LeagueSpec(team_count=4, seasons=1, matches_per_team_per_season=6))
    write_matches(d, tmp_path / "s.csv")
    assert load_matches(tmp_path / "s.csv") == d


@pytest.mark.parametrize("kw", [dict(team_count=7), dict(team_count=0), dict(seasons=0),
                                dict(season_carryover=1.5), dict(team_count=4, strengths=(1.0,))])
def test_infeasible_specs(kw):
    with pytest.raises(ValueError):
        LeagueSpec(**kw)

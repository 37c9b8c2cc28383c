"""Match ingestion, franchise normalization, splitting and standardization."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

BOX_FIELDS = ("p2a", "p3a", "fta", "p2m", "p3m", "ftm", "oreb", "dreb", "tov", "poss")
MATCH_FIELDS = ("season", "date", "home_team", "away_team", "home_win")
CSV_COLUMNS = (
    MATCH_FIELDS
    + tuple(f"h_{f}" for f in BOX_FIELDS)
    + tuple(f"a_{f}" for f in BOX_FIELDS)
)

NBA_TEAMS = frozenset({
    "Atlanta Hawks", "Boston Celtics", "Brooklyn Nets", "Charlotte Hornets",
    "Chicago Bulls", "Cleveland Cavaliers", "Dallas Mavericks", "Denver Nuggets",
    "Detroit Pistons", "Golden State Warriors", "Houston Rockets", "Indiana Pacers",
    "LA Clippers", "Los Angeles Lakers", "Memphis Grizzlies", "Miami Heat",
    "Milwaukee Bucks", "Minnesota Timberwolves", "New Orleans Pelicans",
    "New York Knicks", "Oklahoma City Thunder", "Orlando Magic",
    "Philadelphia 76ers", "Phoenix Suns", "Portland Trail Blazers",
    "Sacramento Kings", "San Antonio Spurs", "Toronto Raptors", "Utah Jazz",
    "Washington Wizards",
})

# Old names of the three relocated/renamed franchises in 2004-2020.
FRANCHISE_RENAMES = {
    "New Jersey Nets": "Brooklyn Nets",
    "New Orleans Hornets": "New Orleans Pelicans",
    "New Orleans/Oklahoma City Hornets": "New Orleans Pelicans",
    "Seattle SuperSonics": "Oklahoma City Thunder",
}


class DataValidationError(ValueError):
    """Raised when input data violates the match schema or its invariants."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        head = "; ".join(self.problems[:10])
        more = f" (+{len(self.problems) - 10} more)" if len(self.problems) > 10 else ""
        super().__init__(head + more)


@dataclass(frozen=True)
class BoxScore:
    p2a: int
    p3a: int
    fta: int
    p2m: int
    p3m: int
    ftm: int
    oreb: int
    dreb: int
    tov: int
    poss: float | None = None

    def problems(self) -> list[str]:
        out = []
        for name in BOX_FIELDS[:-1]:
            if getattr(self, name) < 0:
                out.append(f"{name} is negative")
        if self.poss is not None and self.poss < 0:
            out.append("poss is negative")
        for made, att in (("p2m", "p2a"), ("p3m", "p3a"), ("ftm", "fta")):
            if getattr(self, made) > getattr(self, att):
                out.append(f"{made} > {att}")
        return out


@dataclass(frozen=True)
class MatchRecord:
    season_id: str
    match_index: int
    date: date
    home_team: str
    away_team: str
    result: int
    home_box: BoxScore
    away_box: BoxScore


@dataclass(frozen=True)
class Dataset:
    matches: tuple[MatchRecord, ...]
    teams: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        if not self.teams:
            teams = {m.home_team for m in self.matches} | {m.away_team for m in self.matches}
            object.__setattr__(self, "teams", frozenset(teams))

    def __len__(self) -> int:
        return len(self.matches)

    @property
    def season_ids(self) -> list[str]:
        return [m.season_id for m in self.matches]

    @property
    def seasons(self) -> list[str]:
        """Season labels in order of first appearance."""
        return list(dict.fromkeys(self.season_ids))

    @property
    def labels(self) -> np.ndarray:
        return np.array([m.result for m in self.matches], dtype=int)


def make_dataset(matches: Iterable[MatchRecord]) -> Dataset:
    """Sort by date (stable) and assign chronological match indices."""
    ordered = sorted(matches, key=lambda m: m.date)
    return Dataset(tuple(replace(m, match_index=i) for i, m in enumerate(ordered)))


def _parse_int(raw: str, name: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(f"{name} is not an integer count: {raw!r}")
    return int(value)


def _parse_box(row: Mapping[str, str], prefix: str) -> BoxScore:
    counts = {f: _parse_int(row[f"{prefix}{f}"], f"{prefix}{f}") for f in BOX_FIELDS[:-1]}
    raw_poss = (row.get(f"{prefix}poss") or "").strip()
    poss = float(raw_poss) if raw_poss else None
    if poss is not None and not math.isfinite(poss):
        raise ValueError(f"{prefix}poss is not finite")
    return BoxScore(**counts, poss=poss)


def load_matches(path: str | Path, columns: Mapping[str, str] | None = None) -> Dataset:
    """Read a match CSV into a chronologically sorted Dataset.

    ``columns`` optionally maps schema names (``home_team``, ``h_p2a``...) to
    the header names actually used in the file. Every malformed row is
    reported with its line number in a single DataValidationError.
    """
    path = Path(path)
    rename = dict(columns or {})
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        wanted = {c: rename.get(c, c) for c in CSV_COLUMNS}
        missing = [c for c, col in wanted.items() if col not in header]
        if missing:
            raise DataValidationError([f"missing columns: {', '.join(missing)}"])
        problems: list[str] = []
        records: list[MatchRecord] = []
        seen: dict[tuple, int] = {}
        for line_no, raw in enumerate(reader, start=2):
            row = {c: (raw[col] or "").strip() for c, col in wanted.items()}
            try:
                home_box = _parse_box(row, "h_")
                away_box = _parse_box(row, "a_")
                result = _parse_int(row["home_win"], "home_win")
                day = date.fromisoformat(row["date"])
            except ValueError as exc:
                problems.append(f"line {line_no}: {exc}")
                continue
            bad = [f"home {p}" for p in home_box.problems()] + [f"away {p}" for p in away_box.problems()]
            if result not in (0, 1):
                bad.append("home_win must be 0 or 1")
            if not row["season"]:
                bad.append("empty season")
            if not row["home_team"] or not row["away_team"]:
                bad.append("empty team name")
            elif row["home_team"] == row["away_team"]:
                bad.append("home_team equals away_team")
            key = (day, row["home_team"], row["away_team"])
            if key in seen:
                bad.append(f"duplicate of line {seen[key]}")
            else:
                seen[key] = line_no
            if bad:
                problems.append(f"line {line_no}: {', '.join(bad)}")
                continue
            records.append(MatchRecord(
                season_id=row["season"], match_index=-1, date=day,
                home_team=row["home_team"], away_team=row["away_team"],
                result=result, home_box=home_box, away_box=away_box,
            ))
    if problems:
        raise DataValidationError(problems)
    return make_dataset(records)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_matches(d: Dataset, path: str | Path) -> None:
    """Write a Dataset using the same schema load_matches reads."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for m in d.matches:
            w.writerow(
                [m.season_id, m.date.isoformat(), m.home_team, m.away_team, m.result]
                + [_fmt(getattr(m.home_box, f)) for f in BOX_FIELDS]
                + [_fmt(getattr(m.away_box, f)) for f in BOX_FIELDS]
            )


def load_alias_map(path: str | Path) -> dict[str, str]:
    """Two-column CSV ``old_name,canonical_name``; a header row is optional."""
    out = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise DataValidationError([f"alias map line {i + 1}: expected 2 columns"])
            old, new = (s.strip() for s in row)
            if i == 0 and (old, new) == ("old_name", "canonical_name"):
                continue
            out[old] = new
    return out


def normalize_franchises(
    d: Dataset,
    alias_map: Mapping[str, str] = FRANCHISE_RENAMES,
    canonical: Iterable[str] | None = None,
) -> Dataset:
    """Rewrite team names through ``alias_map``.

    When ``canonical`` is given, any name that is neither canonical nor an
    alias key raises DataValidationError.
    """
    canon = None if canonical is None else frozenset(canonical)

    def fix(name: str) -> str:
        return alias_map.get(name, name)

    if canon is not None:
        unknown = sorted(t for t in d.teams if fix(t) not in canon)
        if unknown:
            raise DataValidationError([f"unknown team name with no alias entry: {t}" for t in unknown])
    matches = tuple(
        replace(m, home_team=fix(m.home_team), away_team=fix(m.away_team)) for m in d.matches
    )
    return Dataset(matches)


def home_win_rate_by_season(d: Dataset) -> tuple[dict[str, float], float]:
    """Percent of home wins per season (first-appearance order) and overall."""
    if not len(d):
        raise ValueError("empty dataset")
    wins: dict[str, list[int]] = {}
    for m in d.matches:
        wins.setdefault(m.season_id, []).append(m.result)
    per_season = {s: 100.0 * sum(v) / len(v) for s, v in wins.items()}
    overall = 100.0 * float(d.labels.mean())
    return per_season, overall


# -- splitting ---------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    """How rows are divided into train/test folds.

    ``random`` mode draws ``folds`` independent seeded shuffles, each keeping
    ``train_fraction`` of the rows for training; with ``disjoint=True`` the
    folds are instead a seeded k-fold partition. ``temporal`` mode trains on
    ``train_seasons`` and tests on ``test_seasons`` (a single fold).
    """

    mode: str = "random"
    train_fraction: float = 0.75
    folds: int = 4
    seed: int = 0
    disjoint: bool = False
    train_seasons: tuple[str, ...] = ()
    test_seasons: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in ("random", "temporal"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.folds < 1:
            raise ValueError("folds must be positive")
        if self.mode == "temporal":
            overlap = set(self.train_seasons) & set(self.test_seasons)
            if overlap:
                raise ValueError(f"train and test seasons overlap: {sorted(overlap)}")
            if not self.train_seasons or not self.test_seasons:
                raise ValueError("temporal split needs train and test seasons")


def temporal_spec(seasons: Sequence[str], n_train: int, **kw) -> SplitSpec:
    """First ``n_train`` seasons for training, the rest for testing."""
    seasons = list(dict.fromkeys(seasons))
    return SplitSpec(mode="temporal", train_seasons=tuple(seasons[:n_train]),
                     test_seasons=tuple(seasons[n_train:]), folds=1, **kw)


def split(rows, spec: SplitSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Return ``(train_idx, test_idx)`` pairs, one per fold.

    ``rows`` is anything with ``season_ids`` (Dataset, FeatureMatrix).
    Indices are sorted so row order inside each partition stays chronological.
    """
    seasons = np.asarray(rows.season_ids, dtype=object)
    n = len(seasons)
    if spec.mode == "temporal":
        train = np.flatnonzero(np.isin(seasons, list(spec.train_seasons)))
        test = np.flatnonzero(np.isin(seasons, list(spec.test_seasons)))
        return [(train, test)]
    if spec.disjoint:
        perm = np.random.default_rng(spec.seed).permutation(n)
        chunks = np.array_split(perm, spec.folds)
        return [
            (np.sort(np.concatenate([c for j, c in enumerate(chunks) if j != i])), np.sort(chunks[i]))
            for i in range(spec.folds)
        ]
    n_train = int(round(spec.train_fraction * n))
    out = []
    for fold in range(spec.folds):
        perm = np.random.default_rng([spec.seed, fold]).permutation(n)
        out.append((np.sort(perm[:n_train]), np.sort(perm[n_train:])))
    return out


# -- standardization ---------------------------------------------------------

@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.std


def standardize_fit(train: np.ndarray) -> Standardizer:
    """Column means and population standard deviations of the training rows."""
    x = np.asarray(train, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("standardize_fit needs a non-empty 2-d array")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    const = np.flatnonzero(~(std > 0))
    if const.size:
        raise ValueError(f"constant feature column(s) {const.tolist()} cannot be standardized")
    return Standardizer(mean, std)


def standardize_apply(s: Standardizer, x: np.ndarray) -> np.ndarray:
    return s.apply(x)


def drop_na_rows(m):
    """Drop rows of a FeatureMatrix holding any undefined value.

    The returned matrix carries the cumulative number of dropped rows in
    ``dropped``; an all-NA input yields an empty matrix and a warning.
    """
    keep = np.flatnonzero(~m.na_mask)
    n_drop = len(m) - keep.size
    if n_drop:
        logger.info("dropped %d of %d rows with undefined features", n_drop, len(m))
    if keep.size == 0 and len(m):
        logger.warning("every row has undefined features; result is empty")
    return m.take(keep, dropped=m.dropped + n_drop)

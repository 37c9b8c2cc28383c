"""Command-line driver: single cross-validated runs and parameter sweeps.

Configuration comes from a flat ``key = value`` file (``--config``) and
``--key=value`` overrides; command line beats file beats defaults. Every
run echoes the fully resolved configuration into its output directory.

Exit codes: 0 success, 1 usage/config error, 2 data validation error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import plotting
from .dataset import (DataValidationError, SplitSpec, home_win_rate_by_season, load_alias_map,
                      load_matches, normalize_franchises, temporal_spec)
from .elo import EloConfig, replay, write_history
from .evaluation import EvalReport, evaluate_matrix
from .features import FeatureSpec, build_feature_matrix, write_feature_matrix
from .net import TrainConfig, deep_layers, reference_layers, save_network
from .synth import LeagueSpec, generate

log = logging.getLogger("hoopcast")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # data source
    data: str = ""
    alias_map: str = ""
    synth: bool = False
    synth_teams: int = 30
    synth_seasons: int = 10
    synth_matches: int = 82
    synth_strength_sd: float = 150.0
    synth_home_advantage: float = 65.0
    synth_carryover: float = 0.9
    synth_drift: float = 0.0
    synth_factor_noise: float = 1.0
    synth_seed: int = 0
    # features
    feature_family: str = "elo"
    periodicity: str = "historical"
    court_split: bool = False
    depth: int = 2
    regression_pct: float = 0.2
    dynamic_regression: bool = False
    # elo
    initial_rating: float = 1300.0
    logistic_divisor: float = 400.0
    k: float = 30.0
    home_advantage: float = 40.0
    # network and training
    architecture: str = "reference"
    hidden_units: int = 16
    dropout: float = 0.3
    l2: float = 0.0
    epochs: int = 100
    batch_size: int = 128
    validation_fraction: float = 0.2
    patience: int = 10
    learning_rate: float = 0.001
    # evaluation
    split_mode: str = "random"
    train_fraction: float = 0.75
    folds: int = 4
    disjoint: bool = False
    train_seasons: int = 0
    criterion: str = "accuracy"
    seed: int = 0
    # output
    out: str = "report"
    workers: int = 0

    def feature_spec(self) -> FeatureSpec:
        elo = EloConfig(self.initial_rating, self.logistic_divisor, self.k, self.home_advantage,
                        self.regression_pct, self.court_split)
        return FeatureSpec(self.feature_family, self.periodicity, self.court_split, self.depth,
                           self.regression_pct, self.dynamic_regression, elo)

    def layers(self):
        if self.architecture == "reference":
            return reference_layers(self.hidden_units, self.dropout, self.l2)
        if self.architecture == "deep":
            return deep_layers(10, 64, self.dropout, self.l2)
        raise ConfigError(f"architecture must be 'reference' or 'deep', got {self.architecture!r}")

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.batch_size, self.validation_fraction, self.seed,
                           self.patience if self.patience > 0 else None, self.learning_rate)

    def league_spec(self) -> LeagueSpec:
        return LeagueSpec(self.synth_teams, self.synth_seasons, self.synth_matches,
                          self.synth_strength_sd, self.synth_home_advantage, self.synth_carryover,
                          self.synth_drift, self.synth_factor_noise, seed=self.synth_seed)

    def split_spec(self, seasons: Sequence[str]) -> SplitSpec:
        if self.split_mode == "temporal":
            if not 0 < self.train_seasons < len(seasons):
                raise ConfigError("temporal split needs 0 < train_seasons < number of seasons")
            return temporal_spec(seasons, self.train_seasons, seed=self.seed)
        return SplitSpec(self.split_mode, self.train_fraction, self.folds, self.seed, self.disjoint)

    def validate(self) -> "ExperimentConfig":
        try:
            self.feature_spec()
            self.layers()
            self.train_config()
            if self.synth:
                self.league_spec()
            if self.split_mode != "temporal":
                self.split_spec([])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.criterion not in ("accuracy", "youden"):
            raise ConfigError("criterion must be 'accuracy' or 'youden'")
        if not self.synth and not self.data:
            raise ConfigError("no data source: give --data PATH or --synth")
        return self


FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_bool(raw: str) -> bool:
    v = str(raw).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {raw!r}")


def coerce(key: str, raw) -> object:
    key = key.strip().replace("-", "_")
    if key not in FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = FIELD_TYPES[key]
    try:
        if kind == "bool":
            return parse_bool(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return str(raw).strip()


def read_kv_file(path: str | Path) -> list[tuple[str, str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = line.split("=", 1)
        out.append((key.strip(), value.strip()))
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    values = {}
    if path:
        values.update({k.replace("-", "_"): coerce(k, v) for k, v in read_kv_file(path)})
    for k, v in (overrides or {}).items():
        values[k.replace("-", "_")] = coerce(k, v)
    return ExperimentConfig(**values)


def format_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in asdict(cfg).items())


def read_grid(path: str | Path) -> dict[str, list]:
    grid = {}
    for key, raw in read_kv_file(path):
        vals = [coerce(key, v) for v in raw.split(",") if v.strip()]
        if not vals:
            raise ConfigError(f"grid key {key!r} has no values")
        grid[key.replace("-", "_")] = vals
    if not grid:
        raise ConfigError("sweep grid is empty")
    return grid


# -- running -------------------------------------------------------------------

def load_data(cfg: ExperimentConfig):
    if cfg.synth:
        return generate(cfg.league_spec())
    d = load_matches(cfg.data)
    if cfg.alias_map:
        d = normalize_franchises(d, load_alias_map(cfg.alias_map))
    return d


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _num(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_report(report: EvalReport, cfg: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "summary.csv", ["metric", "value"], [(k, _num(v)) for k, v in report.summary()])
    for f in report.folds:
        rows = zip(f.roc.fpr, f.roc.tpr, f.roc.thresholds)
        _write_rows(out / f"roc_fold{f.fold}.csv", ["fpr", "tpr", "threshold"],
                    [(_num(a), _num(b), _num(c)) for a, b, c in rows])
        f.history.write_csv(out / f"curves_fold{f.fold}.csv")
    if report.folds:
        first = report.folds[0]
        (out / "roc.csv").write_text((out / f"roc_fold{first.fold}.csv").read_text())
        save_network(first.network, out / f"model_fold{first.fold}.txt")
        plotting.plot_roc(report, out / "roc.png")
        plotting.plot_training(first.history, out / "training.png")
    _write_rows(out / "seasons.csv", ["season", "accuracy", "n", "small"],
                [(s.season, _num(s.accuracy), s.n, int(s.small)) for s in report.seasons])
    lines = [
        f"feature: {cfg.feature_family} {cfg.periodicity} court_split={cfg.court_split}",
        f"rows used: {report.n_rows} (dropped for undefined features: {report.n_dropped})",
        f"folds evaluated: {len(report.folds)} skipped: {report.skipped}",
        f"mean AUC {report.auc:.4f}  threshold {report.threshold:.4f}  accuracy {report.accuracy:.4f}",
    ]
    for f in report.folds:
        tag = " (single execution)" if f is report.folds[0] else ""
        lines.append(f"  fold {f.fold}: AUC {f.auc:.4f} threshold {f.threshold:.4f} "
                     f"accuracy {f.accuracy:.4f} train {f.n_train} test {f.n_test}{tag}")
    lines.append("per-season accuracy:")
    for s in report.seasons:
        lines.append(f"  {s.season}: {s.accuracy:.4f} (n={s.n}{', few rows' if s.small else ''})")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")


def run(cfg: ExperimentConfig, data=None) -> EvalReport:
    """Cross-validate one configuration and write its report directory."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(format_config(cfg))
    d = data if data is not None else load_data(cfg)
    spec = cfg.feature_spec()
    m = build_feature_matrix(d, spec)
    write_feature_matrix(m, out / "features.csv")
    if spec.family == "elo":
        write_history(replay(d, spec.elo_config), out / "elo_history.csv")
    per_season, overall = home_win_rate_by_season(d)
    _write_rows(out / "home_win_rates.csv", ["season", "home_win_pct"],
                [(s, _num(v)) for s, v in per_season.items()] + [("overall", _num(overall))])
    report = evaluate_matrix(m, cfg.layers(), cfg.train_config(), cfg.split_spec(d.seasons),
                             cfg.criterion, workers=max(cfg.workers, 1))
    write_report(report, cfg, out)
    log.info("%s: AUC %.4f accuracy %.4f", out, report.auc, report.accuracy)
    return report


def point_seed(base: int, coords: Sequence[int]) -> int:
    return int(np.random.SeedSequence([base, *coords]).generate_state(1)[0] % (2**31))


def sweep_points(cfg: ExperimentConfig, grid: dict[str, list]) -> list[ExperimentConfig]:
    keys = list(grid)
    points = []
    for n, coords in enumerate(itertools.product(*(range(len(grid[k])) for k in keys))):
        values = {k: grid[k][i] for k, i in zip(keys, coords)}
        points.append(replace(cfg, **values, seed=point_seed(cfg.seed, coords), workers=1,
                              out=str(Path(cfg.out) / f"point_{n:03d}")))
    return points


def _run_point(point: ExperimentConfig) -> tuple[float, float, float, str]:
    try:
        r = run(point)
        return r.auc, r.accuracy, r.threshold, "ok"
    except Exception as exc:  # recorded per point, never fatal for the sweep
        return float("nan"), float("nan"), float("nan"), f"error: {exc}"


def sweep(cfg: ExperimentConfig, grid: dict[str, list]) -> list[dict]:
    """Run every grid point and write ``sweep.csv`` sorted by AUC then accuracy."""
    cfg.validate()
    bad = [k for k in grid if k not in FIELD_TYPES]
    if bad:
        raise ConfigError(f"unknown grid keys: {bad}")
    points = sweep_points(cfg, grid)
    for p in points:
        p.validate()
    workers = cfg.workers or os.cpu_count() or 1
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(points))) as ex:
            results = list(ex.map(_run_point, points))
    else:
        results = [_run_point(p) for p in points]
    rows = []
    for n, (p, (auc, acc, thr, status)) in enumerate(zip(points, results)):
        row = {"point": n, **{k: getattr(p, k) for k in grid}, "seed": p.seed,
               "auc": auc, "accuracy": acc, "threshold": thr, "status": status}
        rows.append(row)
    rows.sort(key=lambda r: (-np.nan_to_num(r["auc"], nan=-1.0),
                             -np.nan_to_num(r["accuracy"], nan=-1.0), r["point"]))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(format_config(cfg))
    header = list(rows[0])
    _write_rows(out / "sweep.csv", header, [[_num(r[h]) for h in header] for r in rows])
    if len(grid) == 1:
        key = next(iter(grid))
        ordered = sorted(rows, key=lambda r: r[key])
        plotting.plot_sweep(key, [r[key] for r in ordered], [r["accuracy"] for r in ordered],
                            [r["auc"] for r in ordered], out / "sweep.png")
    return rows


# -- entry point -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hoopcast", description="Basketball outcome features and prediction pipeline.",
                argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--sweep", metavar="GRID", help="grid file: key = v1, v2, ...")
    p.add_argument("-v", "--verbose", action="store_true")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool":
            p.add_argument(flag, nargs="?", const="true", dest=f.name, metavar="BOOL")
        else:
            p.add_argument(flag, dest=f.name, metavar=f.name.upper())
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = vars(build_parser().parse_args(argv))
    except ConfigError as exc:
        print(f"hoopcast: usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.pop("verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config_path = args.pop("config", None)
    grid_path = args.pop("sweep", None)
    try:
        cfg = load_config(config_path, args).validate()
        if cfg.data and not cfg.synth and not Path(cfg.data).is_file():
            print(f"hoopcast: data file not found: {cfg.data}", file=sys.stderr)
            return EXIT_DATA
        if grid_path:
            rows = sweep(cfg, read_grid(grid_path))
            best = rows[0]
            print(f"sweep: {len(rows)} points, best AUC {best['auc']:.4f} "
                  f"accuracy {best['accuracy']:.4f} -> {Path(cfg.out) / 'sweep.csv'}")
        else:
            r = run(cfg)
            print(f"AUC {r.auc:.4f}  threshold {r.threshold:.4f}  accuracy {r.accuracy:.4f} "
                  f"-> {cfg.out}")
    except ConfigError as exc:
        print(f"hoopcast: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataValidationError as exc:
        print(f"hoopcast: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        print(f"hoopcast: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

import csv
from dataclasses import replace

import pytest

from hoopcast.cli import (ConfigError, ExperimentConfig, format_config, load_config, main, read_grid,
                          run, sweep)

FAST = ["--synth", "--synth-teams=6", "--synth-seasons=2", "--synth-matches=20", "--epochs=3",
        "--folds=2"]


def fast_config(tmp_path, **kw):
    base = ExperimentConfig(synth=True, synth_teams=6, synth_seasons=2, synth_matches=20, epochs=3,
                            folds=2, out=str(tmp_path / "out"))
    return replace(base, **kw)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_precedence_cli_over_file_over_defaults(tmp_path):
    (tmp_path / "c.txt").write_text("k = 20  # gain\nhome_advantage = 55\n\n")
    cfg = load_config(tmp_path / "c.txt", {"k": "25"})
    assert (cfg.k, cfg.home_advantage, cfg.depth) == (25.0, 55.0, 2)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(None, {"not_a_key": "1"})
    with pytest.raises(ConfigError):
        load_config(None, {"k": "many"})
    with pytest.raises(ConfigError):
        ExperimentConfig(synth=True, k=-1).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig().validate()  # no data source
    (tmp_path / "g.txt").write_text("k =\n")
    with pytest.raises(ConfigError):
        read_grid(tmp_path / "g.txt")


def test_run_writes_report(tmp_path):
    cfg = fast_config(tmp_path)
    report = run(cfg)
    out = tmp_path / "out"
    for name in ("config.txt", "summary.csv", "summary.txt", "roc.csv", "seasons.csv",
                 "curves_fold0.csv", "roc.png", "training.png", "features.csv", "elo_history.csv",
                 "model_fold0.txt", "home_win_rates.csv"):
        assert (out / name).exists(), name
    assert (out / "config.txt").read_text() == format_config(cfg)
    summary = {r["metric"]: r["value"] for r in read_csv(out / "summary.csv")}
    assert float(summary["auc_mean"]) == pytest.approx(report.auc)
    roc = read_csv(out / "roc.csv")
    assert list(roc[0]) == ["fpr", "tpr", "threshold"]
    assert list(read_csv(out / "seasons.csv")[0]) == ["season", "accuracy", "n", "small"]
    # the echoed config reproduces the run
    again = run(replace(load_config(out / "config.txt"), out=str(tmp_path / "again")))
    assert again.auc == report.auc and again.accuracy == report.accuracy


def test_main_exit_codes(tmp_path, capsys):
    assert main(FAST + [f"--out={tmp_path / 'a'}"]) == 0
    assert "AUC" in capsys.readouterr().out
    assert main(["--bogus=1"]) == 1
    assert main(["--synth", "--k=0"]) == 1
    assert main(["--config", str(tmp_path / "missing.txt")]) == 1
    assert main([f"--data={tmp_path / 'nope.csv'}"]) == 2
    (tmp_path / "bad.csv").write_text("season\n2004\n")
    assert main([f"--data={tmp_path / 'bad.csv'}", f"--out={tmp_path / 'b'}"]) == 2
    assert "missing columns" in capsys.readouterr().err
    # no match has 500 earlier ratings, so nothing is left to evaluate
    assert main(FAST + ["--periodicity=dynamic", "--depth=500", f"--out={tmp_path / 'c'}"]) == 3


def test_sweep_sorted_and_reproducible(tmp_path):
    cfg = fast_config(tmp_path, workers=2)
    rows = sweep(cfg, {"regression_pct": [0.0, 0.5, 1.0]})
    aucs = [r["auc"] for r in rows]
    assert aucs == sorted(aucs, reverse=True)
    assert len({r["seed"] for r in rows}) == 3
    table = read_csv(tmp_path / "out" / "sweep.csv")
    assert [float(r["auc"]) for r in table] == aucs
    assert (tmp_path / "out" / "sweep.png").exists()
    # a point rerun from its echoed config gives the same numbers
    point = tmp_path / "out" / f"point_{rows[0]['point']:03d}"
    again = run(replace(load_config(point / "config.txt"), out=str(tmp_path / "again")))
    assert again.auc == rows[0]["auc"]


def test_sweep_point_failure_is_recorded(tmp_path):
    # depth larger than any team's match count leaves no usable rows for that point
    cfg = fast_config(tmp_path, periodicity="dynamic", workers=1)
    rows = sweep(cfg, {"depth": [1, 500]})
    status = {r["depth"]: r["status"] for r in rows}
    assert status[1] == "ok" and status[500].startswith("error")
    assert rows[0]["depth"] == 1


def test_main_sweep(tmp_path, capsys):
    (tmp_path / "grid.txt").write_text("k = 20, 40\n")
    assert main(FAST + ["--workers=1", f"--sweep={tmp_path / 'grid.txt'}",
                        f"--out={tmp_path / 's'}"]) == 0
    assert "2 points" in capsys.readouterr().out

import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from published_tables import TABLE_ROWS
from ucbstop.certify import ConfigurationError, ProblemConstants, compute_beta, variance_floor
from ucbstop.harness.bench import (
    ITERATION_COLUMNS,
    RUN_COLUMNS,
    TIMING_COLUMNS,
    read_runs_csv,
    run_bench,
    run_sweep,
    summarize,
)
from ucbstop.harness.cli import main
from ucbstop.harness.config import CONFIG_DIR, load_config, parse_seeds
from ucbstop.harness.tables import PRESETS, bounds_table, preset
from ucbstop.harness.timing import time_overhead

SMALL = """
[objective]
name = branin
[surrogate]
family = matern52
lengthscale = 0.3
noise_sigma = 0.01
[loop]
budget = 14
init_count = 5
[stopping]
epsilon = 1.0
delta = 0.05
B = 2.0
[run]
seeds = 0-2
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def _strip_timing(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    keep = [i for i, c in enumerate(rows[0]) if c not in TIMING_COLUMNS]
    return [[r[i] for i in keep] for r in rows]


# ---- config ----

def test_parse_seeds():
    assert parse_seeds("0-3, 7") == (0, 1, 2, 3, 7)
    assert parse_seeds("5") == (5,)
    with pytest.raises(ConfigurationError):
        parse_seeds("4-2")


@pytest.mark.parametrize("name", ["rosenbrock4d", "branin", "levy4d", "gp_matern_d2"])
def test_bundled_configs_load(name):
    cfg = load_config(name)
    assert cfg.seeds == tuple(range(10))
    assert cfg.epsilon == 0.1 and cfg.delta == 0.05 and cfg.a == cfg.b == 2.0
    assert (CONFIG_DIR / f"{name}.ini").exists()


def test_config_validation(small_cfg):
    with pytest.raises(ConfigurationError, match="unique"):
        load_config(small_cfg, ["run.seeds=1,1"])
    with pytest.raises(ConfigurationError, match="nonempty"):
        load_config(small_cfg, ["run.seeds= "])
    with pytest.raises(ConfigurationError, match="init_count"):
        load_config(small_cfg, ["loop.budget=3"])
    with pytest.raises(ConfigurationError):
        load_config(small_cfg, ["stopping.rules=ucb_br, bogus"])
    with pytest.raises(ConfigurationError):
        load_config(small_cfg, ["stopping.delta=1.5"])
    with pytest.raises(ConfigurationError):
        load_config(small_cfg, ["loop.budget=many"])
    with pytest.raises(ConfigurationError):
        load_config(small_cfg.parent / "missing.ini")


def test_calibration_overrides(small_cfg):
    cfg = load_config(small_cfg, ["stopping.B=5", "stopping.b=3"])
    assert (cfg.a, cfg.b) == (5.0, 3.0)
    cell = cfg.with_calibration(B=1.0, delta=0.2)
    assert (cell.a, cell.b, cell.delta) == (1.0, 1.0, 0.2)
    assert cell.constants() == ProblemConstants(d=2, a=1.0, b=1.0, sigma=0.01, delta=0.2)


# ---- tables ----

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_rows_match_published(name):
    rows = bounds_table(*preset(name))
    assert len(rows) == 9
    for row, ref in zip(rows, TABLE_ROWS[name]):
        assert row.t == ref[0]
        assert row.bound_new == pytest.approx(ref[8], rel=0.02)
        assert row.bound_old == pytest.approx(ref[9], rel=0.01)
        assert abs(row.ratio - ref[10]) <= 0.02


def test_floor_c1_is_variance_floor():
    rows = bounds_table(*preset("table4"))
    for row in rows[::3]:
        assert row.c1 == row.c2 == variance_floor(row.t, 0.01)


def test_ratio_and_dominance_on_emitted_columns(tmp_path):
    rng = np.random.default_rng(0)
    for _ in range(20):
        consts = ProblemConstants(d=int(rng.integers(1, 6)), delta=float(rng.uniform(0.01, 0.5)),
                                  n_lip=float(rng.uniform(2, 20)), a=float(rng.uniform(0.5, 5)),
                                  b=float(rng.uniform(0.5, 5)))
        ts = [int(t) for t in rng.integers(1, 2000, size=3)]
        c1s = ["floor"] + [float(v) for v in 10 ** rng.uniform(-4, 0, size=2)]
        for row in bounds_table(consts, ts, c1s):
            assert not row.error
            assert row.bound_new <= row.bound_old_full + 1e-12
            if row.bound_old > 0:
                assert abs(row.ratio - row.bound_new / row.bound_old) <= 1e-9


def test_degenerate_custom_row():
    consts = ProblemConstants(d=2, delta=0.1)
    (row,) = bounds_table(consts, [1], [0.0])
    beta = compute_beta(1, consts)
    assert row.s == 2.0
    expected = max(0.0, 1.0 - (math.sqrt(beta) - row.sqrt_alpha) * row.c2)
    assert row.bound_new == pytest.approx(expected, abs=1e-12)
    assert row.bound_old == 0.0 and math.isnan(row.ratio)


def test_per_row_errors_are_reported():
    # beta is undefined when the log argument collapses (tiny a and b)
    consts = ProblemConstants(d=1, a=1e-9, b=1e-9, delta=0.1, n_lip=1e12)
    rows = bounds_table(consts, [1, 20], [0.01])
    assert any(r.error for r in rows)


# ---- bench ----

def test_bench_outputs_and_invariants(small_cfg, tmp_path):
    cfg = load_config(small_cfg)
    res = run_bench(cfg, tmp_path / "a")
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())["rules"]
    assert summary == res.summary
    # summary recomputed from the per-run CSV
    assert summarize(read_runs_csv(tmp_path / "a" / "runs.csv"), cfg.budget) == summary
    assert summary["nostop"]["mean_stop_iteration"] == cfg.budget
    assert summary["nostop"]["mean_stoptest_ms"] == 0.0
    assert summary["oracle_r"]["success_rate"] == summary["nostop"]["success_rate"]
    for rule in ("ucb_br", "acq", "delta_cb"):
        assert summary[rule]["mean_stoptest_ms"] > 0

    with open(tmp_path / "a" / "iterations.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0].keys()) == ITERATION_COLUMNS
    keys = [(r["rule"], int(r["seed"]), int(r["t"])) for r in rows]
    assert keys == sorted(keys)
    for rec in res.records:
        mine = [r for r in rows if r["rule"] == rec.rule.name and int(r["seed"]) == rec.seed]
        assert len(mine) == rec.stop_iteration
        assert [float(v) for v in mine[-1]["x"].split(";")] == rec.iterations[-1].x.tolist()
    ucb = [r for r in rows if r["rule"] == "ucb_br" and r["bound_new"]]
    assert ucb and all(float(r["bound_new"]) <= float(r["bound_old_full"]) + 1e-12 for r in ucb)
    assert all((r["verdict"] == "stop") == (float(r["bound_new"]) < 1.0) for r in ucb)
    with open(tmp_path / "a" / "runs.csv", newline="") as fh:
        assert tuple(next(csv.reader(fh))) == RUN_COLUMNS


def test_bench_is_reproducible_and_worker_independent(small_cfg, tmp_path):
    cfg = load_config(small_cfg)
    run_bench(cfg, tmp_path / "a")
    run_bench(cfg, tmp_path / "b")
    run_bench(replace(cfg, workers=3), tmp_path / "c")
    for name in ("iterations.csv", "runs.csv"):
        ref = _strip_timing(tmp_path / "a" / name)
        assert _strip_timing(tmp_path / "b" / name) == ref
        assert _strip_timing(tmp_path / "c" / name) == ref


def test_failed_runs_counted_not_averaged():
    rows = [
        dict(rule="ucb_br", seed=0, status="ok", stop_iteration=10, success=True, final_regret=0.05, stoptest_ms=1.0),
        dict(rule="ucb_br", seed=1, status="failed", stop_iteration=3, success=False, final_regret=9.0, stoptest_ms=5.0),
    ]
    s = summarize(rows, budget=20)["ucb_br"]
    assert s["runs"] == 2 and s["failed"] == 1
    assert s["mean_stop_iteration"] == 10 and s["mean_final_regret"] == 0.05 and s["success_rate"] == 1.0


def test_sweep_grid(small_cfg, tmp_path):
    cfg = load_config(small_cfg, ["run.seeds=0", "sweep.B=1, 5", "sweep.delta=0.2", "stopping.rules=ucb_br"])
    cells = run_sweep(cfg, tmp_path)
    assert [(c["B"], c["delta"]) for c in cells] == [(1.0, 0.2), (5.0, 0.2)]
    assert (tmp_path / "B5_delta0.2" / "runs.csv").exists()
    assert (tmp_path / "sweep.csv").exists()


# ---- timing ----

def test_time_overhead_columns(small_cfg, tmp_path):
    cfg = load_config(small_cfg, ["run.seeds=0"])
    out = tmp_path / "overhead.csv"
    rows = time_overhead(cfg, out)
    by_rule = {r["rule"]: r for r in rows}
    assert by_rule["nostop"]["stoptest_ms"] == 0.0 and by_rule["nostop"]["share"] == 0.0
    assert by_rule["oracle_r"]["checks"] == 0
    with open(out, newline="") as fh:
        for r in csv.DictReader(fh):
            test, base = float(r["stoptest_ms"]), float(r["iteration_ms"])
            if test > 0:
                assert abs(float(r["share"]) - test / (test + base)) <= 1e-9


# ---- cli ----

def test_cli_exit_codes(small_cfg, tmp_path, capsys):
    assert main(["bounds-table", "--preset", "table1", "--out", str(tmp_path / "t.csv")]) == 0
    with open(tmp_path / "t.csv", newline="") as fh:
        assert len(list(csv.DictReader(fh))) == 9
    assert main(["bounds-table", "--delta", "2"]) == 2
    assert main(["bench", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["bench", "--config", str(small_cfg), "--set", "run.seeds=1,1"]) == 2
    assert main(["bench", "--config", str(small_cfg), "--seeds", "1", "--out", str(tmp_path / "o"),
                 "--set", "stopping.rules=ucb_br,nostop"]) == 0
    assert (tmp_path / "o" / "summary.json").exists()
    assert "configuration error" in capsys.readouterr().err

"""Multi-seed stopping-rule benchmark.

For each seed, one non-stopping GP-UCB trajectory is run with every online
rule attached as a monitor; each rule's record is then cut from it with
:func:`truncate_for_rule`. Rules never change the query sequence, so this
equals running each rule separately, and Oracle_r and NoStop see exactly
the trajectories the online rules saw.

Outputs in ``out_dir``: ``iterations.csv`` (one line per rule, seed and
iteration), ``runs.csv`` (one line per rule and seed) and ``summary.json``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..boloop import RuleKind, RunRecord, StoppingRuleConfig, run_bo, truncate_for_rule
from ..gp import KernelSpec
from ..objectives import make_objective
from .config import ExperimentConfig

__all__ = [
    "ITERATION_COLUMNS",
    "RUN_COLUMNS",
    "TIMING_COLUMNS",
    "BenchResult",
    "shared_run",
    "rule_records",
    "iteration_rows",
    "run_row",
    "summarize",
    "run_bench",
    "run_sweep",
    "read_runs_csv",
]

log = logging.getLogger(__name__)

ITERATION_COLUMNS = ("rule", "seed", "t", "x", "y", "c1", "beta", "sqrt_eta", "sqrt_alpha", "s",
                     "bound_new", "bound_old_full", "bound_old_table", "verdict", "gap", "stoptest_ms")
RUN_COLUMNS = ("rule", "seed", "status", "stop_iteration", "stopped", "final_regret", "success",
               "stoptest_ms", "loop_ms", "error")
# wall-clock columns; everything else is reproducible byte for byte
TIMING_COLUMNS = ("stoptest_ms", "loop_ms")
_ONLINE = (RuleKind.UCB_BR, RuleKind.ACQ, RuleKind.DELTA_CB)


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


@lru_cache(maxsize=8)
def _objective(name, dim, seed, family, lengthscale, feature_count, output_scale):
    return make_objective(name, d=dim, seed=seed, kernel=KernelSpec(family, lengthscale),
                          feature_count=feature_count, output_scale=output_scale)


def objective_for(cfg: ExperimentConfig, seed):
    # GP samples draw a fresh function per seed; fixed benchmarks ignore the seed
    sample_seed = seed if cfg.objective == "gp_sample" else 0
    scale = cfg.output_scale if cfg.output_scale in ("raw", "std") else float(cfg.output_scale)
    return _objective(cfg.objective, cfg.dim, sample_seed, cfg.sample_family,
                      cfg.sample_lengthscale, cfg.feature_count, scale)


def shared_run(cfg: ExperimentConfig, seed) -> RunRecord:
    """The NoStop trajectory for ``seed`` carrying every configured online rule."""
    monitors = [r for r in cfg.rule_configs() if r.kind in _ONLINE]
    nostop = StoppingRuleConfig(RuleKind.NOSTOP, epsilon=cfg.epsilon, check_stride=cfg.check_stride)
    rec = run_bo(objective_for(cfg, seed), cfg.surrogate(), cfg.budget, cfg.init_count, nostop,
                 cfg.constants(), seed, monitors=monitors)
    if rec.status != "ok":
        log.warning("seed %d failed: %s", seed, rec.error)
    return rec


def rule_records(cfg: ExperimentConfig, shared: RunRecord):
    return [truncate_for_rule(shared, r) for r in cfg.rule_configs()]


def iteration_rows(rec: RunRecord):
    """Per-iteration CSV rows for one rule's record."""
    name = rec.rule.name
    rows = []
    for it in rec.iterations:
        cert = it.certificate if rec.rule.kind is RuleKind.UCB_BR else None
        sol = cert.solution if cert is not None else None
        verdict = it.verdicts.get(name, "")
        if rec.rule.kind in (RuleKind.NOSTOP, RuleKind.ORACLE_R) and not it.initial:
            verdict = "stop" if (rec.stopped and it.t == rec.stop_iteration) else "continue"
        rows.append({
            "rule": name,
            "seed": rec.seed,
            "t": it.t,
            "x": ";".join(repr(float(v)) for v in it.x),
            "y": it.y,
            "c1": it.c1,
            "beta": it.beta,
            "sqrt_eta": sol.sqrt_eta if sol else math.nan,
            "sqrt_alpha": sol.sqrt_alpha if sol else math.nan,
            "s": sol.s if sol else math.nan,
            "bound_new": cert.tightened_bound if cert else math.nan,
            "bound_old_full": cert.classic_bound_full if cert else math.nan,
            "bound_old_table": cert.classic_bound_table if cert else math.nan,
            "verdict": verdict,
            "gap": it.gaps.get(name, math.nan),
            "stoptest_ms": it.times_ms.get(name, math.nan),
        })
    return rows


def run_row(rec: RunRecord):
    return {
        "rule": rec.rule.name,
        "seed": rec.seed,
        "status": rec.status,
        "stop_iteration": rec.stop_iteration,
        "stopped": rec.stopped,
        "final_regret": rec.final_regret,
        "success": rec.success,
        "stoptest_ms": rec.stoptest_ms(),
        "loop_ms": rec.mean_loop_ms(),
        "error": rec.error,
    }


def _mean(vals):
    return math.fsum(vals) / len(vals) if vals else math.nan


def summarize(rows, budget):
    """Per-rule statistics from run rows. Failed runs are counted, not averaged."""
    out = {}
    for name in sorted({r["rule"] for r in rows}):
        mine = [r for r in rows if r["rule"] == name]
        ok = [r for r in mine if r["status"] == "ok"]
        out[name] = {
            "runs": len(mine),
            "failed": len(mine) - len(ok),
            "mean_stop_iteration": _mean([float(r["stop_iteration"]) for r in ok]),
            "stopped_before_budget": sum(1 for r in ok if r["stop_iteration"] < budget),
            "success_rate": _mean([1.0 if r["success"] else 0.0 for r in ok]),
            "mean_final_regret": _mean([r["final_regret"] for r in ok]),
            "mean_stoptest_ms": _mean([r["stoptest_ms"] for r in ok]),
        }
    return out


@dataclass
class BenchResult:
    config: ExperimentConfig
    records: list
    summary: dict
    out_dir: Path | None = None

    def record(self, rule, seed):
        return next(r for r in self.records if r.rule.name == rule and r.seed == seed)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def read_runs_csv(path):
    """Parse ``runs.csv`` back into typed rows (inverse of the writer)."""
    with open(path, newline="") as fh:
        rows = []
        for raw in csv.DictReader(fh):
            rows.append({
                "rule": raw["rule"],
                "seed": int(raw["seed"]),
                "status": raw["status"],
                "stop_iteration": int(raw["stop_iteration"]),
                "stopped": raw["stopped"] == "true",
                "final_regret": float(raw["final_regret"]) if raw["final_regret"] else math.nan,
                "success": raw["success"] == "true",
                "stoptest_ms": float(raw["stoptest_ms"]),
                "loop_ms": float(raw["loop_ms"]),
                "error": raw["error"],
            })
    return rows


def _shared_runs(cfg: ExperimentConfig):
    seeds = list(cfg.seeds)
    if cfg.workers == 1 or len(seeds) == 1:
        return [shared_run(cfg, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(shared_run, [cfg] * len(seeds), seeds))


def run_bench(cfg: ExperimentConfig, out_dir=None) -> BenchResult:
    """Run every seed, cut per-rule records, and optionally write outputs."""
    records = [rec for shared in _shared_runs(cfg) for rec in rule_records(cfg, shared)]
    records.sort(key=lambda r: (r.rule.name, r.seed))
    runs = [run_row(r) for r in records]
    result = BenchResult(cfg, records, summarize(runs, cfg.budget))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "iterations.csv", ITERATION_COLUMNS,
                   [row for r in records for row in iteration_rows(r)])
        _write_csv(out / "runs.csv", RUN_COLUMNS, runs)
        with open(out / "summary.json", "w") as fh:
            json.dump({"config": cfg.as_dict(), "rules": result.summary}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        result.out_dir = out
    return result


def run_sweep(cfg: ExperimentConfig, out_dir):
    """Bench over the B x delta grid; one subdirectory per cell plus sweep.csv."""
    Bs = cfg.sweep_B or (cfg.a,)
    deltas = cfg.sweep_delta or (cfg.delta,)
    out = Path(out_dir)
    cells = []
    for B in Bs:
        for delta in deltas:
            cell = cfg.with_calibration(B=B, delta=delta)
            res = run_bench(cell, out / f"B{B:g}_delta{delta:g}")
            for rule, stats in res.summary.items():
                cells.append({"B": B, "delta": delta, "rule": rule, **stats})
    columns = ("B", "delta", "rule", "runs", "failed", "mean_stop_iteration", "stopped_before_budget",
               "success_rate", "mean_final_regret", "mean_stoptest_ms")
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep.csv", columns, cells)
    return cells

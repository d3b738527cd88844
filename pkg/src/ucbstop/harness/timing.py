"""Per-rule stop-test overhead relative to the cost of one BO iteration.

Stop tests are timed with a monotonic clock around the test call only. The
baseline is the time of the BO step itself (acquisition maximization,
objective evaluation and GP refit). ``share = test / (test + baseline)``.
Rules decided without an online test (NoStop, Oracle_r) cost 0 by definition.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

from .bench import _shared_runs, rule_records
from .config import ExperimentConfig

__all__ = ["OVERHEAD_COLUMNS", "overhead_rows", "time_overhead"]

OVERHEAD_COLUMNS = ("rule", "checks", "stoptest_ms", "iteration_ms", "share")


def _mean(vals):
    return math.fsum(vals) / len(vals) if vals else 0.0


def overhead_rows(records):
    """One row per rule, pooling every check and every BO step over seeds."""
    rows = []
    for name in sorted({r.rule.name for r in records}):
        mine = [r for r in records if r.rule.name == name and r.status == "ok"]
        checks = [it.times_ms[name] for r in mine for it in r.iterations if name in it.times_ms]
        steps = [it.loop_ms for r in mine for it in r.iterations if not it.initial]
        test, base = _mean(checks), _mean(steps)
        rows.append({"rule": name, "checks": len(checks), "stoptest_ms": test, "iteration_ms": base,
                     "share": test / (test + base) if test + base > 0 else 0.0})
    return rows


def time_overhead(cfg: ExperimentConfig, out_path=None):
    records = [rec for shared in _shared_runs(cfg) for rec in rule_records(cfg, shared)]
    rows = overhead_rows(records)
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(OVERHEAD_COLUMNS)
            for row in rows:
                w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in OVERHEAD_COLUMNS])
    return rows

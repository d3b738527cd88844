"""Command-line entry point.

    ucbstop bounds-table --preset table1 [--out rows.csv]
    ucbstop bounds-table --d 2 --delta 0.1 --t 1 --c1 0
    ucbstop bench --config rosenbrock4d --seeds 10 [--workers 4] [--out DIR] [--sweep]
    ucbstop time-overhead --config rosenbrock4d --seeds 3

Exit codes: 0 on success, 2 on any configuration error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from .. import _core
from ..certify import ConfigurationError, ProblemConstants
from .bench import run_bench, run_sweep
from .config import load_config
from .tables import PRESETS, TABLE_COLUMNS, bounds_table, preset
from .timing import OVERHEAD_COLUMNS, time_overhead


def _c1_arg(text):
    return text if text == "floor" else float(text)


def _num(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def _print_table(rows, columns, out=None):
    out = out or sys.stdout
    cells = [[_num(r[c]) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    print("  ".join(c.rjust(w) for c, w in zip(columns, widths)), file=out)
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)), file=out)


def cmd_bounds_table(args):
    if args.preset:
        consts, ts, c1s = preset(args.preset)
    else:
        consts = ProblemConstants(d=args.d, r=args.r, a=args.a, b=args.b, sigma=args.sigma,
                                  delta=args.delta, n_lip=args.n_lip)
        ts, c1s = (20, 100, 500), ("floor", 1e-2, 1e-1)
    ts = args.t or ts
    c1s = args.c1 or c1s
    rows = [r.as_dict() for r in bounds_table(consts, ts, c1s)]
    columns = [c for c in TABLE_COLUMNS if c != "error"]
    _print_table(rows, columns)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TABLE_COLUMNS)
            for r in rows:
                w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in TABLE_COLUMNS])
    failed = [r for r in rows if r["error"]]
    for r in failed:
        print(f"error at t={r['t']}, c1={r['c1']:g}: {r['error']}", file=sys.stderr)
    return 2 if failed else 0


def _experiment(args):
    cfg = load_config(args.config, args.set)
    kw = {}
    if args.seeds is not None:
        kw["seeds"] = tuple(range(args.seeds))
    if args.workers is not None:
        kw["workers"] = args.workers
    return replace(cfg, **kw) if kw else cfg


def cmd_bench(args):
    cfg = _experiment(args)
    out = Path(args.out or cfg.output_dir)
    if args.sweep:
        cells = run_sweep(cfg, out)
        _print_table(cells, ["B", "delta", "rule", "mean_stop_iteration", "success_rate",
                             "mean_final_regret", "mean_stoptest_ms", "failed"])
        return 0
    res = run_bench(cfg, out)
    rows = [{"rule": k, **v} for k, v in res.summary.items()]
    _print_table(rows, ["rule", "runs", "failed", "mean_stop_iteration", "stopped_before_budget",
                        "success_rate", "mean_final_regret", "mean_stoptest_ms"])
    print(f"wrote {out / 'iterations.csv'}, {out / 'runs.csv'}, {out / 'summary.json'}")
    return 0


def cmd_time_overhead(args):
    cfg = _experiment(args)
    out = Path(args.out) if args.out else Path(cfg.output_dir) / "overhead.csv"
    rows = time_overhead(cfg, out)
    _print_table(rows, list(OVERHEAD_COLUMNS))
    print(f"kernel backend: {_core.BACKEND}; wrote {out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ucbstop", description="GP-UCB stopping certificates and benchmarks")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("bounds-table", help="tightened vs classic bound on a (t, c1) grid")
    t.add_argument("--preset", choices=sorted(PRESETS))
    t.add_argument("--d", type=int, default=2)
    t.add_argument("--delta", type=float, default=0.1)
    t.add_argument("--n-lip", type=float, default=10.0)
    t.add_argument("--a", type=float, default=1.0)
    t.add_argument("--b", type=float, default=1.0)
    t.add_argument("--r", type=float, default=1.0)
    t.add_argument("--sigma", type=float, default=0.01)
    t.add_argument("--t", type=int, nargs="+", help="iterations (default 20 100 500)")
    t.add_argument("--c1", type=_c1_arg, nargs="+", help='posterior std values, or "floor"')
    t.add_argument("--out", help="also write rows as CSV")
    t.set_defaults(func=cmd_bounds_table)

    for name, func, helptext in (("bench", cmd_bench, "multi-seed stopping-rule benchmark"),
                                 ("time-overhead", cmd_time_overhead, "per-rule stop-test cost")):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("--config", required=True, help="INI path or bundled config name")
        c.add_argument("--seeds", type=int, help="use seeds 0..N-1")
        c.add_argument("--workers", type=int)
        c.add_argument("--out", help="output directory (bench) or CSV path (time-overhead)")
        c.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a config value; repeatable")
        if name == "bench":
            c.add_argument("--sweep", action="store_true", help="run the [sweep] B x delta grid")
        c.set_defaults(func=func)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_core.py [--repeat 5]

Times the scalar normal CDF, the quantile, and the full subproblem solve on
a spread of certificate inputs, and checks that both backends agree.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from ucbstop import _core
from ucbstop.certify import ProblemConstants, compute_beta, variance_floor


def _best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _cases():
    rng = np.random.default_rng(0)
    out = []
    for _ in range(40):
        c = ProblemConstants(d=int(rng.integers(1, 7)), delta=float(rng.uniform(0.01, 0.3)),
                             a=float(rng.uniform(1, 3)), b=float(rng.uniform(1, 3)))
        t = int(rng.integers(2, 1000))
        c2 = variance_floor(t, c.sigma)
        c1 = float(c2 * 10 ** rng.uniform(0, 3))
        out.append((t, c1, c2, math.sqrt(compute_beta(t, c)), c.budget, c.log_disc_coef, c.d, c.eps_b))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    mods = _core.backends()
    if "compiled" not in mods:
        print("compiled extension not built; only the Python backend is available")

    xs = np.linspace(-10, 10, 20000).tolist()
    ps = np.logspace(-12, math.log10(0.5), 20000).tolist()
    cases = _cases()
    work = {
        "norm_cdf x20000": lambda m: [m.norm_cdf(x) for x in xs],
        "norm_ppf x20000": lambda m: [m.norm_ppf(q) for q in ps],
        "solve_subproblem x40": lambda m: [m.solve_subproblem(*c) for c in cases],
    }

    print(f"{'kernel':<22}" + "".join(f"{name:>14}" for name in mods) + f"{'speedup':>10}")
    for label, fn in work.items():
        secs = {name: _best_of(lambda: fn(m), args.repeat) for name, m in mods.items()}
        row = f"{label:<22}" + "".join(f"{secs[n] * 1e3:>11.2f} ms" for n in mods)
        if "compiled" in secs:
            row += f"{secs['python'] / secs['compiled']:>9.1f}x"
        print(row)

    if "compiled" in mods:
        worst = 0.0
        for c in cases:
            a = mods["python"].solve_subproblem(*c)[6]
            b = mods["compiled"].solve_subproblem(*c)[6]
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
        print(f"max relative objective difference between backends: {worst:.2e}")


if __name__ == "__main__":
    main()

"""Deterministic tables comparing the tightened and classic bounds.

Each row evaluates one certificate at a given (t, c1). ``c1 = "floor"``
means c1 equals the variance floor c2(t), the smallest posterior standard
deviation any GP fit can produce.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..certify import (
    ConfigurationError,
    ProblemConstants,
    classic_bound,
    compute_beta,
    solve_subproblem,
    tightened_bound,
    variance_floor,
)

__all__ = ["TableRow", "PRESETS", "preset", "bounds_table", "TABLE_COLUMNS"]

_T = (20, 100, 500)
_C1 = ("floor", 1e-2, 1e-1)

PRESETS = {
    "table1": dict(d=4, n_lip=4.0, delta=0.1),
    "table4": dict(d=2, n_lip=10.0, delta=0.1),
    "table5": dict(d=2, n_lip=4.0, delta=0.01),
    "table6": dict(d=6, n_lip=10.0, delta=0.01),
}


def preset(name):
    """(constants, t values, c1 values) for a named table; sigma = 0.01, a = b = r = 1."""
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    return ProblemConstants(sigma=0.01, **PRESETS[name]), _T, _C1


TABLE_COLUMNS = ("t", "c1", "c2", "sqrt_beta", "sqrt_eta", "sqrt_alpha", "s", "n_eta", "n_alpha",
                 "bound_new", "bound_old", "ratio", "error")


@dataclass(frozen=True)
class TableRow:
    """One (t, c1) comparison. ``bound_old`` is the classic bound without
    its 1/t^2 term; ``ratio`` is bound_new / bound_old (nan when bound_old is 0)."""

    t: int
    c1: float
    c2: float = math.nan
    sqrt_beta: float = math.nan
    sqrt_eta: float = math.nan
    sqrt_alpha: float = math.nan
    s: float = math.nan
    n_eta: float = math.nan
    n_alpha: float = math.nan
    bound_new: float = math.nan
    bound_old: float = math.nan
    bound_old_full: float = math.nan
    ratio: float = math.nan
    error: str = ""

    def as_dict(self):
        return asdict(self)


def _row(t, c1_spec, consts):
    c2 = variance_floor(t, consts.sigma)
    c1 = c2 if c1_spec == "floor" else float(c1_spec)
    try:
        beta = compute_beta(t, consts)
        sol = solve_subproblem(t, c1, c2, beta, consts)
    except (ConfigurationError, ValueError) as exc:
        return TableRow(t=t, c1=c1, c2=c2, error=str(exc))
    new = max(0.0, tightened_bound(t, c1, c2, beta, sol))
    full, table = classic_bound(t, c1, beta)
    return TableRow(t=t, c1=c1, c2=c2, sqrt_beta=math.sqrt(beta), sqrt_eta=sol.sqrt_eta,
                    sqrt_alpha=sol.sqrt_alpha, s=sol.s, n_eta=sol.n_eta, n_alpha=sol.n_alpha,
                    bound_new=new, bound_old=table, bound_old_full=full,
                    ratio=new / table if table > 0 else math.nan)


def bounds_table(consts: ProblemConstants, ts=_T, c1s=_C1):
    """Rows in t-major order. Per-row failures are reported in ``error``."""
    return [_row(int(t), c1, consts) for t in ts for c1 in c1s]

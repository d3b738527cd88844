"""Upper-confidence-bound acquisition and its maximization over a box."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .gp import GpPosterior

__all__ = ["AcquisitionQuery", "AcquisitionResult", "ucb_value", "ucb_values", "sobol_probe",
           "maximize_acquisition"]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AcquisitionQuery:
    """UCB weight plus the search box and effort limits.

    The probe is 2**probe_exponent scrambled Sobol points; the best
    ``n_starts`` of them and every observed input seed local refinement,
    each capped at ``max_evals`` acquisition evaluations.
    """

    beta: float
    lower: np.ndarray
    upper: np.ndarray
    probe_exponent: int = 10
    n_starts: int = 16
    max_evals: int = 200
    line_steps: int = 6
    initial_step: float = 0.1

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be finite and nonnegative, got {self.beta!r}")
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or not np.all(hi > lo):
            raise ValueError("box must be nonempty with lower < upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit_cube(cls, beta, d, **kw):
        return cls(beta, np.zeros(d), np.ones(d), **kw)

    @property
    def dim(self):
        return self.lower.size


@dataclass(frozen=True)
class AcquisitionResult:
    x: np.ndarray
    value: float
    sigma: float


def ucb_values(gp: GpPosterior, beta, X):
    mean, var = gp.predict(X)
    return mean + math.sqrt(beta) * np.sqrt(var)


def ucb_value(gp: GpPosterior, beta, x):
    """mu(x) + sqrt(beta) * sigma(x) at a single point."""
    return float(ucb_values(gp, beta, np.asarray(x, dtype=float).reshape(1, -1))[0])


def sobol_probe(query: AcquisitionQuery, seed):
    unit = qmc.Sobol(query.dim, scramble=True, seed=seed).random_base2(query.probe_exponent)
    return query.lower + unit * (query.upper - query.lower)


def _refine(f, X, fx, query: AcquisitionQuery):
    """Batched projected coordinate-wise golden-section ascent.

    Every start follows the same schedule (coordinate, bracket half-width),
    so each golden step is one vectorized call to ``f``. A move is kept only
    where it improves on the current value.
    """
    X = X.copy()
    fx = fx.copy()
    lo, hi = query.lower, query.upper
    step = query.initial_step * (hi - lo)
    per_line = query.line_steps + 2
    evals = 0
    while evals + per_line <= query.max_evals:
        for j in range(query.dim):
            if evals + per_line > query.max_evals:
                break
            a = np.maximum(X[:, j] - step[j], lo[j])
            b = np.minimum(X[:, j] + step[j], hi[j])
            c = b - _INV_PHI * (b - a)
            d = a + _INV_PHI * (b - a)
            Xc, Xd = X.copy(), X.copy()
            Xc[:, j], Xd[:, j] = c, d
            fc, fd = f(Xc), f(Xd)
            best_x = np.where(fc >= fd, c, d)
            best_f = np.maximum(fc, fd)
            for _ in range(query.line_steps):
                left = fc >= fd  # maximum lies in [a, d]
                b = np.where(left, d, b)
                a = np.where(left, a, c)
                new = np.where(left, b - _INV_PHI * (b - a), a + _INV_PHI * (b - a))
                Xn = X.copy()
                Xn[:, j] = new
                fn = f(Xn)
                c, d = np.where(left, new, d), np.where(left, c, new)
                fc, fd = np.where(left, fn, fd), np.where(left, fc, fn)
                better = fn > best_f
                best_x = np.where(better, new, best_x)
                best_f = np.where(better, fn, best_f)
            evals += per_line
            improve = best_f > fx
            X[improve, j] = best_x[improve]
            fx = np.where(improve, best_f, fx)
        step = step * 0.5
    return X, fx


def maximize_acquisition(gp: GpPosterior, query: AcquisitionQuery, rng_seed) -> AcquisitionResult:
    """Best UCB point found by a Sobol probe plus local refinement.

    Ties are broken toward the lowest start index; starts are ordered as the
    probe ranking (stable, so lowest Sobol index first) followed by the
    observed inputs in observation order.
    """
    f = lambda X: ucb_values(gp, query.beta, X)  # noqa: E731
    probe = sobol_probe(query, rng_seed)
    pv = f(probe)
    top = np.argsort(-pv, kind="stable")[:query.n_starts]
    starts = probe[top]
    sv = pv[top]
    if gp.n:
        obs = np.clip(gp.inputs, query.lower, query.upper)
        starts = np.vstack([starts, obs])
        sv = np.concatenate([sv, f(obs)])
    X, fx = _refine(f, starts, sv, query)
    k = int(np.argmax(fx))
    x = X[k]
    _, var = gp.predict(x.reshape(1, -1))
    return AcquisitionResult(x=x.copy(), value=float(fx[k]), sigma=float(math.sqrt(var[0])))

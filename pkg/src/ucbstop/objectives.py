"""Benchmark objectives on the unit cube, oriented for maximization.

Classical test functions are minimized on their native boxes; here they are
exposed as ``-f(lower + x * (upper - lower))`` for x in [0, 1]^d so that
regret is ``f_star - value``. GP-sampled objectives are drawn with random
Fourier features and have their optimum located numerically at build time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .gp import KernelSpec

__all__ = [
    "Objective",
    "branin",
    "rosenbrock",
    "levy",
    "gp_sample_objective",
    "make_objective",
    "output_std",
    "rescaled",
    "OBJECTIVE_IDS",
]


def branin(x):
    """Branin on [-5, 10] x [0, 15]; minimum 5/(4 pi) at three points."""
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    b = 5.1 / (4.0 * math.pi ** 2)
    c = 5.0 / math.pi
    s = 10.0
    t = 1.0 / (8.0 * math.pi)
    return (x2 - b * x1 ** 2 + c * x1 - 6.0) ** 2 + s * (1.0 - t) * np.cos(x1) + s


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    head, tail = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (tail - head ** 2) ** 2 + (1.0 - head) ** 2, axis=-1)


def levy(x):
    x = np.asarray(x, dtype=float)
    w = 1.0 + (x - 1.0) / 4.0
    first = np.sin(math.pi * w[..., 0]) ** 2
    mid = w[..., :-1]
    middle = np.sum((mid - 1.0) ** 2 * (1.0 + 10.0 * np.sin(math.pi * mid + 1.0) ** 2), axis=-1)
    last = w[..., -1]
    return first + middle + (last - 1.0) ** 2 * (1.0 + np.sin(2.0 * math.pi * last) ** 2)


@dataclass(frozen=True, eq=False)
class Objective:
    """A maximization problem on [0, 1]^dim.

    ``fn`` maps an (n, dim) array of unit-cube points to n values.
    ``x_star`` is a maximizer in unit-cube coordinates.
    """

    id: str
    dim: int
    fn: Callable = field(repr=False)
    f_star: float
    x_star: np.ndarray = field(repr=False)
    lower: np.ndarray = field(default=None, repr=False)
    upper: np.ndarray = field(default=None, repr=False)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        vals = self.fn(np.atleast_2d(X))
        return float(vals[0]) if single else vals

    def to_native(self, X):
        return self.lower + np.asarray(X, dtype=float) * (self.upper - self.lower)

    def regret(self, X):
        return self.f_star - self(X)


def _negated(native, lower, upper):
    lower = np.asarray(lower, dtype=float)
    span = np.asarray(upper, dtype=float) - lower
    return lambda X: -native(lower + X * span)


def _box(lo, hi, d):
    return np.full(d, float(lo)), np.full(d, float(hi))


def _branin_objective():
    lo, hi = np.array([-5.0, 0.0]), np.array([10.0, 15.0])
    x_star = (np.array([math.pi, 2.275]) - lo) / (hi - lo)
    return Objective("branin", 2, _negated(branin, lo, hi), -5.0 / (4.0 * math.pi), x_star, lo, hi)


def _rosenbrock_objective(d=4):
    lo, hi = _box(-2.0, 2.0, d)
    return Objective("rosenbrock", d, _negated(rosenbrock, lo, hi), 0.0, (np.ones(d) - lo) / (hi - lo), lo, hi)


def _levy_objective(d=4):
    lo, hi = _box(-10.0, 10.0, d)
    return Objective("levy", d, _negated(levy, lo, hi), 0.0, (np.ones(d) - lo) / (hi - lo), lo, hi)


@dataclass(frozen=True, eq=False)
class _FourierFunction:
    """x -> sqrt(1/m) * (theta_c . cos(W x) + theta_s . sin(W x))."""

    freqs: np.ndarray
    theta_cos: np.ndarray
    theta_sin: np.ndarray

    def features(self, X):
        proj = np.atleast_2d(X) @ self.freqs.T
        scale = 1.0 / math.sqrt(self.freqs.shape[0])
        return scale * np.cos(proj), scale * np.sin(proj)

    def __call__(self, X, chunk=4096):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0])
        for i in range(0, X.shape[0], chunk):
            c, s = self.features(X[i:i + chunk])
            out[i:i + chunk] = c @ self.theta_cos + s @ self.theta_sin
        return out

    def value_and_grad(self, x):
        proj = self.freqs @ x
        scale = 1.0 / math.sqrt(self.freqs.shape[0])
        cos, sin = np.cos(proj), np.sin(proj)
        val = scale * (self.theta_cos @ cos + self.theta_sin @ sin)
        grad = scale * ((-self.theta_cos * sin + self.theta_sin * cos) @ self.freqs)
        return val, grad


def sample_frequencies(kernel: KernelSpec, d, count, rng):
    """Draw from the kernel's spectral density (unit signal variance)."""
    z = rng.standard_normal((count, d))
    if kernel.family == "se":
        return z / kernel.lengthscale
    # Matern-5/2: multivariate Student-t with 5 degrees of freedom
    g = rng.chisquare(5.0, size=(count, 1))
    return z * np.sqrt(5.0 / g) / kernel.lengthscale


def gp_sample_objective(kernel: KernelSpec, d, seed, feature_count=1024,
                        probe_exponent=15, refine_top=32) -> Objective:
    """A function drawn from an approximate GP prior on [0, 1]^d.

    ``feature_count`` is the number of random frequencies; each contributes
    a cosine and a sine feature. The maximum is located by a scrambled Sobol
    probe of 2**probe_exponent points followed by L-BFGS-B from the best
    ``refine_top`` probes.
    """
    if feature_count < 256:
        raise ValueError("feature_count must be at least 256")
    rng = np.random.default_rng(seed)
    freqs = sample_frequencies(kernel, d, feature_count, rng)
    theta = rng.standard_normal((2, feature_count))
    f = _FourierFunction(freqs, theta[0], theta[1])

    probe = qmc.Sobol(d, scramble=True, seed=seed).random_base2(probe_exponent)
    vals = f(probe)
    order = np.argsort(-vals, kind="stable")[:refine_top]
    best_x, best_v = probe[order[0]].copy(), float(vals[order[0]])
    bounds = [(0.0, 1.0)] * d

    def neg(x):
        v, g = f.value_and_grad(x)
        return -v, -g

    for i in order:
        res = minimize(neg, probe[i], jac=True, method="L-BFGS-B", bounds=bounds)
        x = np.clip(res.x, 0.0, 1.0)
        v = float(f(x)[0])
        if v > best_v:
            best_x, best_v = x, v
    oid = f"gp_{kernel.family}_d{d}_s{seed}"
    return Objective(oid, d, f, best_v, best_x, np.zeros(d), np.ones(d))


OBJECTIVE_IDS = ("branin", "rosenbrock", "levy", "gp_sample")


def output_std(obj: Objective, probe_exponent=16):
    """Standard deviation of the objective over a fixed scrambled Sobol probe."""
    probe = qmc.Sobol(obj.dim, scramble=True, seed=0).random_base2(probe_exponent)
    return float(np.std(obj(probe)))


def rescaled(obj: Objective, scale) -> Objective:
    """The same problem with values divided by ``scale``; regret scales alike."""
    if not (math.isfinite(scale) and scale > 0):
        raise ValueError(f"scale must be positive, got {scale!r}")
    fn = obj.fn
    return Objective(f"{obj.id}/{scale:.6g}", obj.dim, lambda X: fn(X) / scale,
                     obj.f_star / scale, obj.x_star, obj.lower, obj.upper)


def make_objective(name, d=None, seed=0, kernel: KernelSpec | None = None, feature_count=1024,
                   output_scale="raw"):
    """Build a benchmark by id.

    ``output_scale`` is "raw" (native values), "std" (divide by the output
    standard deviation over the box) or a positive number to divide by.
    """
    if name == "branin":
        obj = _branin_objective()
    elif name == "rosenbrock":
        obj = _rosenbrock_objective(d or 4)
    elif name == "levy":
        obj = _levy_objective(d or 4)
    elif name == "gp_sample":
        if kernel is None:
            raise ValueError("gp_sample objectives need a kernel")
        obj = gp_sample_objective(kernel, d or 2, seed, feature_count)
    else:
        raise ValueError(f"unknown objective {name!r}; expected one of {OBJECTIVE_IDS}")
    if output_scale == "raw":
        return obj
    if output_scale == "std":
        return rescaled(obj, output_std(obj))
    return rescaled(obj, float(output_scale))

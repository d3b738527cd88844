"""Exact Gaussian-process regression with unit signal variance.

Kernels are isotropic squared-exponential or Matern-5/2 with k(x, x) = 1.
The posterior is held as a Cholesky factor of K + noise_var*I; hyperparameter
fitting maximizes the log marginal likelihood over the lengthscale only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist

__all__ = [
    "KernelSpec",
    "GpPosterior",
    "GpFitError",
    "JITTER_LADDER",
    "kernel_eval",
    "kernel_matrix",
    "fit",
    "posterior",
    "log_marginal_likelihood",
    "fit_hyperparams",
]

FAMILIES = ("se", "matern52")
JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
_SQRT5 = math.sqrt(5.0)


class GpFitError(RuntimeError):
    """Gram matrix could not be factored at any jitter level."""


@dataclass(frozen=True)
class KernelSpec:
    family: str = "matern52"
    lengthscale: float = 0.2

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not (math.isfinite(self.lengthscale) and self.lengthscale > 0):
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale!r}")


def _from_distance(family, r):
    if family == "se":
        return np.exp(-0.5 * r * r)
    sr = _SQRT5 * r
    return (1.0 + sr + sr * sr / 3.0) * np.exp(-sr)


def kernel_matrix(spec: KernelSpec, X, Y):
    """Cross-covariance between the rows of ``X`` (n, d) and ``Y`` (m, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    r = cdist(X, Y) / spec.lengthscale
    return _from_distance(spec.family, r)


def kernel_eval(spec: KernelSpec, x, x2):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x2))):
        raise ValueError("kernel inputs must be finite")
    r = float(np.linalg.norm(x - x2)) / spec.lengthscale
    return float(_from_distance(spec.family, r))


@dataclass(frozen=True, eq=False)
class GpPosterior:
    """Fitted GP. Immutable; safe to share between readers.

    ``mean_offset`` is a constant prior mean subtracted from the observations
    before conditioning and added back to predictions.
    """

    inputs: np.ndarray
    observations: np.ndarray
    kernel: KernelSpec
    noise_var: float
    dim: int
    mean_offset: float = 0.0
    chol: np.ndarray = field(default=None, repr=False)
    weights: np.ndarray = field(default=None, repr=False)
    jitter: float = 0.0

    @property
    def n(self):
        return len(self.observations)

    def predict(self, Xq):
        """Posterior mean and variance at the rows of ``Xq``."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        if Xq.shape[1] != self.dim:
            raise ValueError(f"query dimension {Xq.shape[1]} != model dimension {self.dim}")
        if self.n == 0:
            m = Xq.shape[0]
            return np.full(m, self.mean_offset), np.ones(m)
        kq = kernel_matrix(self.kernel, self.inputs, Xq)
        mean = self.mean_offset + kq.T @ self.weights
        v = solve_triangular(self.chol, kq, lower=True, check_finite=False)
        var = 1.0 - np.einsum("ij,ij->j", v, v)
        return mean, np.clip(var, 0.0, 1.0)

    def predict_std(self, Xq):
        mean, var = self.predict(Xq)
        return mean, np.sqrt(var)


def _factor(K, noise_var):
    n = K.shape[0]
    eye = np.eye(n)
    for jit in JITTER_LADDER:
        try:
            return cholesky(K + (noise_var + jit) * eye, lower=True, check_finite=False), jit
        except LinAlgError:
            continue
    raise GpFitError(f"Cholesky failed for all jitters {JITTER_LADDER} (n={n}, noise_var={noise_var})")


def fit(inputs, observations, kernel: KernelSpec, noise_var, mean_offset=0.0, dim=None) -> GpPosterior:
    """Condition the GP prior on data. ``dim`` is required only when there is no data."""
    y = np.asarray(observations, dtype=float).reshape(-1)
    if y.size == 0:
        if dim is None:
            X = np.asarray(inputs, dtype=float)
            dim = X.shape[1] if X.ndim == 2 else 1
        return GpPosterior(np.zeros((0, dim)), y, kernel, float(noise_var), int(dim), float(mean_offset))
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    if X.shape[0] != y.size:
        X = X.reshape(y.size, -1)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("inputs and observations must be finite")
    if not noise_var >= 0:
        raise ValueError(f"noise variance must be nonnegative, got {noise_var!r}")
    L, jit = _factor(kernel_matrix(kernel, X, X), noise_var)
    w = cho_solve((L, True), y - mean_offset, check_finite=False)
    return GpPosterior(X.copy(), y.copy(), kernel, float(noise_var), X.shape[1],
                       float(mean_offset), L, w, jit)


def posterior(gp: GpPosterior, x):
    """Mean and variance at a single point."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if not np.all(np.isfinite(x)):
        raise ValueError("query must be finite")
    mean, var = gp.predict(x)
    return float(mean[0]), float(var[0])


def log_marginal_likelihood(gp: GpPosterior):
    """log N(y | mean_offset, K + noise_var*I); 0 for an empty model."""
    if gp.n == 0:
        return 0.0
    r = gp.observations - gp.mean_offset
    return float(-0.5 * r @ gp.weights - np.sum(np.log(np.diag(gp.chol)))
                 - 0.5 * gp.n * math.log(2.0 * math.pi))


def _golden_max(f, a, b, tol):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    best = max((fc, c), (fd, d))
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
            best = max(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
            best = max(best, (fd, d))
    return best


def fit_hyperparams(inputs, observations, family, noise_var, search_space=(0.05, 2.0),
                    n_starts=8, mean_offset=0.0, tol=1e-3) -> KernelSpec:
    """Lengthscale maximizing the log marginal likelihood.

    Starts are log-spaced over ``search_space``; each is refined by
    golden-section ascent in log-lengthscale within the interval spanned by
    its neighbouring starts. Degenerate data (a single distinct input)
    returns the arithmetic midpoint of the search space.
    """
    lo, hi = search_space
    if not (0 < lo < hi):
        raise ValueError(f"invalid search space {search_space!r}")
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(observations, dtype=float).reshape(-1)
    if y.size < 2 or np.all(np.ptp(X, axis=0) == 0):
        return KernelSpec(family, 0.5 * (lo + hi))

    def lml(log_l):
        try:
            gp = fit(X, y, KernelSpec(family, math.exp(log_l)), noise_var, mean_offset)
        except GpFitError:
            return -math.inf
        return log_marginal_likelihood(gp)

    starts = np.linspace(math.log(lo), math.log(hi), n_starts)
    values = [lml(s) for s in starts]
    best = max(zip(values, starts))
    for i, s in enumerate(starts):
        a = starts[max(i - 1, 0)]
        b = starts[min(i + 1, n_starts - 1)]
        # only refine where the start is a local peak among its neighbours
        if values[i] < max(values[max(i - 1, 0)], values[min(i + 1, n_starts - 1)]):
            continue
        best = max(best, _golden_max(lml, a, b, tol))
    return KernelSpec(family, float(math.exp(best[1])))

"""Pure-Python kernels.

Reference implementation of the hot loops: scalar standard-normal CDF,
survival function and quantiles, and the certificate subproblem solver.
``_ckernels.pyx`` mirrors this module line for line; keep them in sync.
"""
import math

import numpy as np
from scipy.special import erfc as _erfc_array

SQRT1_2 = 0.70710678118654752440
INV_SQRT_2PI = 0.39894228040143267794
P_LOW = 0.02425

# Acklam's rational approximation, relative error < 1.15e-9 before refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)

NEWTON_STEPS = 2

# subproblem search settings
GRID = 64
Z_LO = -30.0
Z_HI = 30.0
S_CAP = 20.0
GOLDEN = 0.61803398874989484820
TOL = 1e-10
S_FIXED_T1 = 2.0


def norm_cdf(x):
    if x < 0.0:
        return 0.5 * math.erfc(-x * SQRT1_2)
    return 1.0 - 0.5 * math.erfc(x * SQRT1_2)


def norm_sf(x):
    if x > 0.0:
        return 0.5 * math.erfc(x * SQRT1_2)
    return 1.0 - 0.5 * math.erfc(-x * SQRT1_2)


def norm_pdf(x):
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _lower_guess(p):
    if p < P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def _lower_quantile(p):
    # p in (0, 0.5]; Newton on the lower-tail CDF keeps relative accuracy in the tail
    x = _lower_guess(p)
    for _ in range(NEWTON_STEPS):
        dens = norm_pdf(x)
        if dens == 0.0:
            break
        x -= (norm_cdf(x) - p) / dens
    return x


def norm_ppf(p):
    if p <= 0.5:
        return _lower_quantile(p)
    return -_lower_quantile(1.0 - p)


def norm_isf(q):
    if q <= 0.5:
        return -_lower_quantile(q)
    return _lower_quantile(1.0 - q)


# -- array versions (used by the vectorized grid and by stats on arrays) ----

def norm_cdf_array(x):
    x = np.asarray(x, dtype=float)
    lo = 0.5 * _erfc_array(-x * SQRT1_2)
    return np.where(x < 0.0, lo, 1.0 - 0.5 * _erfc_array(x * SQRT1_2))


def _lower_quantile_array(p):
    p = np.asarray(p, dtype=float)
    tail = p < P_LOW
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.sqrt(-2.0 * np.log(np.where(tail, p, 0.5)))
        xt = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) \
            / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
        qc = p - 0.5
        r = qc * qc
        xc = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * qc \
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
        x = np.where(tail, xt, xc)
        for _ in range(NEWTON_STEPS):
            dens = INV_SQRT_2PI * np.exp(-0.5 * x * x)
            step = (norm_cdf_array(x) - p) / dens
            x = np.where(dens > 0.0, x - step, x)
    return x


def norm_ppf_array(p):
    p = np.asarray(p, dtype=float)
    lower = p <= 0.5
    x = _lower_quantile_array(np.where(lower, p, 1.0 - p))
    return np.where(lower, x, -x)


def norm_isf_array(q):
    q = np.asarray(q, dtype=float)
    lower = q <= 0.5
    x = _lower_quantile_array(np.where(lower, q, 1.0 - q))
    return np.where(lower, -x, x)


# -- certificate subproblem -------------------------------------------------

def _golden(f, a, b, tol):
    """Minimize a unimodal ``f`` on [a, b]; returns the best point evaluated."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = f(c)
    fd = f(d)
    if fc <= fd:
        xbest, fbest = c, fc
    else:
        xbest, fbest = d, fd
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
            if fc < fbest:
                xbest, fbest = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
            if fd < fbest:
                xbest, fbest = d, fd
    return xbest, fbest


class _Subproblem:
    """Reduced two-variable form: budget split ``z`` (log-odds) and exponent ``s``.

    With u = 1/n_eta and v = 1/n_alpha the implicit tail equations give
    sqrt_eta = isf(u / pi_t) and sqrt_alpha = isf(v / (pi_t |D_t|)); the
    objective decreases in both so the budget constraint u + v <= budget is
    active. alpha <= beta becomes v >= pi_t |D_t| sf(sqrt_beta).
    """

    def __init__(self, t, c1, c2, sqrt_beta, budget, log_coef, d, eps_b):
        self.t = t
        self.c1 = c1
        self.c2 = c2
        self.sqrt_beta = sqrt_beta
        self.budget = budget
        self.log_coef = log_coef
        self.d = d
        self.pi_t = math.pi * math.pi * t * t / 6.0
        self.log_t = math.log(t)
        self.tail_beta = norm_sf(sqrt_beta)
        self.sf_eps = norm_sf(eps_b)
        self.n_cap = 1.0 / (1.0 + eps_b)
        self.u_cap = min(self.pi_t * self.sf_eps, self.n_cap)

    def disc(self, s):
        e = self.log_coef + s * self.d * self.log_t
        if e > 700.0:
            return math.inf
        return math.exp(e) + 1.0

    def split(self, s, z):
        """Map (s, z) to (u, v, disc); u <= 0 flags an infeasible exponent."""
        disc = self.disc(s)
        u_hi = min(self.budget - self.pi_t * disc * self.tail_beta, self.u_cap)
        u_lo = max(self.budget - min(self.pi_t * disc * self.sf_eps, self.n_cap), 0.0)
        if not u_hi > u_lo:
            return -1.0, -1.0, disc
        w = 1.0 / (1.0 + math.exp(-z))
        u = u_lo + (u_hi - u_lo) * w
        return u, self.budget - u, disc

    def objective(self, s, z):
        u, v, disc = self.split(s, z)
        if u <= 0.0 or v <= 0.0:
            return math.inf
        se = norm_isf(u / self.pi_t)
        sa = norm_isf(v / (self.pi_t * disc))
        if sa > self.sqrt_beta:
            sa = self.sqrt_beta
        return se * self.c1 + sa * self.c2 + math.exp(-s * self.log_t)

    def s_range(self, eps_b):
        if self.t == 1.0:
            return S_FIXED_T1, S_FIXED_T1
        ratio = self.budget / (self.pi_t * self.tail_beta) - 1.0
        if not ratio > 0.0:
            return eps_b, -1.0
        s_max = (math.log(ratio) - self.log_coef) / (self.d * self.log_t)
        return eps_b, min(s_max, S_CAP)

    def grid_values(self, s_grid, z_grid):
        # vectorized objective over the coarse grid
        s = s_grid[:, None]
        z = z_grid[None, :]
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            e = self.log_coef + s * self.d * self.log_t
            disc = np.where(e > 700.0, np.inf, np.exp(np.minimum(e, 700.0)) + 1.0)
            u_hi = np.minimum(self.budget - self.pi_t * disc * self.tail_beta, self.u_cap)
            u_lo = np.maximum(self.budget - np.minimum(self.pi_t * disc * self.sf_eps, self.n_cap), 0.0)
            w = 1.0 / (1.0 + np.exp(-z))
            u = u_lo + (u_hi - u_lo) * w
            v = self.budget - u
            ok = (u_hi > u_lo) & (u > 0.0) & (v > 0.0)
            se = norm_isf_array(np.where(ok, u / self.pi_t, 0.25))
            sa = norm_isf_array(np.where(ok, v / (self.pi_t * disc), 0.25))
            sa = np.minimum(sa, self.sqrt_beta)
            vals = se * self.c1 + sa * self.c2 + np.exp(-s * self.log_t)
        return np.where(ok, vals, np.inf)

    def profile(self, s):
        return _golden(lambda z: self.objective(s, z), Z_LO, Z_HI, TOL)


def solve_subproblem(t, c1, c2, sqrt_beta, budget, log_coef, d, eps_b):
    """Minimize sqrt_eta*c1 + sqrt_alpha*c2 + t**-s over the feasible set.

    Returns ``(s, u, v, disc, sqrt_eta, sqrt_alpha, objective, fallback)``.
    """
    t = float(t)
    prob = _Subproblem(t, c1, c2, sqrt_beta, budget, log_coef, float(d), eps_b)
    s_lo, s_hi = prob.s_range(eps_b)

    best_s = math.nan
    best_z = math.nan
    best_f = math.inf
    if s_hi >= s_lo:
        if s_hi > s_lo:
            s_grid = s_lo + (s_hi - s_lo) * np.arange(GRID) / (GRID - 1)
        else:
            s_grid = np.array([s_lo])
        z_grid = Z_LO + (Z_HI - Z_LO) * np.arange(GRID) / (GRID - 1)
        vals = prob.grid_values(s_grid, z_grid)
        k = int(np.argmin(vals))
        i, j = divmod(k, GRID)
        if math.isfinite(vals[i, j]):
            best_s = float(s_grid[i])
            best_z = float(z_grid[j])
            best_f = prob.objective(best_s, best_z)
            if s_grid.size > 1:
                a = float(s_grid[max(i - 1, 0)])
                b = float(s_grid[min(i + 1, s_grid.size - 1)])
                s_opt, _ = _golden(lambda s: prob.profile(s)[1], a, b, TOL)
            else:
                s_opt = best_s
            z_opt, f_opt = prob.profile(s_opt)
            if f_opt < best_f:
                best_s, best_z, best_f = s_opt, z_opt, f_opt

    # classic GP-UCB point: alpha = eta = beta, s = 2
    disc2 = prob.disc(2.0)
    u_c = prob.pi_t * prob.tail_beta
    v_c = prob.pi_t * disc2 * prob.tail_beta
    f_c = sqrt_beta * (c1 + c2) + math.exp(-2.0 * prob.log_t)
    classic_ok = u_c + v_c <= budget and u_c <= prob.u_cap

    if math.isfinite(best_f) and not (classic_ok and f_c < best_f):
        u, v, disc = prob.split(best_s, best_z)
        se = norm_isf(u / prob.pi_t)
        sa = min(norm_isf(v / (prob.pi_t * disc)), sqrt_beta)
        return best_s, u, v, disc, se, sa, best_f, False
    return 2.0, u_c, v_c, disc2, sqrt_beta, sqrt_beta, f_c, not classic_ok

# cython: language_level=3
"""Compiled kernels; a line-for-line port of ``_pykernels``."""
from libc.math cimport erfc, exp, log, sqrt, INFINITY, NAN, isfinite

cdef double SQRT1_2 = 0.70710678118654752440
cdef double INV_SQRT_2PI = 0.39894228040143267794
cdef double P_LOW = 0.02425
cdef double PI = 3.14159265358979323846

cdef double A0 = -3.969683028665376e+01, A1 = 2.209460984245205e+02, A2 = -2.759285104469687e+02
cdef double A3 = 1.383577518672690e+02, A4 = -3.066479806614716e+01, A5 = 2.506628277459239e+00
cdef double B0 = -5.447609879822406e+01, B1 = 1.615858368580409e+02, B2 = -1.556989798598866e+02
cdef double B3 = 6.680131188771972e+01, B4 = -1.328068155288572e+01
cdef double C0 = -7.784894002430293e-03, C1 = -3.223964580411365e-01, C2 = -2.400758277161838e+00
cdef double C3 = -2.549732539343734e+00, C4 = 4.374664141464968e+00, C5 = 2.938163982698783e+00
cdef double D0 = 7.784695709041462e-03, D1 = 3.224671290700398e-01, D2 = 2.445134137142996e+00
cdef double D3 = 3.754408661907416e+00

cdef enum:
    NEWTON_STEPS = 2
    GRID = 64

cdef double Z_LO = -30.0
cdef double Z_HI = 30.0
cdef double S_CAP = 20.0
cdef double GOLDEN = 0.61803398874989484820
cdef double TOL = 1e-10
cdef double S_FIXED_T1 = 2.0


cdef inline double _cdf(double x) noexcept nogil:
    if x < 0.0:
        return 0.5 * erfc(-x * SQRT1_2)
    return 1.0 - 0.5 * erfc(x * SQRT1_2)


cdef inline double _sf(double x) noexcept nogil:
    if x > 0.0:
        return 0.5 * erfc(x * SQRT1_2)
    return 1.0 - 0.5 * erfc(-x * SQRT1_2)


cdef inline double _pdf(double x) noexcept nogil:
    return INV_SQRT_2PI * exp(-0.5 * x * x)


cdef inline double _lower_guess(double p) noexcept nogil:
    cdef double q, r
    if p < P_LOW:
        q = sqrt(-2.0 * log(p))
        return ((((((C0 * q + C1) * q + C2) * q + C3) * q + C4) * q + C5)
                / ((((D0 * q + D1) * q + D2) * q + D3) * q + 1.0))
    q = p - 0.5
    r = q * q
    return ((((((A0 * r + A1) * r + A2) * r + A3) * r + A4) * r + A5) * q
            / (((((B0 * r + B1) * r + B2) * r + B3) * r + B4) * r + 1.0))


cdef inline double _lower_quantile(double p) noexcept nogil:
    cdef double x = _lower_guess(p)
    cdef double dens
    cdef int k
    for k in range(NEWTON_STEPS):
        dens = _pdf(x)
        if dens == 0.0:
            break
        x -= (_cdf(x) - p) / dens
    return x


cdef inline double _isf(double q) noexcept nogil:
    if q <= 0.5:
        return -_lower_quantile(q)
    return _lower_quantile(1.0 - q)


cpdef double norm_cdf(double x):
    return _cdf(x)


cpdef double norm_sf(double x):
    return _sf(x)


cpdef double norm_pdf(double x):
    return _pdf(x)


cpdef double norm_ppf(double p):
    if p <= 0.5:
        return _lower_quantile(p)
    return -_lower_quantile(1.0 - p)


cpdef double norm_isf(double q):
    return _isf(q)


cdef struct Prob:
    double t, c1, c2, sqrt_beta, budget, log_coef, d
    double pi_t, log_t, tail_beta, sf_eps, n_cap, u_cap


cdef inline double _disc(Prob* P, double s) noexcept nogil:
    cdef double e = P.log_coef + s * P.d * P.log_t
    if e > 700.0:
        return INFINITY
    return exp(e) + 1.0


cdef inline void _split(Prob* P, double s, double z, double* u, double* v, double* disc) noexcept nogil:
    cdef double dsz = _disc(P, s)
    cdef double u_hi = P.budget - P.pi_t * dsz * P.tail_beta
    cdef double u_lo, w, m
    if P.u_cap < u_hi:
        u_hi = P.u_cap
    m = P.pi_t * dsz * P.sf_eps
    if P.n_cap < m:
        m = P.n_cap
    u_lo = P.budget - m
    if u_lo < 0.0:
        u_lo = 0.0
    disc[0] = dsz
    if not u_hi > u_lo:
        u[0] = -1.0
        v[0] = -1.0
        return
    w = 1.0 / (1.0 + exp(-z))
    u[0] = u_lo + (u_hi - u_lo) * w
    v[0] = P.budget - u[0]


cdef inline double _objective(Prob* P, double s, double z) noexcept nogil:
    cdef double u, v, disc, se, sa
    _split(P, s, z, &u, &v, &disc)
    if u <= 0.0 or v <= 0.0:
        return INFINITY
    se = _isf(u / P.pi_t)
    sa = _isf(v / (P.pi_t * disc))
    if sa > P.sqrt_beta:
        sa = P.sqrt_beta
    return se * P.c1 + sa * P.c2 + exp(-s * P.log_t)


cdef void _profile(Prob* P, double s, double* zbest, double* fbest) noexcept nogil:
    # golden section over z at fixed s
    cdef double a = Z_LO, b = Z_HI
    cdef double c = b - GOLDEN * (b - a)
    cdef double d = a + GOLDEN * (b - a)
    cdef double fc = _objective(P, s, c)
    cdef double fd = _objective(P, s, d)
    if fc <= fd:
        zbest[0] = c
        fbest[0] = fc
    else:
        zbest[0] = d
        fbest[0] = fd
    while b - a > TOL:
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - GOLDEN * (b - a)
            fc = _objective(P, s, c)
            if fc < fbest[0]:
                zbest[0] = c
                fbest[0] = fc
        else:
            a = c
            c = d
            fc = fd
            d = a + GOLDEN * (b - a)
            fd = _objective(P, s, d)
            if fd < fbest[0]:
                zbest[0] = d
                fbest[0] = fd


cdef double _outer(Prob* P, double a, double b) noexcept nogil:
    # golden section over s on the profile
    cdef double zz, fc, fd, xbest, fbest
    cdef double c = b - GOLDEN * (b - a)
    cdef double d = a + GOLDEN * (b - a)
    _profile(P, c, &zz, &fc)
    _profile(P, d, &zz, &fd)
    if fc <= fd:
        xbest = c
        fbest = fc
    else:
        xbest = d
        fbest = fd
    while b - a > TOL:
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - GOLDEN * (b - a)
            _profile(P, c, &zz, &fc)
            if fc < fbest:
                xbest = c
                fbest = fc
        else:
            a = c
            c = d
            fc = fd
            d = a + GOLDEN * (b - a)
            _profile(P, d, &zz, &fd)
            if fd < fbest:
                xbest = d
                fbest = fd
    return xbest


def solve_subproblem(double t, double c1, double c2, double sqrt_beta,
                     double budget, double log_coef, double d, double eps_b):
    """Minimize sqrt_eta*c1 + sqrt_alpha*c2 + t**-s over the feasible set.

    Returns ``(s, u, v, disc, sqrt_eta, sqrt_alpha, objective, fallback)``.
    """
    cdef Prob P
    cdef double s_lo, s_hi, ratio, val, best_s = NAN, best_z = NAN, best_f = INFINITY
    cdef double s_opt, z_opt, f_opt, a, b, u, v, disc, se, sa
    cdef double disc2, u_c, v_c, f_c
    cdef double s_grid[GRID]
    cdef double z_grid[GRID]
    cdef int i, j, n_s, bi = 0
    cdef bint classic_ok

    P.t = t
    P.c1 = c1
    P.c2 = c2
    P.sqrt_beta = sqrt_beta
    P.budget = budget
    P.log_coef = log_coef
    P.d = d
    P.pi_t = PI * PI * t * t / 6.0
    P.log_t = log(t)
    P.tail_beta = _sf(sqrt_beta)
    P.sf_eps = _sf(eps_b)
    P.n_cap = 1.0 / (1.0 + eps_b)
    P.u_cap = P.pi_t * P.sf_eps
    if P.n_cap < P.u_cap:
        P.u_cap = P.n_cap

    if t == 1.0:
        s_lo = S_FIXED_T1
        s_hi = S_FIXED_T1
    else:
        ratio = budget / (P.pi_t * P.tail_beta) - 1.0
        if not ratio > 0.0:
            s_lo = eps_b
            s_hi = -1.0
        else:
            s_lo = eps_b
            s_hi = (log(ratio) - log_coef) / (d * P.log_t)
            if s_hi > S_CAP:
                s_hi = S_CAP

    with nogil:
        if s_hi >= s_lo:
            n_s = GRID if s_hi > s_lo else 1
            for i in range(n_s):
                s_grid[i] = s_lo + (s_hi - s_lo) * i / (GRID - 1) if n_s > 1 else s_lo
            for j in range(GRID):
                z_grid[j] = Z_LO + (Z_HI - Z_LO) * j / (GRID - 1)
            for i in range(n_s):
                for j in range(GRID):
                    val = _objective(&P, s_grid[i], z_grid[j])
                    if val < best_f:
                        best_f = val
                        best_s = s_grid[i]
                        best_z = z_grid[j]
                        bi = i
            if isfinite(best_f):
                if n_s > 1:
                    a = s_grid[bi - 1] if bi > 0 else s_grid[0]
                    b = s_grid[bi + 1] if bi < n_s - 1 else s_grid[n_s - 1]
                    s_opt = _outer(&P, a, b)
                else:
                    s_opt = best_s
                _profile(&P, s_opt, &z_opt, &f_opt)
                if f_opt < best_f:
                    best_s = s_opt
                    best_z = z_opt
                    best_f = f_opt

    disc2 = _disc(&P, 2.0)
    u_c = P.pi_t * P.tail_beta
    v_c = P.pi_t * disc2 * P.tail_beta
    f_c = sqrt_beta * (c1 + c2) + exp(-2.0 * P.log_t)
    classic_ok = u_c + v_c <= budget and u_c <= P.u_cap

    if isfinite(best_f) and not (classic_ok and f_c < best_f):
        _split(&P, best_s, best_z, &u, &v, &disc)
        se = _isf(u / P.pi_t)
        sa = _isf(v / (P.pi_t * disc))
        if sa > sqrt_beta:
            sa = sqrt_beta
        return best_s, u, v, disc, se, sa, best_f, False
    return 2.0, u_c, v_c, disc2, sqrt_beta, sqrt_beta, f_c, not classic_ok

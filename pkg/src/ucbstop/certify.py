"""Instantaneous-regret certificates for GP-UCB.

At iteration ``t`` the certificate bounds f(x*) - f(x_t) using the posterior
standard deviation at the query (``c1``) and the universal floor on posterior
standard deviation (``c2``). The bound comes from a small three-variable
program that splits the failure probability between the query point and a
discretization of the domain; see :func:`solve_subproblem`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from . import _core

__all__ = [
    "ConfigurationError",
    "ProblemConstants",
    "SubproblemSolution",
    "BoundCertificate",
    "Verdict",
    "compute_beta",
    "variance_floor",
    "discretization_size",
    "solve_subproblem",
    "tightened_bound",
    "classic_bound",
    "make_certificate",
]


class ConfigurationError(ValueError):
    """Constants for which the confidence schedule is undefined."""


class Verdict(str, enum.Enum):
    STOP = "stop"
    CONTINUE = "continue"


@dataclass(frozen=True)
class ProblemConstants:
    """Fixed quantities entering beta_t, |D_t| and the subproblem.

    ``r`` is the box edge, ``a`` and ``b`` the Lipschitz tail constants,
    ``n_lip`` the share of the failure budget reserved for the Lipschitz
    event (probability delta/n_lip), and ``eps_b`` the lower-bound
    relaxation keeping the confidence widths and allocations away from 0 and 1.
    """

    d: int
    r: float = 1.0
    a: float = 1.0
    b: float = 1.0
    sigma: float = 0.01
    delta: float = 0.1
    n_lip: float = 10.0
    eps_b: float = 1e-6

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConfigurationError(f"d must be a positive integer, got {self.d!r}")
        for name in ("r", "a", "b", "eps_b"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ConfigurationError(f"{name} must be positive and finite, got {val!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ConfigurationError(f"sigma must be nonnegative, got {self.sigma!r}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigurationError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (self.n_lip > 1.0):
            raise ConfigurationError(f"n_lip must exceed 1, got {self.n_lip!r}")
        if not (self.n_lip * self.d * self.a / self.delta > 1.0):
            raise ConfigurationError("n_lip*d*a/delta must exceed 1")
        if math.log(self.n_lip * self.d * self.a / self.delta) <= 0.0:
            raise ConfigurationError("log(n_lip*d*a/delta) must be positive")

    @property
    def budget(self):
        """Probability left for the two confidence events: delta(1 - 1/n_lip)."""
        return self.delta * (1.0 - 1.0 / self.n_lip)

    @property
    def log_disc_coef(self):
        # log of (rdb)^d * log(n_lip d a / delta)^(d/2)
        d = self.d
        return d * math.log(self.r * d * self.b) + 0.5 * d * math.log(
            math.log(self.n_lip * d * self.a / self.delta))


@dataclass(frozen=True)
class SubproblemSolution:
    sqrt_eta: float
    sqrt_alpha: float
    s: float
    n_eta: float
    n_alpha: float
    disc_size: float
    objective: float
    fallback: bool = False


@dataclass(frozen=True)
class BoundCertificate:
    t: int
    c1: float
    c2: float
    beta: float
    solution: SubproblemSolution
    tightened_bound: float
    classic_bound_full: float
    classic_bound_table: float
    verdict: Verdict

    @property
    def sqrt_beta(self):
        return math.sqrt(self.beta)

    def as_record(self):
        """Flat dict for CSV/JSON emission."""
        rec = {k: v for k, v in asdict(self).items() if k != "solution"}
        rec.update({f"sol_{k}": v for k, v in asdict(self.solution).items()})
        rec["verdict"] = self.verdict.value
        return rec


def _check_t(t):
    if not (t >= 1):
        raise ValueError(f"iteration index must be >= 1, got {t!r}")


def compute_beta(t, consts: ProblemConstants):
    """UCB exploration weight beta_t (squared scale).

    beta_t = 2 log(4 pi_t / delta) + 4 d log(d t b r sqrt(log(4 d a / delta))),
    pi_t = pi^2 t^2 / 6.
    """
    _check_t(t)
    c = consts
    pi_t = math.pi ** 2 * t * t / 6.0
    inner = 4.0 * c.d * c.a / c.delta
    if inner <= 1.0:
        raise ConfigurationError(f"log argument 4da/delta = {inner:.6g} must exceed 1")
    arg = c.d * t * c.b * c.r * math.sqrt(math.log(inner))
    if arg <= 1.0:
        raise ConfigurationError(
            f"beta_t undefined: d*t*b*r*sqrt(log(4da/delta)) = {arg:.6g} <= 1 at t={t}")
    return 2.0 * math.log(4.0 * pi_t / c.delta) + 4.0 * c.d * math.log(arg)


def variance_floor(t, sigma):
    """Lower bound sigma*sqrt(1/(t + sigma^2)) on any posterior std after t observations."""
    _check_t(t)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return sigma * math.sqrt(1.0 / (t + sigma * sigma))


def discretization_size(t, s, consts: ProblemConstants):
    """Continuous |D_t| = (rdb)^d log(n_lip d a / delta)^(d/2) t^(s d) + 1."""
    _check_t(t)
    if not s > 0:
        raise ValueError(f"exponent s must be positive, got {s!r}")
    return math.exp(consts.log_disc_coef + s * consts.d * math.log(t)) + 1.0


def solve_subproblem(t, c1, c2, beta, consts: ProblemConstants) -> SubproblemSolution:
    """Minimize sqrt(eta) c1 + sqrt(alpha) c2 + t^-s.

    Feasible set: 1/n_eta + 1/n_alpha <= delta(1 - 1/n_lip), alpha <= beta,
    and the tail equations pi_t n_eta Phibar(sqrt eta) = 1,
    pi_t n_alpha |D_t(s)| Phibar(sqrt alpha) = 1.

    Substituting u = 1/n_eta, v = 1/n_alpha leaves a search over the budget
    split and ``s``; a 64x64 grid locates the basin and nested golden-section
    search refines it. If the classic point (alpha = eta = beta, s = 2) is
    feasible and no worse it is returned instead, so the bound built on the
    solution never exceeds the classic one. ``fallback`` is set when the
    search found nothing feasible and the classic point is returned as is.
    """
    _check_t(t)
    for name, val in (("c1", c1), ("c2", c2)):
        if not (math.isfinite(val) and val >= 0):
            raise ValueError(f"{name} must be finite and nonnegative, got {val!r}")
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive, got {beta!r}")
    s, u, v, disc, se, sa, obj, fallback = _core.solve_subproblem(
        float(t), float(c1), float(c2), math.sqrt(beta), consts.budget,
        consts.log_disc_coef, float(consts.d), consts.eps_b)
    return SubproblemSolution(
        sqrt_eta=se, sqrt_alpha=sa, s=s, n_eta=1.0 / u, n_alpha=1.0 / v,
        disc_size=disc, objective=obj, fallback=bool(fallback))


def tightened_bound(t, c1, c2, beta, sol: SubproblemSolution):
    """(sqrt beta + sqrt eta) c1 - (sqrt beta - sqrt alpha) c2 + t^-s."""
    sb = math.sqrt(beta)
    return (sb + sol.sqrt_eta) * c1 - (sb - sol.sqrt_alpha) * c2 + t ** (-sol.s)


def classic_bound(t, c1, beta):
    """Classic GP-UCB bound as ``(full, table_variant)``.

    ``full`` is 2 sqrt(beta) c1 + 1/t^2; ``table_variant`` drops the 1/t^2
    term, the convention used when tabulating bound ratios.
    """
    _check_t(t)
    table = 2.0 * math.sqrt(beta) * c1
    return table + 1.0 / (t * t), table


def make_certificate(t, c1, consts: ProblemConstants, epsilon) -> BoundCertificate:
    """Evaluate the stopping test at iteration ``t``; Stop iff the bound < epsilon."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    beta = compute_beta(t, consts)
    c2 = variance_floor(t, consts.sigma)
    sol = solve_subproblem(t, c1, c2, beta, consts)
    bound = max(tightened_bound(t, c1, c2, beta, sol), 0.0)
    full, table = classic_bound(t, c1, beta)
    verdict = Verdict.STOP if bound < epsilon else Verdict.CONTINUE
    return BoundCertificate(t=t, c1=c1, c2=c2, beta=beta, solution=sol,
                            tightened_bound=bound, classic_bound_full=full,
                            classic_bound_table=table, verdict=verdict)

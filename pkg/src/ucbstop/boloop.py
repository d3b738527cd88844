"""GP-UCB loop with pluggable stopping rules.

Every rule is evaluated after the refit of iteration ``t``. Rules never feed
back into the query sequence, so a run that stops early is an exact prefix
of the run that does not stop. ``monitors`` lets one trajectory carry the
verdicts of several rules at once; :func:`truncate_for_rule` then recovers
each rule's own record.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import qmc

from . import gp as gpm
from .acquire import AcquisitionQuery, maximize_acquisition
from .certify import BoundCertificate, ProblemConstants, Verdict, compute_beta, make_certificate
from .gp import KernelSpec
from .objectives import Objective

__all__ = [
    "RuleKind",
    "StoppingRuleConfig",
    "SurrogateConfig",
    "IterationRecord",
    "RunRecord",
    "run_bo",
    "oracle_r_stop",
    "acq_stop",
    "cb_gap_stop",
    "truncate_for_rule",
    "incumbent_regret",
]


class RuleKind(str, enum.Enum):
    UCB_BR = "ucb_br"
    ACQ = "acq"
    DELTA_CB = "delta_cb"
    NOSTOP = "nostop"
    ORACLE_R = "oracle_r"


@dataclass(frozen=True)
class StoppingRuleConfig:
    """Which rule, its tolerance, and how often it is checked.

    ``threshold`` applies to the Acq and confidence-gap rules and defaults
    to ``epsilon``. The rule is checked on BO iterations k = stride, 2*stride, ...
    counted after the initial design.
    """

    kind: RuleKind
    epsilon: float = 0.1
    check_stride: int = 1
    threshold: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if int(self.check_stride) != self.check_stride or self.check_stride < 1:
            raise ValueError(f"check_stride must be a positive integer, got {self.check_stride!r}")
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.epsilon)

    @property
    def name(self):
        return self.kind.value


@dataclass(frozen=True)
class SurrogateConfig:
    """GP settings. ``hyper_mode`` is "fixed" or "map" (lengthscale by
    maximum marginal likelihood, refit every iteration); ``prior_mean`` is
    "zero" or "mean" (constant prior mean at the sample mean)."""

    kernel: KernelSpec
    noise_sigma: float
    hyper_mode: str = "fixed"
    prior_mean: str = "zero"
    search_space: tuple = (0.05, 2.0)

    def __post_init__(self):
        if self.hyper_mode not in ("fixed", "map"):
            raise ValueError(f"hyper_mode must be 'fixed' or 'map', got {self.hyper_mode!r}")
        if self.prior_mean not in ("zero", "mean"):
            raise ValueError(f"prior_mean must be 'zero' or 'mean', got {self.prior_mean!r}")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be nonnegative")

    @property
    def noise_var(self):
        return self.noise_sigma ** 2


@dataclass
class IterationRecord:
    t: int
    x: np.ndarray
    y: float
    f: float
    c1: float = math.nan
    beta: float = math.nan
    lengthscale: float = math.nan
    loop_ms: float = math.nan
    certificate: BoundCertificate | None = None
    verdicts: dict = field(default_factory=dict)
    times_ms: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)

    @property
    def initial(self):
        return math.isnan(self.c1)


@dataclass
class RunRecord:
    seed: int
    objective_id: str
    kernel: KernelSpec
    rule: StoppingRuleConfig
    budget: int
    init_count: int
    f_star: float
    iterations: list
    stop_iteration: int
    stopped: bool
    status: str = "ok"
    error: str = ""

    @property
    def iterations_used(self):
        return len(self.iterations)

    @property
    def regret_curve(self):
        return incumbent_regret([it.f for it in self.iterations], self.f_star)

    @property
    def final_regret(self):
        curve = self.regret_curve
        return float(curve[-1]) if curve.size else math.nan

    @property
    def success(self):
        return self.status == "ok" and self.final_regret <= self.rule.epsilon

    @property
    def hyper_trace(self):
        return [it.lengthscale for it in self.iterations if not it.initial]

    def mean_loop_ms(self):
        """Mean per-iteration time of the BO step itself, excluding stop tests."""
        vals = [it.loop_ms for it in self.iterations if not it.initial]
        return float(np.mean(vals)) if vals else 0.0

    def stoptest_ms(self, rule_name=None):
        """Mean stop-test wall time over checked iterations."""
        name = rule_name or self.rule.name
        vals = [it.times_ms[name] for it in self.iterations if name in it.times_ms]
        return float(np.mean(vals)) if vals else 0.0


_OFFLINE = (RuleKind.NOSTOP, RuleKind.ORACLE_R)


def incumbent_regret(values, f_star):
    """f_star - max_{i <= t} f(x_i) for each t; nonincreasing by construction."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    return f_star - np.maximum.accumulate(values)


def oracle_r_stop(regret_curve, epsilon):
    """First 1-based t with incumbent regret <= epsilon, else len(curve)."""
    curve = np.asarray(regret_curve, dtype=float)
    if curve.size == 0:
        raise ValueError("regret curve is empty")
    hit = np.flatnonzero(curve <= epsilon)
    return int(hit[0]) + 1 if hit.size else int(curve.size)


def _max_ucb(gp, beta, query_box, rng_seed):
    q = AcquisitionQuery(beta, query_box[0], query_box[1])
    return maximize_acquisition(gp, q, rng_seed).value


def acq_stop(gp, beta, incumbent_mean_best, domain, threshold, rng_seed=0):
    """Stop iff max_x UCB(x) - incumbent_mean_best <= threshold.

    ``domain`` is a (lower, upper) box. Returns ``(verdict, gap)``.
    """
    gap = _max_ucb(gp, beta, domain, rng_seed) - incumbent_mean_best
    return (Verdict.STOP if gap <= threshold else Verdict.CONTINUE), gap


def cb_gap_stop(gp, beta, domain, observed_points, threshold, rng_seed=0):
    """Stop iff max_x UCB(x) - max_i LCB(x_i) <= threshold. Returns ``(verdict, gap)``."""
    observed_points = np.atleast_2d(observed_points)
    if observed_points.shape[0] == 0:
        raise ValueError("confidence-gap rule needs at least one observed point")
    mean, var = gp.predict(observed_points)
    best_lcb = float(np.max(mean - math.sqrt(beta) * np.sqrt(var)))
    gap = _max_ucb(gp, beta, domain, rng_seed) - best_lcb
    return (Verdict.STOP if gap <= threshold else Verdict.CONTINUE), gap


def _seed_for(seed, *tags):
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1)[0])


def initial_design(d, count, seed):
    """First ``count`` points of a scrambled Sobol sequence on [0, 1]^d."""
    m = max(0, math.ceil(math.log2(max(count, 1))))
    return qmc.Sobol(d, scramble=True, seed=seed).random_base2(m)[:count]


class _Surrogate:
    def __init__(self, cfg: SurrogateConfig, d):
        self.cfg = cfg
        self.d = d
        self.kernel = cfg.kernel

    def fit(self, X, y):
        cfg = self.cfg
        offset = float(np.mean(y)) if (cfg.prior_mean == "mean" and len(y)) else 0.0
        if cfg.hyper_mode == "map" and len(y) >= 2:
            self.kernel = gpm.fit_hyperparams(X, y, cfg.kernel.family, cfg.noise_var,
                                              cfg.search_space, mean_offset=offset)
        return gpm.fit(X, y, self.kernel, cfg.noise_var, mean_offset=offset, dim=self.d)


def _evaluate_rule(rule: StoppingRuleConfig, t, c1, gp, X, consts, box, seed):
    """Returns (verdict, certificate or None, gap or nan)."""
    kind = rule.kind
    if kind is RuleKind.UCB_BR:
        cert = make_certificate(t, c1, consts, rule.epsilon)
        return cert.verdict, cert, cert.tightened_bound
    if kind in (RuleKind.ACQ, RuleKind.DELTA_CB):
        # both gaps use the weight of the next acquisition
        beta_next = compute_beta(t + 1, consts)
        rseed = _seed_for(seed, t, 1)
        if kind is RuleKind.ACQ:
            mean_best = float(np.max(gp.predict(X)[0]))
            verdict, gap = acq_stop(gp, beta_next, mean_best, box, rule.threshold, rseed)
        else:
            verdict, gap = cb_gap_stop(gp, beta_next, box, X, rule.threshold, rseed)
        return verdict, None, gap
    raise ValueError(f"{kind.value} has no online stop test")


def run_bo(objective: Objective, surrogate: SurrogateConfig, budget, init_count,
           rule: StoppingRuleConfig, consts: ProblemConstants, seed, monitors=(),
           acquisition_kw=None) -> RunRecord:
    """One seeded BO run.

    ``budget`` counts all evaluations including the ``init_count`` Sobol
    points. Observation noise is i.i.d. N(0, noise_sigma^2). ``monitors``
    are extra rules evaluated alongside ``rule`` without stopping the run.
    """
    if not budget >= init_count >= 1:
        raise ValueError(f"need budget >= init_count >= 1, got {budget}, {init_count}")
    d = objective.dim
    box = (np.zeros(d), np.ones(d))
    noise = np.random.default_rng(_seed_for(seed, 0))
    rules = [rule] + [m for m in monitors if m.kind != rule.kind]
    record = RunRecord(seed=seed, objective_id=objective.id, kernel=surrogate.kernel, rule=rule,
                       budget=budget, init_count=init_count, f_star=objective.f_star,
                       iterations=[], stop_iteration=budget, stopped=False)
    surrogate_state = _Surrogate(surrogate, d)
    acquisition_kw = acquisition_kw or {}

    def observe(x):
        f = float(objective(x))
        if not math.isfinite(f):
            raise ValueError(f"objective returned {f!r} at {x!r}")
        return f, f + surrogate.noise_sigma * float(noise.standard_normal())

    try:
        X0 = initial_design(d, init_count, _seed_for(seed, 1))
        for i, x in enumerate(X0):
            f, y = observe(x)
            record.iterations.append(IterationRecord(t=i + 1, x=x, y=y, f=f))
        X = np.array([it.x for it in record.iterations])
        Y = np.array([it.y for it in record.iterations])
        gp = surrogate_state.fit(X, Y)

        for t in range(init_count + 1, budget + 1):
            loop_start = time.perf_counter()
            beta = compute_beta(t, consts)
            query = AcquisitionQuery(beta, box[0], box[1], **acquisition_kw)
            acq = maximize_acquisition(gp, query, _seed_for(seed, t, 0))
            it = IterationRecord(t=t, x=acq.x, y=math.nan, f=math.nan, c1=acq.sigma, beta=beta,
                                 lengthscale=gp.kernel.lengthscale)
            it.f, it.y = observe(acq.x)
            record.iterations.append(it)
            X = np.vstack([X, acq.x])
            Y = np.append(Y, it.y)
            gp = surrogate_state.fit(X, Y)
            # acquisition, evaluation and refit; stop tests are timed separately
            it.loop_ms = (time.perf_counter() - loop_start) * 1e3

            k = t - init_count
            stop = False
            for r in rules:
                # NoStop never tests; Oracle_r is decided afterwards from the regret curve
                if r.kind in _OFFLINE or k % r.check_stride:
                    continue
                start = time.perf_counter()
                verdict, cert, gap = _evaluate_rule(r, t, it.c1, gp, X, consts, box, seed)
                it.times_ms[r.name] = (time.perf_counter() - start) * 1e3
                it.verdicts[r.name] = verdict.value
                it.gaps[r.name] = gap
                if cert is not None:
                    it.certificate = cert
                if r is rule and verdict is Verdict.STOP:
                    stop = True
            if stop:
                record.stop_iteration = t
                record.stopped = True
                break
    except Exception as exc:  # diagnostic record instead of a crash
        record.status = "failed"
        record.error = f"{type(exc).__name__}: {exc}"
        record.stop_iteration = len(record.iterations)
    return record


def truncate_for_rule(shared: RunRecord, rule: StoppingRuleConfig) -> RunRecord:
    """The record ``rule`` would have produced, cut from a non-stopping run.

    Valid because stopping rules do not alter the query sequence. The shared
    run must have carried ``rule`` (as its rule or a monitor) with the same
    stride, except for NoStop and Oracle_r, which need no per-iteration test.
    """
    its = shared.iterations
    stop_t = None
    if rule.kind is RuleKind.ORACLE_R:
        curve = incumbent_regret([it.f for it in its], shared.f_star)
        stop_t = oracle_r_stop(curve, rule.epsilon)
        stopped = bool(curve[stop_t - 1] <= rule.epsilon)
    elif rule.kind is RuleKind.NOSTOP:
        stopped = False
    else:
        for it in its:
            if it.verdicts.get(rule.name) == Verdict.STOP.value:
                stop_t = it.t
                break
        stopped = stop_t is not None
    if stop_t is None:
        stop_t = len(its)
    return replace(shared, rule=rule, iterations=its[:stop_t], stop_iteration=stop_t, stopped=stopped)

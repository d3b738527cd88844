"""Experiment configuration read from an INI file.

Sections and keys (defaults in brackets)::

    [objective]  name, dim [native], output_scale [raw], sample_family [matern52],
                 sample_lengthscale [0.2], feature_count [1024]
    [surrogate]  family [matern52], lengthscale [0.2], hyper_mode [fixed],
                 prior_mean [zero], noise_sigma [0.01], search_low [0.05], search_high [2.0]
    [loop]       budget, init_count [5], check_stride [1]
    [stopping]   rules [ucb_br, acq, delta_cb, nostop, oracle_r], epsilon [0.1],
                 threshold [epsilon], delta [0.05], B [2.0], a [B], b [B], r [1.0],
                 n_lip [10]
    [run]        seeds [0-9], workers [1], output_dir [results]
    [sweep]      B [], delta []   (grid used by ``bench --sweep``)

``seeds`` accepts a comma list and inclusive ranges such as ``0-9``.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..boloop import RuleKind, StoppingRuleConfig, SurrogateConfig
from ..certify import ConfigurationError, ProblemConstants
from ..gp import FAMILIES, KernelSpec

__all__ = ["ExperimentConfig", "load_config", "parse_config", "parse_seeds", "CONFIG_DIR"]

CONFIG_DIR = Path(__file__).with_name("configs")
ALL_RULES = tuple(k.value for k in RuleKind)


def parse_seeds(text):
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(v) for v in part.split("-", 1))
            if hi < lo:
                raise ConfigurationError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return tuple(seeds)


def _floats(text):
    return tuple(float(v) for v in str(text).replace(",", " ").split())


@dataclass(frozen=True)
class ExperimentConfig:
    objective: str
    budget: int
    dim: int | None = None
    output_scale: str = "raw"
    sample_family: str = "matern52"
    sample_lengthscale: float = 0.2
    feature_count: int = 1024
    family: str = "matern52"
    lengthscale: float = 0.2
    hyper_mode: str = "fixed"
    prior_mean: str = "zero"
    noise_sigma: float = 0.01
    search_space: tuple = (0.05, 2.0)
    init_count: int = 5
    check_stride: int = 1
    rules: tuple = ALL_RULES
    epsilon: float = 0.1
    threshold: float | None = None
    delta: float = 0.05
    a: float = 2.0
    b: float = 2.0
    r: float = 1.0
    n_lip: float = 10.0
    seeds: tuple = tuple(range(10))
    workers: int = 1
    output_dir: str = "results"
    sweep_B: tuple = field(default=())
    sweep_delta: tuple = field(default=())

    def __post_init__(self):
        if not self.seeds:
            raise ConfigurationError("seeds must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError(f"seeds must be unique, got {list(self.seeds)}")
        if self.init_count < 1:
            raise ConfigurationError("init_count must be at least 1")
        if self.budget < self.init_count:
            raise ConfigurationError(f"budget {self.budget} is below init_count {self.init_count}")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        unknown = [r for r in self.rules if r not in ALL_RULES]
        if unknown or not self.rules:
            raise ConfigurationError(f"rules must be a nonempty subset of {ALL_RULES}, got {list(self.rules)}")
        if len(set(self.rules)) != len(self.rules):
            raise ConfigurationError("rules must be unique")
        for fam in (self.family, self.sample_family):
            if fam not in FAMILIES:
                raise ConfigurationError(f"kernel family must be one of {FAMILIES}, got {fam!r}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ConfigurationError("epsilon must be positive")
        # build every derived object once so bad values fail at load time
        try:
            self.surrogate()
            self.rule_configs()
            KernelSpec(self.sample_family, self.sample_lengthscale)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        self.constants()

    @property
    def dim_or_native(self):
        if self.dim is not None:
            return self.dim
        return {"branin": 2, "rosenbrock": 4, "levy": 4}.get(self.objective, 2)

    def constants(self) -> ProblemConstants:
        return ProblemConstants(d=self.dim_or_native, r=self.r, a=self.a, b=self.b,
                                sigma=self.noise_sigma, delta=self.delta, n_lip=self.n_lip)

    def surrogate(self) -> SurrogateConfig:
        return SurrogateConfig(KernelSpec(self.family, self.lengthscale), self.noise_sigma,
                               hyper_mode=self.hyper_mode, prior_mean=self.prior_mean,
                               search_space=tuple(self.search_space))

    def rule_configs(self):
        return [StoppingRuleConfig(r, epsilon=self.epsilon, check_stride=self.check_stride,
                                   threshold=self.threshold) for r in self.rules]

    def with_calibration(self, B=None, delta=None):
        """A copy with a = b = B and/or a new delta (one ablation cell)."""
        kw = {}
        if B is not None:
            kw.update(a=float(B), b=float(B))
        if delta is not None:
            kw["delta"] = float(delta)
        return replace(self, **kw)

    def as_dict(self):
        out = {}
        for name in self.__dataclass_fields__:
            val = getattr(self, name)
            out[name] = list(val) if isinstance(val, tuple) else val
        return out


def parse_config(parser: configparser.ConfigParser) -> ExperimentConfig:
    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key).strip()
        return default

    try:
        name = get("objective", "name")
        budget = get("loop", "budget")
        if name is None or budget is None:
            raise ConfigurationError("config needs [objective] name and [loop] budget")
        B = float(get("stopping", "B", 2.0))
        dim = get("objective", "dim")
        threshold = get("stopping", "threshold")
        rules = get("stopping", "rules")
        kw = dict(
            objective=name,
            budget=int(budget),
            dim=int(dim) if dim else None,
            output_scale=get("objective", "output_scale", "raw"),
            sample_family=get("objective", "sample_family", "matern52"),
            sample_lengthscale=float(get("objective", "sample_lengthscale", 0.2)),
            feature_count=int(get("objective", "feature_count", 1024)),
            family=get("surrogate", "family", "matern52"),
            lengthscale=float(get("surrogate", "lengthscale", 0.2)),
            hyper_mode=get("surrogate", "hyper_mode", "fixed"),
            prior_mean=get("surrogate", "prior_mean", "zero"),
            noise_sigma=float(get("surrogate", "noise_sigma", 0.01)),
            search_space=(float(get("surrogate", "search_low", 0.05)),
                          float(get("surrogate", "search_high", 2.0))),
            init_count=int(get("loop", "init_count", 5)),
            check_stride=int(get("loop", "check_stride", 1)),
            rules=tuple(r.strip() for r in rules.split(",") if r.strip()) if rules else ALL_RULES,
            epsilon=float(get("stopping", "epsilon", 0.1)),
            threshold=float(threshold) if threshold else None,
            delta=float(get("stopping", "delta", 0.05)),
            a=float(get("stopping", "a", B)),
            b=float(get("stopping", "b", B)),
            r=float(get("stopping", "r", 1.0)),
            n_lip=float(get("stopping", "n_lip", 10.0)),
            seeds=parse_seeds(get("run", "seeds", "0-9")),
            workers=int(get("run", "workers", 1)),
            output_dir=get("run", "output_dir", "results"),
            sweep_B=_floats(get("sweep", "B", "")),
            sweep_delta=_floats(get("sweep", "delta", "")),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"bad config value: {exc}") from exc
    return ExperimentConfig(**kw)


def load_config(path, overrides=()) -> ExperimentConfig:
    """Read an INI file, apply ``section.key=value`` overrides, and validate.

    A bare name such as ``rosenbrock4d`` resolves to a bundled config.
    """
    path = Path(path)
    if not path.exists() and (CONFIG_DIR / f"{path.name}.ini").exists():
        path = CONFIG_DIR / f"{path.name}.ini"
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep "B" distinct from "b"
    parser.read(path)
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, option = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigurationError(f"override must look like section.key=value, got {item!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, option, value.strip())
    return parse_config(parser)

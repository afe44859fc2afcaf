"""Experiment configuration: defaults, TOML loading, key=value overrides."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "ExperimentConfig",
    "BroadcastConfig",
    "IsingConfig",
    "LdpConfig",
    "EnsembleConfig",
    "EXPERIMENTS",
    "load_config",
    "apply_overrides",
]

EXPERIMENTS = ("fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5", "sweep")


class ConfigError(ValueError):
    """Invalid or unknown configuration field."""


class InfeasibleError(ValueError):
    """Requested sizes exceed what the dense/exhaustive kernels allow."""


@dataclass
class BroadcastConfig:
    axis: str = "z"  # "x" | "y" | "z" or "lambda" for the interpolated axis
    lambda_t0: float = math.pi / 4 * 0.75


@dataclass
class IsingConfig:
    J: float = 1.0
    h_Z: float = 1.205
    h_X: float = 0.945
    boundary: str = "periodic"


@dataclass
class LdpConfig:
    n_rate: int = 12
    smear_sigma: float = 0.5
    grid_points: int = 401


@dataclass
class EnsembleConfig:
    mode: str = "exhaustive"
    bins: int = 64
    count: int = 100_000


@dataclass
class ExperimentConfig:
    experiment: str = "sweep"
    N: int = 16
    times: list = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    lambdas: list = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.5, 0.7, 1.0])
    broadcast: BroadcastConfig = field(default_factory=BroadcastConfig)
    ising: IsingConfig = field(default_factory=IsingConfig)
    ldp: LdpConfig = field(default_factory=LdpConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    output_dir: str = "out"
    seed: int = 0
    threads: int = 0  # 0 = auto

    def to_dict(self) -> dict:
        return asdict(self)


def _experiment_defaults(experiment: str) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    cfg = ExperimentConfig(experiment=experiment)
    if experiment == "fig1a":
        cfg.broadcast.axis = "z"
    elif experiment == "fig1b":
        cfg.broadcast.axis = "y"
    elif experiment == "fig2":
        cfg.broadcast.axis = "y"
        cfg.times = [64.0]
    elif experiment == "fig3":
        cfg.broadcast.axis = "lambda"
        cfg.times = [32.0]
    elif experiment == "fig4":
        cfg.N = 14
        cfg.times = [32.0]
    elif experiment == "fig5":
        cfg.times = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    return cfg


_SECTION_TYPES = {
    "broadcast": BroadcastConfig,
    "ising": IsingConfig,
    "ldp": LdpConfig,
    "ensemble": EnsembleConfig,
}


def _set_field(obj, name: str, value):
    known = {f.name: f for f in fields(obj)}
    if name not in known:
        raise ConfigError(f"unknown configuration key {name!r} in [{type(obj).__name__}]")
    current = getattr(obj, name)
    if isinstance(current, bool) or isinstance(value, dict):
        raise ConfigError(f"unsupported value for {name!r}")
    if isinstance(current, int) and not isinstance(current, bool):
        try:
            value = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name!r} expects an integer, got {value!r}") from None
    elif isinstance(current, float):
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name!r} expects a number, got {value!r}") from None
    elif isinstance(current, list):
        if isinstance(value, str):
            value = [float(x) for x in value.split(",") if x.strip()]
        value = [float(x) for x in value]
    elif isinstance(current, str):
        value = str(value)
    setattr(obj, name, value)


def build_config(experiment: str, toml_path: str | None = None, overrides=()) -> ExperimentConfig:
    cfg = _experiment_defaults(experiment)
    if toml_path is not None:
        merge_toml(cfg, toml_path)
    apply_overrides(cfg, overrides)
    validate(cfg)
    return cfg


def load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def merge_toml(cfg: ExperimentConfig, path: str):
    data = load_config(path)
    for key, value in data.items():
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ConfigError(f"section [{key}] must be a table")
            sub = getattr(cfg, key)
            for k, v in value.items():
                _set_field(sub, k, v)
        else:
            _set_field(cfg, key, value)


def apply_overrides(cfg: ExperimentConfig, overrides):
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if "." in key:
            section, name = key.split(".", 1)
            if section not in _SECTION_TYPES:
                raise ConfigError(f"unknown configuration section {section!r}")
            _set_field(getattr(cfg, section), name, value)
        else:
            _set_field(cfg, key, value)


def validate(cfg: ExperimentConfig):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    if cfg.N < 2:
        raise ConfigError(f"N must be >= 2, got {cfg.N}")
    if cfg.broadcast.axis not in ("x", "y", "z", "lambda"):
        raise ConfigError(f"broadcast.axis must be x, y, z or lambda, got {cfg.broadcast.axis!r}")
    if cfg.ising.boundary not in ("periodic", "open"):
        raise ConfigError(f"ising.boundary must be periodic or open, got {cfg.ising.boundary!r}")
    if cfg.ensemble.mode not in ("exhaustive", "sampled"):
        raise ConfigError(f"ensemble.mode must be exhaustive or sampled, got {cfg.ensemble.mode!r}")
    if any(t < 0 for t in cfg.times):
        raise ConfigError("times must be non-negative")
    # feasibility gates, checked before any compute
    if cfg.N > 26:
        raise InfeasibleError(f"N = {cfg.N} exceeds the statevector budget (N <= 26)")
    if cfg.experiment == "fig4" and cfg.ensemble.mode == "exhaustive" and cfg.N > 24:
        raise InfeasibleError(f"exhaustive ensemble infeasible at N = {cfg.N} (N <= 24)")
    if cfg.ldp.n_rate > 14:
        raise InfeasibleError(f"ldp.n_rate = {cfg.ldp.n_rate} exceeds dense diagonalization (<= 14)")
    if cfg.ldp.n_rate >= cfg.N and cfg.experiment == "fig2":
        raise ConfigError("ldp.n_rate must be smaller than N")

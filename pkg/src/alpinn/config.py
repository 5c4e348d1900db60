"""Experiment configuration: sectioned ``key = value`` text files.

Sections (``[experiment]``, ``[loss]``, ``[training]``, ``[grid]``) are
organizational; key names are globally unique, every key can be
overridden from the command line as ``--key value``, and unknown keys
are hard errors.  ``paper_defaults`` fills the published best
hyperparameters (beta, eta_lambda, eta_theta) for a problem/model pair.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields

from .balancers import canonical_strategy
from .network import Architecture

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "serialize",
    "apply_overrides",
    "paper_defaults",
    "architecture_for",
    "config_hash",
]


class ConfigError(ValueError):
    """Malformed or out-of-range configuration input."""


_PROBLEMS = ("helmholtz", "burgers", "klein-gordon", "navier-stokes")
_MODELS = ("M1", "M2", "M3", "M4", "branched", "custom")


@dataclass
class ExperimentConfig:
    # [experiment]
    problem: str = "helmholtz"
    model: str = "M2"
    hidden: str = ""  # comma-separated widths, used when model = custom
    feature_map: str = "none"
    freq_scale: float = 1.0
    strategy: str = "augmented_lagrangian"
    outdir: str = "out"
    # [loss]
    beta: float = 1.0
    beta_mode: str = "constant"
    beta_slope: float = 10.0
    eta_lambda: float = 1.0
    measure_weights: bool = False
    # [training]
    epochs: int = 5000
    eta_theta: float = 1e-3
    n_trials: int = 1
    seed: int = 0
    eval_every: int = 100
    patience: int = 0  # 0 disables early stopping
    init: str = "kaiming_uniform"
    timing: bool = False  # write real wall_ms to CSVs (breaks byte determinism)
    # [grid]
    n_r: int = 900
    n_b: int = 200
    n_i: int = 100
    eval_n: int = 0  # 0 selects the per-dimension default


_SECTIONS = {
    "experiment": ["problem", "model", "hidden", "feature_map", "freq_scale",
                   "strategy", "outdir"],
    "loss": ["beta", "beta_mode", "beta_slope", "eta_lambda", "measure_weights"],
    "training": ["epochs", "eta_theta", "n_trials", "seed", "eval_every",
                 "patience", "init", "timing"],
    "grid": ["n_r", "n_b", "n_i", "eval_n"],
}

_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str, where: str):
    t = _TYPES[key]
    raw = raw.strip()
    try:
        if t == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if t == "int":
            return int(raw)
        if t == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {t} for key {key!r}") from None


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    def bad(key, msg):
        raise ConfigError(f"key {key!r}: {msg}")

    if cfg.problem.lower().replace("_", "-") not in _PROBLEMS:
        bad("problem", f"{cfg.problem!r} not in {_PROBLEMS}")
    cfg.problem = cfg.problem.lower().replace("_", "-")
    if cfg.model not in _MODELS:
        bad("model", f"{cfg.model!r} not in {_MODELS}")
    if cfg.model == "custom":
        try:
            widths = [int(w) for w in cfg.hidden.split(",") if w.strip()]
        except ValueError:
            bad("hidden", f"cannot parse widths {cfg.hidden!r}")
        if not widths or any(w <= 0 for w in widths):
            bad("hidden", "custom model needs positive comma-separated widths")
    cfg.strategy = canonical_strategy(cfg.strategy)
    if cfg.feature_map not in ("none", "sinusoidal"):
        bad("feature_map", f"unknown feature map {cfg.feature_map!r}")
    if cfg.beta < 0:
        bad("beta", f"must be nonnegative, got {cfg.beta}")
    if cfg.beta_mode not in ("constant", "linear"):
        bad("beta_mode", f"{cfg.beta_mode!r} not in (constant, linear)")
    if cfg.beta_slope <= 0:
        bad("beta_slope", f"must be positive, got {cfg.beta_slope}")
    if cfg.eta_lambda < 0:
        bad("eta_lambda", f"must be nonnegative, got {cfg.eta_lambda}")
    if cfg.eta_theta <= 0:
        bad("eta_theta", f"must be positive, got {cfg.eta_theta}")
    if cfg.epochs < 1:
        bad("epochs", f"must be >= 1, got {cfg.epochs}")
    if cfg.n_trials < 1:
        bad("n_trials", f"must be >= 1, got {cfg.n_trials}")
    if cfg.eval_every < 1:
        bad("eval_every", f"must be >= 1, got {cfg.eval_every}")
    if cfg.patience < 0:
        bad("patience", f"must be >= 0, got {cfg.patience}")
    if cfg.init not in ("kaiming_uniform", "xavier_uniform"):
        bad("init", f"unknown scheme {cfg.init!r}")
    for key in ("n_r", "n_b", "n_i", "eval_n"):
        if getattr(cfg, key) < 0 or (key in ("n_r", "n_b") and getattr(cfg, key) == 0):
            bad(key, f"must be positive, got {getattr(cfg, key)}")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("[") and body.endswith("]"):
            if body[1:-1] not in _SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section {body!r}")
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _convert(key, raw, f"line {lineno}"))
    return _validate(cfg)


def serialize(cfg: ExperimentConfig) -> str:
    out = []
    for section, keys in _SECTIONS.items():
        out.append(f"[{section}]")
        for key in keys:
            v = getattr(cfg, key)
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{key} = {v}")
        out.append("")
    return "\n".join(out)


def apply_overrides(cfg: ExperimentConfig, overrides: dict[str, str]) -> ExperimentConfig:
    for key, raw in overrides.items():
        if key not in _TYPES:
            raise ConfigError(f"unknown override key {key!r}")
        setattr(cfg, key, _convert(key, raw, f"override --{key}"))
    return _validate(cfg)


# Published best (beta, eta_lambda, eta_theta) per problem and model.
_PAPER_DEFAULTS = {
    ("helmholtz", "M1"): (1000.0, 1.0, 1e-3),
    ("helmholtz", "M2"): (500.0, 1.0, 1e-4),
    ("helmholtz", "M3"): (1000.0, 1.0, 1e-4),
    ("helmholtz", "M4"): (500.0, 1.0, 1e-3),
    ("burgers", "M1"): (1.0, 1e-4, 1e-4),
    ("burgers", "M2"): (1.0, 1e-3, 1e-4),
    ("burgers", "M3"): (1.0, 1e-3, 1e-4),
    ("burgers", "M4"): (1.0, 1e-3, 1e-3),
    ("klein-gordon", "M1"): (500.0, 1.0, 1e-3),
    ("klein-gordon", "M2"): (500.0, 1.0, 1e-3),
    ("klein-gordon", "M3"): (500.0, 1.0, 1e-3),
    ("klein-gordon", "M4"): (500.0, 1.0, 1e-3),
}


def paper_defaults(cfg: ExperimentConfig, problem: str, model: str) -> ExperimentConfig:
    """Fill the published best hyperparameters for a problem/model pair."""
    key = (problem.lower().replace("_", "-"), model.upper())
    if key not in _PAPER_DEFAULTS:
        raise ConfigError(
            f"no published defaults for problem {problem!r}, model {model!r}"
        )
    beta, eta_lambda, eta_theta = _PAPER_DEFAULTS[key]
    cfg.problem, cfg.model = key
    cfg.beta, cfg.eta_lambda, cfg.eta_theta = beta, eta_lambda, eta_theta
    return _validate(cfg)


def architecture_for(cfg: ExperimentConfig, input_dim: int) -> Architecture:
    if cfg.model == "branched":
        if input_dim != 3:
            raise ConfigError("the branched model expects a 3-dimensional input")
        arch = Architecture.branched_3d(feature_map=cfg.feature_map)
    elif cfg.model == "custom":
        widths = [int(w) for w in cfg.hidden.split(",") if w.strip()]
        arch = Architecture(input_dim, widths, feature_map=cfg.feature_map)
    else:
        arch = Architecture.from_tag(cfg.model, input_dim, feature_map=cfg.feature_map)
    arch.freq_scale = cfg.freq_scale
    return arch


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize(cfg).encode()).hexdigest()[:16]

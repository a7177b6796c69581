"""Run configuration, TOML loading and hyperparameter presets.

Config files are TOML (format version 1)::

    version = 1
    preset = "sbm"          # optional, applied first
    seed = 0
    epochs = 300
    tau = 0.4
    learning_rate = 0.005
    weight_decay = 1e-5
    hidden_dim = 128
    output_dim = 128
    pool_refresh_interval = 1
    record_wall_time = false

    [augment]   # edge_drop_prob_v1, feat_mask_prob_v1, edge_drop_prob_v2, feat_mask_prob_v2
    [agent]     # kappa_init, kappa_max, window_half, xi, variant
    [protocol]  # train_frac, val_frac, test_frac, num_repeats, l2_grid, probe_max_iters, probe_lr
    [dataset]   # kind = "sbm" + SbmSpec fields, or kind = "files" + edges/features/labels
    [sweep]     # kappa_max = [0, 10, ...]
    [variants]  # names = ["css", "random", ...]

Relative dataset paths resolve against the config file's directory.
"""

from __future__ import annotations

import copy
import dataclasses
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .agent import AgentConfig
from .augment import AugmentConfig
from .graph import SbmSpec
from .probe import EvalProtocol

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetFiles:
    edges: str
    features: str
    labels: Optional[str] = None


@dataclass(frozen=True)
class TrainConfig:
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    protocol: EvalProtocol = field(default_factory=EvalProtocol)
    tau: float = 0.4
    epochs: int = 300
    learning_rate: float = 5e-3
    weight_decay: float = 1e-5
    hidden_dim: int = 128
    output_dim: int = 128
    seed: int = 0
    pool_refresh_interval: int = 1
    record_wall_time: bool = False
    dataset: Union[SbmSpec, DatasetFiles] = field(default_factory=SbmSpec)
    sweep_kappa_max: tuple = (0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
    variants: tuple = ("css", "random", "easy", "medium", "hard")

    def validate(self) -> "TrainConfig":
        try:
            self.augment.validate()
            self.agent.validate()
            self.protocol.validate()
            if isinstance(self.dataset, SbmSpec):
                self.dataset.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ConfigError("learning_rate must be > 0 and weight_decay >= 0")
        if self.hidden_dim < 1 or self.output_dim < 1:
            raise ConfigError("encoder dimensions must be >= 1")
        if self.pool_refresh_interval < 1:
            raise ConfigError("pool_refresh_interval must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        return self

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def with_agent(self, **changes) -> "TrainConfig":
        return self.replace(agent=dataclasses.replace(self.agent, **changes))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["dataset"] = {"kind": "sbm" if isinstance(self.dataset, SbmSpec) else "files",
                          **out["dataset"]}
        out["protocol"]["l2_grid"] = list(self.protocol.l2_grid)
        out["sweep_kappa_max"] = list(self.sweep_kappa_max)
        out["variants"] = list(self.variants)
        return out


# Settings per benchmark dataset as published for the method. The datasets
# themselves are not shipped; these presets pair with user-supplied files.
# Weight decay is printed as "1^-5" in the source table and read as 1e-5.
_TABLE = {
    #            Ed1   Fm1   Ed2   Fm2   tau   epochs lr     dims
    "cora":     (0.45, 0.35, 0.15, 0.5, 0.4, 1200, 5e-3, 128),
    "citeseer": (0.95, 0.85, 0.3, 0.25, 0.2, 1200, 5e-4, 128),
    "pubmed":   (0.5, 0.45, 0.4, 0.4, 0.1, 2000, 5e-4, 128),
    "dblp":     (0.5, 0.25, 0.3, 0.45, 0.5, 1200, 5e-4, 128),
    "wikics":   (0.35, 0.25, 0.75, 0.4, 0.85, 1200, 5e-4, 256),
    "amazon-computers": (0.5, 0.4, 0.15, 0.25, 0.15, 1200, 5e-4, 256),
    "amazon-photo":     (0.1, 0.15, 0.45, 0.2, 0.5, 1200, 1e-5, 256),
    "coauthor-cs":      (0.2, 0.5, 0.5, 0.4, 0.7, 1200, 1e-5, 256),
    "actor":    (0.5, 0.35, 0.3, 0.5, 0.2, 1200, 5e-4, 128),
}

PRESETS = {
    name: {
        "augment": {"edge_drop_prob_v1": ed1, "feat_mask_prob_v1": fm1,
                    "edge_drop_prob_v2": ed2, "feat_mask_prob_v2": fm2},
        "tau": tau, "epochs": epochs, "learning_rate": lr, "weight_decay": 1e-5,
        "hidden_dim": dims, "output_dim": dims,
    }
    for name, (ed1, fm1, ed2, fm2, tau, epochs, lr, dims) in _TABLE.items()
}

# desk-scale synthetic benchmark used by the acceptance runs: the Cora row
# (whose tau already matches) shortened to 300 epochs
PRESETS["sbm"] = {
    **PRESETS["cora"],
    "epochs": 300,
    "agent": {"kappa_init": 10, "kappa_max": 50, "window_half": 10, "xi": 0.01,
              "variant": "css"},
    "dataset": {"kind": "sbm", "blocks": 3, "nodes_per_block": 100, "p_in": 0.3,
                "p_out": 0.02, "feature_dim": 16, "feature_signal": 0.5, "seed": 0},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _build(cls, data: dict, section: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"[{section}] unknown keys: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


_TOP_KEYS = {"tau", "epochs", "learning_rate", "weight_decay", "hidden_dim", "output_dim",
             "seed", "pool_refresh_interval", "record_wall_time"}


def config_from_dict(data: dict, base_dir: str = ".") -> TrainConfig:
    data = dict(data)
    version = data.pop("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version}")
    preset = data.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
        base = PRESETS[preset]
        ds = data.get("dataset")
        if isinstance(ds, dict) and ds.get("kind", "sbm") != base.get("dataset", {}).get("kind"):
            # a different dataset kind replaces the preset's section outright
            base = {k: v for k, v in base.items() if k != "dataset"}
        data = _merge(base, data)

    kwargs = {}
    for key in list(data):
        if key in _TOP_KEYS:
            kwargs[key] = data.pop(key)
    if "augment" in data:
        kwargs["augment"] = _build(AugmentConfig, data.pop("augment"), "augment")
    if "agent" in data:
        kwargs["agent"] = _build(AgentConfig, data.pop("agent"), "agent")
    if "protocol" in data:
        proto = dict(data.pop("protocol"))
        if "l2_grid" in proto:
            proto["l2_grid"] = tuple(float(x) for x in proto["l2_grid"])
        kwargs["protocol"] = _build(EvalProtocol, proto, "protocol")
    if "dataset" in data:
        ds = dict(data.pop("dataset"))
        kind = ds.pop("kind", "sbm")
        if kind == "sbm":
            kwargs["dataset"] = _build(SbmSpec, ds, "dataset")
        elif kind == "files":
            for key in ("edges", "features", "labels"):
                if ds.get(key) is not None:
                    ds[key] = os.path.normpath(os.path.join(base_dir, ds[key]))
            kwargs["dataset"] = _build(DatasetFiles, ds, "dataset")
        else:
            raise ConfigError(f"[dataset] unknown kind {kind!r}")
    if "sweep" in data:
        sweep = dict(data.pop("sweep"))
        kwargs["sweep_kappa_max"] = tuple(sweep.pop("kappa_max", TrainConfig.sweep_kappa_max))
        if sweep:
            raise ConfigError(f"[sweep] unknown keys: {sorted(sweep)}")
    if "variants" in data:
        var = dict(data.pop("variants"))
        kwargs["variants"] = tuple(var.pop("names", TrainConfig.variants))
        if var:
            raise ConfigError(f"[variants] unknown keys: {sorted(var)}")
    if data:
        raise ConfigError(f"unknown keys: {sorted(data)}")
    try:
        config = TrainConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return config.validate()


def load_config(path) -> TrainConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def preset_config(name: str, **overrides) -> TrainConfig:
    return config_from_dict(_merge({"preset": name}, overrides))

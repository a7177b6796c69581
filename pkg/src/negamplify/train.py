"""Training loop, experiment runners and result files."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .agent import AgentState, decide, record_loss, select_negatives
from .augment import make_views
from .config import ConfigError, DatasetFiles, TrainConfig
from .encoder import OptimizerState, adam_step, backward, forward, init_params
from .graph import Graph, SbmSpec, generate_sbm, load_dataset
from .loss import NegativeSelection, compute_similarities, loss_gradient
from .pools import VIEW_K, VIEW_M, build_pools
from .probe import evaluate

log = logging.getLogger(__name__)

RESULTS_SCHEMA = 1
EPOCH_HEADER = ("epoch", "loss", "kappa", "decision", "wall_ms")
TABLE_HEADER = ("key", "mean_f1", "std_f1")


class DivergenceError(FloatingPointError):
    def __init__(self, epoch, value):
        super().__init__(f"loss diverged at epoch {epoch}: {value}")
        self.epoch = epoch


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the sub-stream ``key`` of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


# stream keys under the master seed
_INIT, _AUGMENT, _EVAL, _SELECT = 0, 1, 2, 3


def build_id() -> str:
    return f"negamplify-v{__version__}-schema{RESULTS_SCHEMA}"


def load_graph(config: TrainConfig) -> Graph:
    ds = config.dataset
    if isinstance(ds, SbmSpec):
        return generate_sbm(ds)
    if isinstance(ds, DatasetFiles):
        return load_dataset(ds.edges, ds.features, ds.labels)
    raise ConfigError(f"unsupported dataset {ds!r}")


@dataclass
class RunResult:
    per_epoch: list = field(default_factory=list)  # (epoch, loss, kappa, decision, wall_ms)
    f1_mean: float = float("nan")
    f1_std: float = float("nan")
    config: dict = field(default_factory=dict)
    seed: int = 0
    build: str = ""
    params: object = None

    @property
    def losses(self):
        return [row[1] for row in self.per_epoch]

    @property
    def kappas(self):
        return [row[2] for row in self.per_epoch]

    def to_json(self) -> str:
        doc = {
            "schema": RESULTS_SCHEMA,
            "build": self.build,
            "seed": self.seed,
            "final": {"mean_f1": self.f1_mean, "std_f1": self.f1_std},
            "config": self.config,
            "per_epoch": [dict(zip(EPOCH_HEADER, row)) for row in self.per_epoch],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def epochs_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EPOCH_HEADER)
        for epoch, loss, kappa, decision, wall_ms in self.per_epoch:
            writer.writerow([epoch, repr(loss), kappa, decision, wall_ms])
        return buf.getvalue()

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "result.json"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())
        with open(os.path.join(out_dir, "epochs.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.epochs_csv())


def train(config: TrainConfig, graph: Graph | None = None, evaluate_at_end: bool = True) -> RunResult:
    """Self-supervised training with CSS negative selection, then linear evaluation.

    Labels are never read during training; only the final evaluation uses them.
    """
    config.validate()
    if graph is None:
        graph = load_graph(config)
    seed = config.seed
    params = init_params(graph.num_features, config.hidden_dim, config.output_dim,
                         stream(seed, _INIT))
    opt = OptimizerState(learning_rate=config.learning_rate, weight_decay=config.weight_decay)
    agent_cfg = config.agent
    state = AgentState.initial(agent_cfg)
    pools = None
    rows = []

    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        view1, view2 = make_views(graph, config.augment, stream(seed, _AUGMENT, epoch))
        K, cache1 = forward(params, view1)
        M, cache2 = forward(params, view2)

        if agent_cfg.variant == "none":
            sel_k = sel_m = NegativeSelection.empty(graph.num_nodes)
        else:
            if pools is None or (epoch - 1) % config.pool_refresh_interval == 0:
                sims = compute_similarities(K, M)
                pools = (build_pools(sims, VIEW_K), build_pools(sims, VIEW_M))
            sel_rng = stream(seed, _SELECT, epoch)
            sel_k = select_negatives(pools[0], state.kappa, agent_cfg.variant, sel_rng)
            sel_m = select_negatives(pools[1], state.kappa, agent_cfg.variant, sel_rng)

        dK, dM, value = loss_gradient(K, M, sel_k, config.tau, sel_m)
        if not np.isfinite(value):
            raise DivergenceError(epoch, value)
        g1 = backward(cache1, dK)
        g2 = backward(cache2, dM)
        adam_step(params, opt, [g1[0] + g2[0], g1[1] + g2[1]])
        if not all(np.all(np.isfinite(w)) for w in params.arrays()):
            raise DivergenceError(epoch, "non-finite parameters")

        kappa_used = state.kappa
        record_loss(state, value)
        decision, _ = decide(state, agent_cfg)
        wall_ms = round((time.perf_counter() - t0) * 1000, 3) if config.record_wall_time else 0
        rows.append((epoch, value, kappa_used, decision, wall_ms))
        if epoch % 50 == 0 or epoch == 1:
            log.info("epoch %d loss %.5f kappa %d %s", epoch, value, kappa_used, decision)

    result = RunResult(per_epoch=rows, config=config.to_dict(), seed=seed, build=build_id(),
                       params=params)
    if evaluate_at_end:
        if graph.labels is None:
            raise ConfigError("dataset has no labels; cannot evaluate")
        result.f1_mean, result.f1_std = evaluate(params, graph, config.protocol, seed)
    return result


# --------------------------------------------------------------------------
# experiment runners
# --------------------------------------------------------------------------

def sweep_configs(config: TrainConfig, kappa_max_list):
    """One config per maximum percentage; 0 means training without negatives."""
    values = list(kappa_max_list)
    if not values:
        raise ConfigError("kappa_max list is empty")
    if len(set(values)) != len(values):
        raise ConfigError(f"duplicate kappa_max values in {values}")
    if values != sorted(values):
        raise ConfigError(f"kappa_max values must be sorted: {values}")
    if values[0] < 0 or values[-1] > 100:
        raise ConfigError("kappa_max values must lie in [0, 100]")
    out = []
    for k in values:
        if k == 0:
            cfg = config.with_agent(kappa_init=0, kappa_max=0, variant="none")
        else:
            variant = "css" if config.agent.variant == "none" else config.agent.variant
            init = min(config.agent.kappa_init or 10, k)
            cfg = config.with_agent(kappa_init=init, kappa_max=k, variant=variant)
        out.append((str(k), cfg.validate()))
    return out


def variant_configs(config: TrainConfig, variants):
    variants = list(variants)
    if not variants:
        raise ConfigError("variant list is empty")
    if len(set(variants)) != len(variants):
        raise ConfigError(f"duplicate variants in {variants}")
    out = []
    for name in variants:
        agent = config.agent
        if name == "none":
            cfg = config.with_agent(kappa_init=0, kappa_max=0, variant="none")
        else:
            cfg = config.with_agent(variant=name, kappa_init=agent.kappa_init or 10,
                                    kappa_max=max(agent.kappa_max, agent.kappa_init or 10))
        try:
            out.append((name, cfg.validate()))
        except ConfigError as exc:
            raise ConfigError(f"variant {name!r}: {exc}") from None
    return out


def _run_one(config: TrainConfig) -> RunResult:
    result = train(config)
    result.params = None  # keep cross-process payloads small
    return result


def run_many(labelled_configs, jobs: int = 1):
    """Train every config; results come back in input order."""
    configs = [cfg for _, cfg in labelled_configs]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, configs))
    else:
        results = [_run_one(cfg) for cfg in configs]
    return [(key, res) for (key, _), res in zip(labelled_configs, results)]


def table_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for key, res in rows:
        writer.writerow([key, repr(res.f1_mean), repr(res.f1_std)])
    return buf.getvalue()


def write_table(rows, out_dir) -> str:
    """Write ``table.csv`` plus one ``<key>/`` run directory per row."""
    os.makedirs(out_dir, exist_ok=True)
    for key, res in rows:
        res.write(os.path.join(out_dir, key))
    path = os.path.join(out_dir, "table.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(table_csv(rows))
    return path


def sweep_percentages(config: TrainConfig, kappa_max_list=None, jobs: int = 1):
    """Train and evaluate once per maximum negative percentage."""
    values = config.sweep_kappa_max if kappa_max_list is None else kappa_max_list
    return run_many(sweep_configs(config, values), jobs)


def compare_variants(config: TrainConfig, variants=None, jobs: int = 1):
    """Train and evaluate once per selection variant with identical seeds."""
    names = config.variants if variants is None else variants
    return run_many(variant_configs(config, names), jobs)

"""Cumulative Sample Selection: per-epoch negative sampling and the kappa agent."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .loss import NegativeSelection
from .pools import NegPoolIndex, Pool

VARIANTS = ("css", "random", "easy", "medium", "hard", "none")

EXPLORE = "explore"
EXPLOIT = "exploit"
HOLD = "hold"


@dataclass(frozen=True)
class AgentConfig:
    kappa_init: int = 10
    kappa_max: int = 50
    window_half: int = 10
    xi: float = 0.01
    variant: str = "css"

    def validate(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not 0 <= self.kappa_init <= self.kappa_max <= 100:
            raise ValueError("need 0 <= kappa_init <= kappa_max <= 100")
        if self.kappa_init == 0 and self.variant != "none":
            raise ValueError("kappa_init = 0 is only valid with variant 'none'")
        if self.window_half < 1:
            raise ValueError("window_half must be >= 1")
        if self.xi < 0:
            raise ValueError("xi must be >= 0")


@dataclass
class AgentState:
    kappa: int
    window_half: int
    loss_window: deque = field(default=None)
    decisions: list = field(default_factory=list)
    epoch: int = 0

    def __post_init__(self):
        if self.loss_window is None:
            self.loss_window = deque(maxlen=2 * self.window_half)

    @classmethod
    def initial(cls, config: AgentConfig) -> "AgentState":
        return cls(kappa=config.kappa_init, window_half=config.window_half)


def round_half_up(x) -> int:
    return math.floor(Fraction(x) + Fraction(1, 2))


def per_pool_count(kappa, pool_size: int) -> int:
    """round-half-up(kappa% of the pool), at least 1, never more than the pool."""
    if pool_size <= 0:
        raise ValueError("cannot sample from an empty pool")
    count = round_half_up(Fraction(kappa) * pool_size / 100)
    return min(max(count, 1), pool_size)


def _sample_rows(candidates: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform size-``count`` subset of every row, without replacement."""
    if count == 0:
        return candidates[:, :0]
    keys = rng.random(candidates.shape)
    pick = np.argpartition(keys, count - 1, axis=1)[:, :count] if count < candidates.shape[1] \
        else np.broadcast_to(np.arange(candidates.shape[1]), candidates.shape)
    return np.take_along_axis(candidates, pick, axis=1)


def _to_selection(codes: np.ndarray, index: NegPoolIndex) -> NegativeSelection:
    n = index.num_nodes
    intra = np.zeros((n, n), dtype=bool)
    inter = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), codes.shape[1])
    flat = codes.ravel()
    view, node = flat // n, flat % n
    same = view == index.anchor_view
    intra[rows[same], node[same]] = True
    inter[rows[~same], node[~same]] = True
    return NegativeSelection(intra, inter)


def select_negatives(pools: NegPoolIndex, kappa, variant: str,
                     epoch_rng: np.random.Generator) -> NegativeSelection:
    """Draw this epoch's negatives for every anchor of one view."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n = pools.num_nodes
    if variant == "none":
        return NegativeSelection.empty(n)
    if not 0 < kappa <= 100:
        raise ValueError(f"kappa must lie in (0, 100] for variant {variant!r}, got {kappa}")

    sizes = pools.sizes()
    if min(sizes) == 0:
        # only happens for N <= 2
        raise ValueError(f"a negative pool is empty (sizes {sizes}); need N >= 3")
    counts = [per_pool_count(kappa, s) for s in sizes]
    total = sum(counts)

    if variant == "css":
        picked = [_sample_rows(pools.pool(p), c, epoch_rng)
                  for p, c in zip(Pool, counts)]
        codes = np.concatenate(picked, axis=1)
    elif variant == "random":
        codes = _sample_rows(pools.ranking, min(total, pools.num_candidates), epoch_rng)
    else:
        pool = pools.pool(variant)
        codes = _sample_rows(pool, min(total, pool.shape[1]), epoch_rng)
    return _to_selection(codes, pools)


def record_loss(state: AgentState, epoch_loss: float) -> AgentState:
    if not math.isfinite(epoch_loss):
        raise FloatingPointError(f"non-finite epoch loss {epoch_loss}")
    state.loss_window.append(float(epoch_loss))
    state.epoch += 1
    return state


def decide(state: AgentState, config: AgentConfig):
    """Explore (kappa + 1) once the loss window stops improving by more than ``xi``.

    Returns ``(decision, state)``; the decision is also appended to
    ``state.decisions`` as ``(epoch, decision, kappa)``.
    """
    n = config.window_half
    window = state.loss_window
    if len(window) < 2 * n:
        decision = HOLD
    else:
        values = list(window)
        older = sum(values[:n])
        recent = sum(values[n:])
        if recent + config.xi < older:
            decision = EXPLOIT
        elif state.kappa < config.kappa_max:
            decision = EXPLORE
            state.kappa += 1
            window.clear()
        else:
            decision = EXPLOIT
    state.decisions.append((state.epoch, decision, state.kappa))
    return decision, state

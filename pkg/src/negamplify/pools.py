"""Per-anchor easy / medium / hard partition of candidate negatives.

Candidates of an anchor are every node of both views except the anchor's
own pair. A candidate is encoded as ``view * N + node`` with view 0 = K and
view 1 = M. Rankings are ascending in cosine similarity (easiest first);
ties fall back to (view, node).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import ceil

import numpy as np

from .loss import SimilarityMatrices

VIEW_K = 0
VIEW_M = 1


class Pool(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


def pool_bounds(n: int):
    """``(easy_end, medium_end)`` for ``n`` sorted candidates (1-based inclusive ends)."""
    # integer ceilings; 0.25 * n in floats is exact anyway but this stays obviously so
    return -(-n // 4), -(-3 * n // 4)


def pool_sizes(n: int):
    e, m = pool_bounds(n)
    return e, m - e, n - m


@dataclass(frozen=True, eq=False)
class NegPoolIndex:
    """Rankings for the anchors of one view.

    ``ranking[i]`` lists candidate codes for anchor ``i`` sorted by
    ``similarity[i]`` ascending.
    """

    anchor_view: int
    ranking: np.ndarray     # N x n int
    similarity: np.ndarray  # N x n float
    easy_end: int
    medium_end: int

    @property
    def num_nodes(self) -> int:
        return self.ranking.shape[0]

    @property
    def num_candidates(self) -> int:
        return self.ranking.shape[1]

    def pool(self, which) -> np.ndarray:
        """Candidate codes of one pool for every anchor, shape ``N x |pool|``."""
        which = Pool(which)
        if which is Pool.EASY:
            return self.ranking[:, :self.easy_end]
        if which is Pool.MEDIUM:
            return self.ranking[:, self.easy_end:self.medium_end]
        return self.ranking[:, self.medium_end:]

    def sizes(self):
        return pool_sizes(self.num_candidates)

    def positive_code(self, anchor: int) -> int:
        return (1 - self.anchor_view) * self.num_nodes + anchor


def _rank(intra_sim, inter_sim, anchor_view):
    n = intra_sim.shape[0]
    other = 1 - anchor_view
    node = np.arange(n)
    off = ~np.eye(n, dtype=bool)
    # candidate table per anchor, diagonal removed, view 0 block first so
    # each row is already in code order; a stable sort on similarity then
    # gives the (sim, view, node) order
    intra_codes = np.broadcast_to(anchor_view * n + node, (n, n))[off].reshape(n, n - 1)
    inter_codes = np.broadcast_to(other * n + node, (n, n))[off].reshape(n, n - 1)
    intra_vals = intra_sim[off].reshape(n, n - 1)
    inter_vals = inter_sim[off].reshape(n, n - 1)
    if anchor_view == VIEW_K:
        codes = np.concatenate([intra_codes, inter_codes], axis=1)
        sims = np.concatenate([intra_vals, inter_vals], axis=1)
    else:
        codes = np.concatenate([inter_codes, intra_codes], axis=1)
        sims = np.concatenate([inter_vals, intra_vals], axis=1)
    order = np.argsort(sims, axis=1, kind="stable")
    return np.take_along_axis(codes, order, axis=1), np.take_along_axis(sims, order, axis=1)


def build_pools(sims: SimilarityMatrices, anchor_view: int = VIEW_K) -> NegPoolIndex:
    """Rank and split candidates for anchors in ``anchor_view``.

    For K anchors the intra similarities come from ``intra_k`` and inter
    similarities from ``inter``; M anchors use ``intra_m`` and ``inter.T``.
    """
    n = sims.num_nodes
    if n < 2:
        raise ValueError("need at least 2 nodes to have candidate negatives")
    if anchor_view == VIEW_K:
        ranking, sim = _rank(sims.intra_k, sims.inter, VIEW_K)
    elif anchor_view == VIEW_M:
        ranking, sim = _rank(sims.intra_m, sims.inter.T, VIEW_M)
    else:
        raise ValueError(f"unknown view {anchor_view}")
    easy_end, medium_end = pool_bounds(2 * n - 2)
    return NegPoolIndex(anchor_view, ranking, sim, easy_end, medium_end)


def build_pool_pair(sims: SimilarityMatrices):
    return build_pools(sims, VIEW_K), build_pools(sims, VIEW_M)


def rank_of(index: NegPoolIndex, anchor: int, candidate) -> int:
    """1-based rank of ``candidate`` (a code or a ``(view, node)`` pair)."""
    code = _code(index, candidate)
    if code == index.positive_code(anchor) or code == index.anchor_view * index.num_nodes + anchor:
        raise ValueError(f"candidate {candidate} is not a negative of anchor {anchor}")
    hits = np.flatnonzero(index.ranking[anchor] == code)
    if not len(hits):
        raise ValueError(f"unknown candidate {candidate}")
    return int(hits[0]) + 1


def _code(index, candidate):
    if isinstance(candidate, tuple):
        view, node = candidate
        return int(view) * index.num_nodes + int(node)
    return int(candidate)


def pool_membership(index: NegPoolIndex, anchor: int, candidate) -> Pool:
    return pool_of_rank(rank_of(index, anchor, candidate), index.num_candidates)


def pool_of_rank(rank: int, n: int) -> Pool:
    easy_end, medium_end = pool_bounds(n)
    if rank <= easy_end:
        return Pool.EASY
    if rank <= medium_end:
        return Pool.MEDIUM
    return Pool.HARD


def debug_report(index: NegPoolIndex, anchors=None, k: int = 5) -> str:
    """Text dump of pool boundaries and extreme similarities per anchor."""
    names = "KM"
    lines = [
        f"anchor_view={names[index.anchor_view]} candidates={index.num_candidates} "
        f"easy_end={index.easy_end} medium_end={index.medium_end} sizes={index.sizes()}"
    ]
    anchors = range(index.num_nodes) if anchors is None else anchors
    for i in anchors:
        s = index.similarity[i]
        low = " ".join(f"{x:.4f}" for x in s[:k])
        high = " ".join(f"{x:.4f}" for x in s[-k:])
        lines.append(f"{i}\tlowest: {low}\thighest: {high}")
    return "\n".join(lines) + "\n"

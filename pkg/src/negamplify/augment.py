"""Stochastic graph views: edge removal and column-wise feature masking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class AugmentConfig:
    edge_drop_prob_v1: float = 0.45
    feat_mask_prob_v1: float = 0.35
    edge_drop_prob_v2: float = 0.15
    feat_mask_prob_v2: float = 0.5

    def validate(self):
        for name, value in vars(self).items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    def view_probs(self, view: int):
        if view == 1:
            return self.edge_drop_prob_v1, self.feat_mask_prob_v1
        return self.edge_drop_prob_v2, self.feat_mask_prob_v2


@dataclass(frozen=True, eq=False)
class AugmentedView:
    graph: Graph
    kept_edge_flags: np.ndarray
    masked_columns: frozenset


def drop_edges(graph: Graph, prob: float, rng: np.random.Generator):
    """Keep each undirected edge independently with probability ``1 - prob``.

    Returns the kept ``(E', 2)`` edge array and one flag per original edge,
    in :meth:`Graph.edge_list` order.
    """
    edges = graph.edge_list()
    # one uniform per edge regardless of prob, so the stream position is fixed
    flags = rng.random(len(edges)) >= prob
    return edges[flags], flags


def mask_features(features: np.ndarray, prob: float, rng: np.random.Generator):
    """Zero whole feature columns, each with probability ``prob``."""
    keep = rng.random(features.shape[1]) >= prob
    masked = features * keep
    masked[:, ~keep] = 0.0  # also clears -0.0 / nan*0 artefacts
    return masked, frozenset(int(j) for j in np.flatnonzero(~keep))


def augment_view(graph: Graph, edge_prob: float, feat_prob: float,
                 rng: np.random.Generator) -> AugmentedView:
    kept, flags = drop_edges(graph, edge_prob, rng)
    feats, masked = mask_features(graph.features, feat_prob, rng)
    return AugmentedView(graph.with_edges(kept, feats), flags, masked)


def make_views(graph: Graph, config: AugmentConfig, epoch_rng: np.random.Generator):
    """Draw the two corrupted views for one epoch.

    Each view gets its own child stream of ``epoch_rng``, so the draws for
    view 1 do not depend on view 2's probabilities.
    """
    rng1, rng2 = epoch_rng.spawn(2)
    v1 = augment_view(graph, *config.view_probs(1), rng1)
    v2 = augment_view(graph, *config.view_probs(2), rng2)
    return v1, v2

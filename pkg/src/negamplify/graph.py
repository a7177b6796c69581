"""Undirected graphs stored as symmetric CSR, plus text I/O and an SBM generator."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp


class DatasetError(ValueError):
    """Raised for malformed or inconsistent dataset files."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph.

    ``indptr``/``indices`` hold the symmetric CSR adjacency (each undirected
    edge appears in both rows, neighbors sorted). Self-loops are never stored.
    """

    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    features: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.features):
            arr.setflags(write=False)
        if self.labels is not None:
            self.labels.setflags(write=False)

    @classmethod
    def from_edges(cls, num_nodes, edges, features, labels=None) -> "Graph":
        """Build a graph from an (E, 2) array of undirected edges.

        Reversed duplicates and repeated edges are merged. Self-loops raise.
        """
        num_nodes = int(num_nodes)
        if num_nodes < 1:
            raise DatasetError("graph needs at least one node")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
            raise DatasetError(f"edge endpoint out of range [0, {num_nodes})")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise DatasetError("self-loops are not allowed")
        features = np.array(features, dtype=np.float64, copy=True)
        if features.ndim != 2 or features.shape[0] != num_nodes:
            raise DatasetError(
                f"feature matrix must have {num_nodes} rows, got shape {features.shape}"
            )
        if labels is not None:
            labels = np.array(labels, dtype=np.int64, copy=True)
            if labels.shape != (num_nodes,):
                raise DatasetError("labels must have one entry per node")
            if labels.size and labels.min() < 0:
                raise DatasetError("labels must be non-negative class ids")

        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        canon = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(edges) else edges
        rows = np.concatenate([canon[:, 0], canon[:, 1]])
        cols = np.concatenate([canon[:, 1], canon[:, 0]])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(num_nodes + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(num_nodes, indptr, cols.astype(np.int64), features, labels)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return len(self.indices) // 2

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def edge_list(self) -> np.ndarray:
        """Undirected edges as an (E, 2) array with u < v, lexicographically sorted."""
        rows = np.repeat(np.arange(self.num_nodes), np.diff(self.indptr))
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix(
            (data, self.indices, self.indptr), shape=(self.num_nodes, self.num_nodes)
        )

    def is_symmetric(self) -> bool:
        adj = self.adjacency()
        return (adj != adj.T).nnz == 0

    def with_edges(self, edges: np.ndarray, features: np.ndarray) -> "Graph":
        """Copy sharing labels but with a new edge set and feature matrix."""
        return Graph.from_edges(self.num_nodes, edges, features, self.labels)


def degree(graph: Graph, node: int) -> int:
    """Stored neighbor count of ``node`` (no self-loop)."""
    if not 0 <= node < graph.num_nodes:
        raise IndexError(f"node {node} out of range [0, {graph.num_nodes})")
    return int(graph.indptr[node + 1] - graph.indptr[node])


# --------------------------------------------------------------------------
# file I/O
# --------------------------------------------------------------------------

def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            yield lineno, raw.rstrip("\r\n")


def load_dataset(edges_path, features_path, labels_path=None) -> Graph:
    """Read the tab-separated edge list, CSV features and optional labels."""
    rows = []
    for lineno, line in _read_lines(features_path):
        if not line.strip():
            raise DatasetError(f"{features_path}:{lineno}: empty feature row")
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError:
            raise DatasetError(f"{features_path}:{lineno}: malformed feature row") from None
    if not rows:
        raise DatasetError(f"{features_path}: no feature rows")
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DatasetError(f"{features_path}:{i}: expected {width} values, got {len(row)}")
    num_nodes = len(rows)
    features = np.array(rows, dtype=np.float64)

    edges = []
    for lineno, line in _read_lines(edges_path):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DatasetError(f"{edges_path}:{lineno}: expected '<src>\\t<dst>'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise DatasetError(f"{edges_path}:{lineno}: node ids must be integers") from None
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise DatasetError(f"{edges_path}:{lineno}: node id out of range [0, {num_nodes})")
        if u == v:
            raise DatasetError(f"{edges_path}:{lineno}: self-loop {u} {v} rejected")
        edges.append((u, v))

    labels = None
    if labels_path is not None:
        labels = np.full(num_nodes, -1, dtype=np.int64)
        for lineno, line in _read_lines(labels_path):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DatasetError(f"{labels_path}:{lineno}: expected '<node>\\t<class>'")
            try:
                node, cls = int(parts[0]), int(parts[1])
            except ValueError:
                raise DatasetError(f"{labels_path}:{lineno}: ids must be integers") from None
            if not 0 <= node < num_nodes:
                raise DatasetError(f"{labels_path}:{lineno}: node id out of range")
            if cls < 0:
                raise DatasetError(f"{labels_path}:{lineno}: label out of range")
            if labels[node] != -1:
                raise DatasetError(f"{labels_path}:{lineno}: node {node} labelled twice")
            labels[node] = cls
        if np.any(labels < 0):
            missing = int(np.flatnonzero(labels < 0)[0])
            raise DatasetError(f"{labels_path}: node {missing} has no label")

    return Graph.from_edges(num_nodes, np.array(edges, dtype=np.int64).reshape(-1, 2),
                            features, labels)


def write_dataset(graph: Graph, directory, prefix: str = "") -> dict:
    """Write ``edges.tsv``, ``features.csv`` (and ``labels.tsv``) into ``directory``.

    Edges are written once with u < v in lexicographic order; floats use
    ``repr`` so a load/write round trip is exact. Returns the written paths.
    """
    os.makedirs(directory, exist_ok=True)
    paths = {
        "edges": os.path.join(directory, f"{prefix}edges.tsv"),
        "features": os.path.join(directory, f"{prefix}features.csv"),
    }
    with open(paths["edges"], "w", encoding="utf-8", newline="\n") as fh:
        for u, v in graph.edge_list():
            fh.write(f"{u}\t{v}\n")
    with open(paths["features"], "w", encoding="utf-8", newline="\n") as fh:
        for row in graph.features:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    if graph.labels is not None:
        paths["labels"] = os.path.join(directory, f"{prefix}labels.tsv")
        with open(paths["labels"], "w", encoding="utf-8", newline="\n") as fh:
            for node, cls in enumerate(graph.labels):
                fh.write(f"{node}\t{int(cls)}\n")
    return paths


# --------------------------------------------------------------------------
# synthetic graphs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SbmSpec:
    blocks: int = 3
    nodes_per_block: int = 100
    p_in: float = 0.3
    p_out: float = 0.02
    feature_dim: int = 16
    feature_signal: float = 0.5
    seed: int = 0

    def validate(self):
        if self.blocks < 2:
            raise ValueError("blocks must be >= 2")
        if self.nodes_per_block < 2:
            raise ValueError("nodes_per_block must be >= 2")
        if not (0.0 <= self.p_out <= 1.0 and 0.0 <= self.p_in <= 1.0):
            raise ValueError("edge probabilities must lie in [0, 1]")
        # p_in == p_out == 0 is the documented edgeless degenerate case
        if self.p_out > self.p_in or (self.p_out == self.p_in and self.p_in > 0):
            raise ValueError("p_out must be smaller than p_in")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if self.feature_signal < 0:
            raise ValueError("feature_signal must be >= 0")


def generate_sbm(spec: SbmSpec) -> Graph:
    """Sample a planted-partition graph with Gaussian block features.

    Node ``v`` belongs to block ``v // nodes_per_block``. Each unordered pair
    is connected with ``p_in`` inside a block and ``p_out`` across blocks.
    Block ``b`` has mean ``feature_signal * e_(b mod F)``; every feature then
    gets independent N(0, 1) noise.
    """
    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n = spec.blocks * spec.nodes_per_block
    labels = np.repeat(np.arange(spec.blocks), spec.nodes_per_block)

    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, spec.p_in, spec.p_out)
    keep = rng.random(len(iu)) < prob
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    means = np.zeros((spec.blocks, spec.feature_dim))
    means[np.arange(spec.blocks), np.arange(spec.blocks) % spec.feature_dim] = spec.feature_signal
    features = means[labels] + rng.standard_normal((n, spec.feature_dim))
    return Graph.from_edges(n, edges, features, labels)

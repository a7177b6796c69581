"""Linear evaluation: l2-regularized softmax regression on frozen embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import EncoderParams, embed
from .graph import Graph

L2_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)


@dataclass(frozen=True)
class EvalProtocol:
    train_frac: float = 0.1
    val_frac: float = 0.1
    test_frac: float = 0.8
    num_repeats: int = 10
    l2_grid: tuple = L2_GRID
    probe_max_iters: int = 500
    probe_lr: float = 1.0  # upper bound; the step is also capped at 1/L

    def validate(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if min(fracs) <= 0 or abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("split fractions must be positive and sum to 1")
        if self.num_repeats < 1:
            raise ValueError("num_repeats must be >= 1")
        if self.probe_max_iters < 1 or self.probe_lr <= 0:
            raise ValueError("probe_max_iters and probe_lr must be positive")


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def random_split(num_nodes: int, protocol: EvalProtocol, rng: np.random.Generator) -> Split:
    perm = rng.permutation(num_nodes)
    n_train = max(1, int(round(protocol.train_frac * num_nodes)))
    n_val = max(1, int(round(protocol.val_frac * num_nodes)))
    if n_train + n_val >= num_nodes:
        raise ValueError(f"{num_nodes} nodes are too few for a train/val/test split")
    return Split(perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:])


def embed_for_eval(params: EncoderParams, graph: Graph) -> np.ndarray:
    """Embeddings of the unaugmented graph."""
    return embed(params, graph)


@dataclass
class Probe:
    W: np.ndarray  # D x C
    b: np.ndarray  # C
    mean: np.ndarray
    std: np.ndarray

    def logits(self, X):
        return ((X - self.mean) / self.std) @ self.W + self.b

    def predict(self, X):
        return np.argmax(self.logits(X), axis=1)


def probe_objective(W, b, X, y, l2):
    """Mean cross-entropy + ``l2/2 * |W|^2`` and its gradients ``(value, dW, db)``."""
    n = X.shape[0]
    z = X @ W + b
    z = z - z.max(axis=1, keepdims=True)
    log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    value = -log_p[np.arange(n), y].mean() + 0.5 * l2 * np.sum(W * W)
    delta = np.exp(log_p)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    return value, X.T @ delta + l2 * W, delta.sum(axis=0)


def train_probe(embeddings, labels, split, l2_strength: float,
                protocol: EvalProtocol = EvalProtocol(), num_classes: int | None = None) -> Probe:
    """Fit the probe on ``split.train`` (an index array or a :class:`Split`)."""
    train_idx = split.train if isinstance(split, Split) else np.asarray(split)
    X = np.asarray(embeddings, dtype=np.float64)[train_idx]
    y = np.asarray(labels)[train_idx]
    if len(np.unique(y)) < 2:
        raise ValueError("training split contains a single class")
    C = int(num_classes if num_classes is not None else np.max(labels) + 1)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 1e-12, std, 1.0)
    Xs = (X - mean) / std

    # step capped at 1/L, L bounding the objective's curvature (with bias column)
    aug = np.hstack([Xs, np.ones((len(Xs), 1))])
    lipschitz = 0.5 * np.linalg.norm(aug, 2) ** 2 / len(Xs) + l2_strength
    step = min(protocol.probe_lr, 1.0 / lipschitz)

    W = np.zeros((X.shape[1], C))
    b = np.zeros(C)
    for _ in range(protocol.probe_max_iters):
        _, dW, db = probe_objective(W, b, Xs, y, l2_strength)
        if np.sqrt(np.sum(dW * dW) + np.sum(db * db)) < 1e-6:
            break
        W -= step * dW
        b -= step * db
    return Probe(W, b, mean, std)


def micro_f1(predictions, labels) -> float:
    """Micro-averaged F1 for single-label predictions (equals accuracy)."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels differ in length")
    if predictions.size == 0:
        raise ValueError("micro-F1 of an empty set is undefined")
    tp = int(np.sum(predictions == labels))
    fp = predictions.size - tp  # each wrong prediction is one FP and one FN
    fn = fp
    return 2 * tp / (2 * tp + fp + fn)


def evaluate_embeddings(embeddings, labels, protocol: EvalProtocol, seed: int):
    """Mean and population std of test micro-F1 over ``num_repeats`` seeded splits."""
    labels = np.asarray(labels)
    num_classes = int(labels.max()) + 1
    scores = []
    for repeat in range(protocol.num_repeats):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, repeat)))
        split = random_split(len(labels), protocol, rng)
        best = None
        for l2 in protocol.l2_grid:
            probe = train_probe(embeddings, labels, split, l2, protocol, num_classes)
            val = micro_f1(probe.predict(embeddings[split.val]), labels[split.val])
            if best is None or val > best[0]:
                best = (val, probe)
        scores.append(micro_f1(best[1].predict(embeddings[split.test]), labels[split.test]))
    scores = np.array(scores)
    return float(scores.mean()), float(scores.std())


def evaluate(params: EncoderParams, graph: Graph, protocol: EvalProtocol, seed: int):
    if graph.labels is None:
        raise ValueError("evaluation needs node labels")
    return evaluate_embeddings(embed_for_eval(params, graph), graph.labels, protocol, seed)

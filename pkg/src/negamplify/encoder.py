"""Two-layer GCN encoder with hand-written backward pass and AdamW."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .augment import AugmentedView
from .graph import Graph


@dataclass
class EncoderParams:
    W1: np.ndarray  # F x H
    W2: np.ndarray  # H x D

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def output_dim(self) -> int:
        return self.W2.shape[1]

    def arrays(self):
        return [self.W1, self.W2]

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.W1.copy(), self.W2.copy())


def glorot(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(in_dim: int, hidden_dim: int, output_dim: int,
                rng: np.random.Generator) -> EncoderParams:
    return EncoderParams(glorot(in_dim, hidden_dim, rng), glorot(hidden_dim, output_dim, rng))


def normalize_adjacency(view) -> sp.csr_matrix:
    """D^-1/2 (A + I) D^-1/2 for the view's graph (accepts a Graph too)."""
    graph = view.graph if isinstance(view, AugmentedView) else view
    a_tilde = graph.adjacency() + sp.identity(graph.num_nodes, format="csr")
    deg = np.asarray(a_tilde.sum(axis=1)).ravel()
    d_inv_sqrt = sp.diags(1.0 / np.sqrt(deg))
    return (d_inv_sqrt @ a_tilde @ d_inv_sqrt).tocsr()


@dataclass
class ForwardCache:
    P: sp.csr_matrix
    PX: np.ndarray
    Z1: np.ndarray  # pre-activation of layer 1
    PH1: np.ndarray
    W2: np.ndarray


def forward(params: EncoderParams, view):
    """Embed every node: ``P relu(P X W1) W2``.

    Returns ``(embeddings, cache)``; the final layer has no activation.
    """
    graph = view.graph if isinstance(view, AugmentedView) else view
    X = graph.features
    if X.shape[1] != params.W1.shape[0]:
        raise ValueError(
            f"feature dim {X.shape[1]} does not match W1 rows {params.W1.shape[0]}"
        )
    P = normalize_adjacency(graph)
    PX = P @ X
    Z1 = PX @ params.W1
    H1 = np.maximum(Z1, 0.0)
    PH1 = P @ H1
    out = PH1 @ params.W2
    return out, ForwardCache(P, PX, Z1, PH1, params.W2)


def backward(cache: ForwardCache, grad_output: np.ndarray):
    """Gradients ``(dW1, dW2)`` given dLoss/dEmbeddings. Relies on P being symmetric."""
    if grad_output.shape != (cache.PH1.shape[0], cache.W2.shape[1]):
        raise ValueError(f"grad_output has shape {grad_output.shape}")
    dW2 = cache.PH1.T @ grad_output
    dH1 = cache.P @ (grad_output @ cache.W2.T)
    dZ1 = dH1 * (cache.Z1 > 0)
    dW1 = cache.PX.T @ dZ1
    return dW1, dW2


@dataclass
class OptimizerState:
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)


def adam_step(params: EncoderParams, state: OptimizerState, gradients) -> EncoderParams:
    """One AdamW update in place; weight decay is decoupled from the moments."""
    arrays = params.arrays()
    if not state.first_moment:
        state.first_moment = [np.zeros_like(a) for a in arrays]
        state.second_moment = [np.zeros_like(a) for a in arrays]
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    lr = state.learning_rate
    for p, g, m, v in zip(arrays, gradients, state.first_moment, state.second_moment):
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        if state.weight_decay:
            p -= lr * state.weight_decay * p
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params


def embed(params: EncoderParams, graph: Graph) -> np.ndarray:
    return forward(params, graph)[0]


# checkpoint format: text, one block per matrix
#   negamplify-params v1
#   W1 <rows> <cols>
#   <rows lines of space-separated repr floats>
#   W2 <rows> <cols>
#   ...

def save_params(params: EncoderParams, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_params(params))


def dump_params(params: EncoderParams) -> str:
    buf = io.StringIO()
    buf.write("negamplify-params v1\n")
    for name, arr in (("W1", params.W1), ("W2", params.W2)):
        buf.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            buf.write(" ".join(repr(float(x)) for x in row) + "\n")
    return buf.getvalue()


def load_params(path) -> EncoderParams:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "negamplify-params v1":
        raise ValueError(f"{path}: not a parameter checkpoint")
    mats = {}
    pos = 1
    while pos < len(lines):
        name, rows, cols = lines[pos].split()
        rows, cols = int(rows), int(cols)
        body = lines[pos + 1:pos + 1 + rows]
        mats[name] = np.array([[float(x) for x in ln.split()] for ln in body],
                              dtype=np.float64).reshape(rows, cols)
        pos += 1 + rows
    return EncoderParams(mats["W1"], mats["W2"])

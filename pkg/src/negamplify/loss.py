"""Cosine-similarity InfoNCE loss over explicitly selected negatives.

Selections are boolean ``N x N`` masks in anchor-row orientation: for the
K-anchored direction ``intra[i, j]`` selects ``K_j`` and ``inter[i, j]``
selects ``M_j`` as negatives of ``K_i``. The M-anchored direction uses the
same layout with the views swapped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class SimilarityMatrices:
    inter: np.ndarray    # cos(K_i, M_j)
    intra_k: np.ndarray  # cos(K_i, K_j)
    intra_m: np.ndarray  # cos(M_i, M_j)

    @property
    def num_nodes(self) -> int:
        return self.inter.shape[0]


@dataclass(frozen=True, eq=False)
class NegativeSelection:
    intra: np.ndarray
    inter: np.ndarray

    def __post_init__(self):
        if np.any(np.diagonal(self.intra)) or np.any(np.diagonal(self.inter)):
            raise ValueError("an anchor's own node cannot be its negative")

    @classmethod
    def empty(cls, n: int) -> "NegativeSelection":
        return cls(np.zeros((n, n), dtype=bool), np.zeros((n, n), dtype=bool))

    @classmethod
    def full(cls, n: int) -> "NegativeSelection":
        off = ~np.eye(n, dtype=bool)
        return cls(off.copy(), off.copy())

    @classmethod
    def from_sets(cls, n: int, intra_negs, inter_negs) -> "NegativeSelection":
        intra = np.zeros((n, n), dtype=bool)
        inter = np.zeros((n, n), dtype=bool)
        for i, js in enumerate(intra_negs):
            intra[i, list(js)] = True
        for i, js in enumerate(inter_negs):
            inter[i, list(js)] = True
        return cls(intra, inter)

    def counts(self) -> np.ndarray:
        return self.intra.sum(axis=1) + self.inter.sum(axis=1)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def _normalize_rows(X):
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return X / safe[:, None], norms


def compute_similarities(K, M) -> SimilarityMatrices:
    K = np.asarray(K, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if K.shape != M.shape:
        raise ValueError(f"shape mismatch: {K.shape} vs {M.shape}")
    Kn, _ = _normalize_rows(K)
    Mn, _ = _normalize_rows(M)
    clip = lambda S: np.clip(S, -1.0, 1.0)
    return SimilarityMatrices(clip(Kn @ Mn.T), clip(Kn @ Kn.T), clip(Mn @ Mn.T))


def _direction_terms(pos, intra_sim, inter_sim, sel: NegativeSelection, tau):
    """Per-anchor losses and softmax weights for one direction.

    Returns ``(losses, w_pos, w_intra, w_inter)`` where the weights are the
    softmax probabilities over the denominator terms.
    """
    n = len(pos)
    logits = np.full((n, 2 * n + 1), -np.inf)
    logits[:, 0] = pos / tau
    logits[:, 1:n + 1] = np.where(sel.intra, intra_sim / tau, -np.inf)
    logits[:, n + 1:] = np.where(sel.inter, inter_sim / tau, -np.inf)
    shift = logits.max(axis=1, keepdims=True)
    expd = np.exp(logits - shift)
    denom = expd.sum(axis=1)
    losses = np.log(denom) + shift[:, 0] - logits[:, 0]
    w = expd / denom[:, None]
    return losses, w[:, 0], w[:, 1:n + 1], w[:, n + 1:]


def _check(tau):
    if not tau > 0:
        raise ValueError(f"temperature must be positive, got {tau}")


def anchor_losses(sims: SimilarityMatrices, selection: NegativeSelection, tau: float,
                  selection_m: NegativeSelection | None = None):
    """Per-anchor losses ``(l_K, l_M)`` for the K-anchored and M-anchored directions."""
    _check(tau)
    sel_m = selection if selection_m is None else selection_m
    pos = np.diagonal(sims.inter)
    lk = _direction_terms(pos, sims.intra_k, sims.inter, selection, tau)[0]
    lm = _direction_terms(pos, sims.intra_m, sims.inter.T, sel_m, tau)[0]
    return lk, lm


def loss(sims: SimilarityMatrices, selection: NegativeSelection, tau: float,
         selection_m: NegativeSelection | None = None) -> float:
    """Symmetrized loss: mean over anchors of both directions.

    ``selection_m`` holds the negatives for anchors in view M; it defaults to
    ``selection``.
    """
    lk, lm = anchor_losses(sims, selection, tau, selection_m)
    return float(0.5 * (lk.mean() + lm.mean()))


def _normalization_backward(Xn, norms, dXn):
    # d(x/|x|) = (I - xn xn^T) / |x|; zero-norm rows have cosine fixed at 0
    radial = np.sum(Xn * dXn, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    dX = (dXn - Xn * radial) / safe[:, None]
    dX[norms == 0] = 0.0
    return dX


def loss_gradient(K, M, selection: NegativeSelection, tau: float,
                  selection_m: NegativeSelection | None = None):
    """Return ``(dK, dM, loss_value)`` for the symmetrized loss."""
    _check(tau)
    K = np.asarray(K, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if K.shape != M.shape:
        raise ValueError(f"shape mismatch: {K.shape} vs {M.shape}")
    sel_m = selection if selection_m is None else selection_m
    n = K.shape[0]
    Kn, k_norms = _normalize_rows(K)
    Mn, m_norms = _normalize_rows(M)
    S_km = Kn @ Mn.T
    S_kk = Kn @ Kn.T
    S_mm = Mn @ Mn.T
    pos = np.diagonal(S_km)

    lk, wk_pos, wk_intra, wk_inter = _direction_terms(pos, S_kk, S_km, selection, tau)
    lm, wm_pos, wm_intra, wm_inter = _direction_terms(pos, S_mm, S_km.T, sel_m, tau)

    # dLoss/dS for each similarity matrix; the 1/(2n) is the anchor mean of both directions
    scale = 1.0 / (2.0 * n * tau)
    G_km = (wk_inter + wm_inter.T) * scale
    G_km[np.diag_indices(n)] += (wk_pos - 1.0 + wm_pos - 1.0) * scale
    G_kk = wk_intra * scale
    G_mm = wm_intra * scale

    dKn = G_km @ Mn + (G_kk + G_kk.T) @ Kn
    dMn = G_km.T @ Kn + (G_mm + G_mm.T) @ Mn
    dK = _normalization_backward(Kn, k_norms, dKn)
    dM = _normalization_backward(Mn, m_norms, dMn)
    value = float(0.5 * (lk.mean() + lm.mean()))
    return dK, dM, value

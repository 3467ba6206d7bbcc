"""Dimensionality reduction of document embeddings before clustering.

Two reducers behind one interface: a manifold reducer (fuzzy kNN graph
optimized into low dimensions by negative-sampling SGD) and an exact-PCA
reference reducer used as an oracle in testing. Both are deterministic:
the manifold layout runs single-threaded with a seeded internal RNG and a
fixed edge iteration order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import curve_fit

from stont.embedding_io import EmbeddingMatrix

log = logging.getLogger(__name__)

SMOOTH_K_TOLERANCE = 1e-5
MIN_K_DIST_SCALE = 1e-3


@dataclass
class ReducedMatrix:
    """Low-dimensional coordinates keyed by the source matrix's row ids."""

    ids: list
    data: np.ndarray
    reducer: str  # "umap" or "pca"
    seed: int = 0

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.data.shape[0]

    def to_matrix(self) -> EmbeddingMatrix:
        name = f"umap:seed={self.seed}" if self.reducer == "umap" else "pca"
        return EmbeddingMatrix(kind="reduced", ids=list(self.ids),
                               data=self.data.astype(np.float32),
                               model_name=name)

    @classmethod
    def from_matrix(cls, matrix: EmbeddingMatrix) -> "ReducedMatrix":
        name = matrix.model_name
        if name.startswith("umap:seed="):
            return cls(ids=list(matrix.ids), data=np.asarray(matrix.data),
                       reducer="umap", seed=int(name.split("=", 1)[1]))
        return cls(ids=list(matrix.ids), data=np.asarray(matrix.data),
                   reducer="pca")


# ---------------------------------------------------------------------------
# exact kNN


def exact_knn(data: np.ndarray, k: int, block_size: int = 512):
    """Exact Euclidean k-nearest neighbors (self excluded), block-wise.

    Ties break on the smaller row index so results never depend on sort
    internals. Returns (indices, distances), each n x k.
    """
    x = np.asarray(data, dtype=np.float64)
    n = x.shape[0]
    if k >= n:
        raise ValueError(f"need more rows ({n}) than neighbors ({k})")
    sq = (x * x).sum(axis=1)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, block_size):
        stop = min(start + block_size, n)
        block = x[start:stop]
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (block @ x.T)
        np.maximum(d2, 0.0, out=d2)
        for i in range(stop - start):
            row = d2[i].copy()
            row[start + i] = np.inf  # exclude self
            order = np.lexsort((np.arange(n), row))[:k]
            indices[start + i] = order
            distances[start + i] = np.sqrt(row[order])
    return indices, distances


# ---------------------------------------------------------------------------
# PCA reference reducer


def pca_project(x: np.ndarray, n_components: int) -> np.ndarray:
    """Project rows of x onto the top principal axes of the centered data.

    Axis sign is fixed by making each axis's largest-magnitude loading
    positive, so output is fully deterministic.
    """
    x = np.asarray(x, dtype=np.float64)
    if n_components >= x.shape[1]:
        raise ValueError(
            f"n_components ({n_components}) must be < input dim ({x.shape[1]})"
        )
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    axes = vt[:n_components]
    for j in range(axes.shape[0]):
        pivot = np.argmax(np.abs(axes[j]))
        if axes[j, pivot] < 0:
            axes[j] = -axes[j]
    return centered @ axes.T


def reduce_pca(matrix: EmbeddingMatrix, n_components: int) -> ReducedMatrix:
    """Exact-PCA reference reducer behind the same interface as reduce()."""
    projected = pca_project(matrix.data, n_components)
    return ReducedMatrix(ids=list(matrix.ids), data=projected, reducer="pca")


# ---------------------------------------------------------------------------
# fuzzy kNN graph


def smooth_knn_calibration(distances: np.ndarray, k: int, n_iter: int = 64):
    """Per-point (rho, sigma) so each point's membership mass is log2(k)."""
    n = distances.shape[0]
    target = np.log2(k)
    rho = np.zeros(n)
    sigma = np.zeros(n)
    mean_all = distances.mean() if distances.size else 1.0
    for i in range(n):
        row = distances[i]
        nonzero = row[row > 0.0]
        rho[i] = nonzero[0] if nonzero.size else 0.0
        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(n_iter):
            psum = np.exp(-np.maximum(row - rho[i], 0.0) / mid).sum()
            if abs(psum - target) < SMOOTH_K_TOLERANCE:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigma[i] = mid
        mean_row = row.mean() if row.size else 0.0
        floor = MIN_K_DIST_SCALE * (mean_row if rho[i] > 0.0 else mean_all)
        if sigma[i] < floor:
            sigma[i] = floor
    return rho, sigma


def fuzzy_graph(indices: np.ndarray, distances: np.ndarray, n: int):
    """Symmetrized fuzzy membership graph as COO triples (heads, tails, weights).

    Pairwise symmetrization: P = W + W^T - W o W^T. Edge order is sorted
    (head, tail) so downstream iteration is deterministic.
    """
    k = indices.shape[1]
    rho, sigma = smooth_knn_calibration(distances, k)
    weights = {}
    for i in range(n):
        for j_idx in range(k):
            j = int(indices[i, j_idx])
            d = distances[i, j_idx]
            w = np.exp(-max(d - rho[i], 0.0) / sigma[i])
            weights[(i, j)] = w
    sym = {}
    for (i, j), w in weights.items():
        if (i, j) in sym:
            continue
        w_t = weights.get((j, i), 0.0)
        combined = w + w_t - w * w_t
        sym[(i, j)] = combined
        sym[(j, i)] = combined
    keys = sorted(sym)
    heads = np.array([key[0] for key in keys], dtype=np.int64)
    tails = np.array([key[1] for key in keys], dtype=np.int64)
    vals = np.array([sym[key] for key in keys], dtype=np.float64)
    return heads, tails, vals


def fit_output_curve(min_dist: float, spread: float = 1.0):
    """Fit the (a, b) of 1/(1 + a d^(2b)) to the min_dist falloff target."""
    xv = np.linspace(0, spread * 3, 300)
    yv = np.zeros_like(xv)
    yv[xv < min_dist] = 1.0
    mask = xv >= min_dist
    yv[mask] = np.exp(-(xv[mask] - min_dist) / spread)
    params, _ = curve_fit(lambda x, a, b: 1.0 / (1.0 + a * x ** (2 * b)), xv, yv)
    return float(params[0]), float(params[1])


# ---------------------------------------------------------------------------
# SGD layout (single-threaded, seeded xorshift RNG, fixed edge order)


@numba.njit(cache=True)
def _optimize_layout(embedding, heads, tails, epochs_per_sample, a, b,
                     n_epochs, negative_sample_rate, initial_alpha, seed):
    n, dim = embedding.shape
    n_edges = heads.shape[0]
    epoch_of_next_sample = epochs_per_sample.copy()
    epochs_per_negative = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative = epochs_per_negative.copy()
    state = np.uint64(seed * np.uint64(2654435761) + np.uint64(1))
    for epoch in range(n_epochs):
        alpha = initial_alpha * (1.0 - epoch / n_epochs)
        for e in range(n_edges):
            if epoch_of_next_sample[e] > epoch:
                continue
            i = heads[e]
            j = tails[e]
            d2 = 0.0
            for c in range(dim):
                diff = embedding[i, c] - embedding[j, c]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = (-2.0 * a * b * d2 ** (b - 1.0)) / (1.0 + a * d2 ** b)
            else:
                coeff = 0.0
            for c in range(dim):
                grad = coeff * (embedding[i, c] - embedding[j, c])
                if grad > 4.0:
                    grad = 4.0
                elif grad < -4.0:
                    grad = -4.0
                embedding[i, c] += alpha * grad
                embedding[j, c] -= alpha * grad
            epoch_of_next_sample[e] += epochs_per_sample[e]

            n_neg = int((epoch - epoch_of_next_negative[e])
                        / epochs_per_negative[e]) + 1
            for _ in range(n_neg):
                state ^= state << np.uint64(13)
                state ^= state >> np.uint64(7)
                state ^= state << np.uint64(17)
                t = int(state % np.uint64(n))
                if t == i:
                    continue
                d2 = 0.0
                for c in range(dim):
                    diff = embedding[i, c] - embedding[t, c]
                    d2 += diff * diff
                if d2 > 0.0:
                    coeff = (2.0 * b) / ((0.001 + d2) * (1.0 + a * d2 ** b))
                else:
                    coeff = 0.0
                for c in range(dim):
                    if coeff > 0.0:
                        grad = coeff * (embedding[i, c] - embedding[t, c])
                        if grad > 4.0:
                            grad = 4.0
                        elif grad < -4.0:
                            grad = -4.0
                    else:
                        grad = 4.0
                    embedding[i, c] += alpha * grad
            epoch_of_next_negative[e] += n_neg * epochs_per_negative[e]
    return embedding


def reduce(matrix: EmbeddingMatrix, config) -> ReducedMatrix:
    """Manifold reduction of a document matrix per the pipeline config.

    Exact kNN graph (Euclidean), per-point bandwidth calibration,
    symmetrization, then SGD layout on the membership cross-entropy.
    Deterministic for a fixed seed.
    """
    umap_cfg = config.umap
    x = np.asarray(matrix.data, dtype=np.float64)
    n = x.shape[0]
    k = umap_cfg.n_neighbors
    n_components = umap_cfg.n_components
    if n <= k:
        raise ValueError(f"need more rows ({n}) than n_neighbors ({k})")
    if n_components >= x.shape[1]:
        raise ValueError(
            f"n_components ({n_components}) must be < input dim ({x.shape[1]})"
        )
    if k < 5:
        log.warning("n_neighbors=%d is very low; the kNN graph may "
                    "disconnect and fragment clusters", k)

    # Distance-only pipeline: center first so a global translation of the
    # input cannot change anything downstream.
    x = x - x.mean(axis=0)

    block = 256 if umap_cfg.low_memory else max(n, 1)
    indices, distances = exact_knn(x, k, block_size=block)
    heads, tails, weights = fuzzy_graph(indices, distances, n)

    a, b = fit_output_curve(umap_cfg.min_dist)

    init = pca_project(x, n_components)
    scale = np.abs(init).max()
    if scale > 0:
        init = init / scale * 10.0
    embedding = np.ascontiguousarray(init, dtype=np.float64)

    w_max = weights.max()
    keep = weights >= w_max / float(umap_cfg.n_epochs)
    heads_k, tails_k, weights_k = heads[keep], tails[keep], weights[keep]
    epochs_per_sample = w_max / weights_k

    _optimize_layout(
        embedding, heads_k, tails_k, epochs_per_sample,
        a, b, umap_cfg.n_epochs, float(umap_cfg.negative_sample_rate),
        1.0, np.uint64(umap_cfg.seed),
    )
    return ReducedMatrix(ids=list(matrix.ids), data=embedding,
                         reducer="umap", seed=umap_cfg.seed)

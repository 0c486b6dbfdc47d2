"""Skip-gram with negative sampling over streamed walks.

Each walk position is a center word; every in-window position is a positive
context, and each positive draws k noise nodes.  The per-pair loss is

    L = -log sigma(u_center . v_context) - sum_neg log sigma(-u_center . v_neg)

with sigma the logistic function.  Walks come from walker.walk_stream one at a
time, so nothing proportional to the full corpus is ever held in memory.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import AliasTable, CsrGraph, _vose, first_order_tables, sample_alias
from .walker import WalkParams, walk_stream

_INIT_TAG = 0x1
_NEG_TAG = 0x2
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Resampling guard for the positive-collision rule; exceeding it means the
# noise distribution has no mass anywhere but the positive context.
_NEG_RESAMPLE_CAP = 10_000


@dataclass(frozen=True)
class SgnsParams:
    dim: int = 16
    window: int = 5
    negatives: int = 5
    learning_rate: float = 0.025
    epochs: int = 5
    noise_power: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise ValueError("dim, window, negatives and epochs must all be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class EmbeddingMatrix:
    """Input (center) and output (context) vectors, node_count x dim each."""

    in_vectors: np.ndarray
    out_vectors: np.ndarray

    @property
    def node_count(self) -> int:
        return self.in_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.in_vectors.shape[1]


def noise_distribution(occurrence_counts, power: float) -> AliasTable:
    """Alias table with sampling probability proportional to count^power.

    Zero-count nodes get zero probability at any power (including 0, where
    the distribution is uniform over the positive-count nodes).
    """
    counts = np.asarray(occurrence_counts, dtype=np.float64)
    if counts.ndim != 1 or len(counts) == 0:
        raise ValueError("occurrence counts must be a non-empty 1-D sequence")
    if np.any(counts < 0):
        raise ValueError("occurrence counts must be non-negative")
    if not np.any(counts > 0):
        raise ValueError("at least one occurrence count must be positive")
    weights = np.zeros_like(counts)
    positive = counts > 0
    weights[positive] = counts[positive] ** power
    return _vose(weights)


def _sigmoid(x: float) -> float:
    return 0.5 * (1.0 + math.tanh(0.5 * x))


def sgns_pair_loss(emb: EmbeddingMatrix, center: int, context: int, negatives) -> float:
    u = emb.in_vectors[center]
    loss = float(np.logaddexp(0.0, -u @ emb.out_vectors[context]))
    for j in negatives:
        loss += float(np.logaddexp(0.0, u @ emb.out_vectors[j]))
    return loss


def sgns_pair_gradients(emb: EmbeddingMatrix, center: int, context: int, negatives):
    """Gradients of the pair loss at the current parameters.

    Returns (grad_center, grad_context, grad_negatives) where the last is one
    row per negative sample; duplicate samples each contribute a row.
    """
    u = emb.in_vectors[center]
    v = emb.out_vectors[context]
    s_pos = _sigmoid(float(u @ v))
    grad_u = (s_pos - 1.0) * v
    grad_v = (s_pos - 1.0) * u
    grad_negs = np.empty((len(negatives), emb.dim))
    for row, j in enumerate(negatives):
        s_neg = _sigmoid(float(u @ emb.out_vectors[j]))
        grad_u = grad_u + s_neg * emb.out_vectors[j]
        grad_negs[row] = s_neg * u
    return grad_u, grad_v, grad_negs


def sgns_pair_update(emb: EmbeddingMatrix, center: int, context: int, negatives, lr: float) -> float:
    """One stochastic-gradient step on the pair loss; returns the pre-step loss."""
    loss = sgns_pair_loss(emb, center, context, negatives)
    grad_u, grad_v, grad_negs = sgns_pair_gradients(emb, center, context, negatives)
    emb.in_vectors[center] -= lr * grad_u
    emb.out_vectors[context] -= lr * grad_v
    if len(negatives):
        np.add.at(emb.out_vectors, np.asarray(negatives), -lr * grad_negs)
    return loss


def sample_negatives(noise: AliasTable, positive: int, k: int, rng) -> list:
    """Draw k noise nodes, resampling any draw that hits the positive context."""
    out = []
    for _ in range(k):
        for _attempt in range(_NEG_RESAMPLE_CAP):
            j = sample_alias(noise, rng)
            if j != positive:
                out.append(j)
                break
        else:
            raise RuntimeError("noise distribution has no mass outside the positive context")
    return out


def scheduled_lr(base_lr: float, step: int, total_steps: int) -> float:
    """Linear decay from base_lr at step 0 to base_lr/100 at the last step."""
    frac = min(step / total_steps, 1.0) if total_steps > 0 else 1.0
    return base_lr * (1.0 - frac) + (base_lr / 100.0) * frac


def pairs_per_walk(walk_length: int, window: int) -> int:
    return sum(
        min(walk_length - 1, s + window) - max(0, s - window) for s in range(walk_length)
    )


def train_embeddings(
    g: CsrGraph,
    walk_params: WalkParams,
    params: SgnsParams,
    workers: int = 1,
) -> EmbeddingMatrix:
    """Train node embeddings from streamed second-order walks.

    Single-threaded mode is bit-reproducible.  With workers > 1, walks are
    consumed concurrently and matrix updates are applied without locks;
    individual updates stay correct but their interleaving is not
    reproducible.
    """
    if g.node_count == 0:
        raise ValueError("cannot train embeddings on an empty graph")
    rng_init = np.random.default_rng(
        np.random.SeedSequence([params.seed & _MASK64, _INIT_TAG])
    )
    bound = 0.5 / params.dim
    emb = EmbeddingMatrix(
        in_vectors=rng_init.uniform(-bound, bound, size=(g.node_count, params.dim)),
        out_vectors=np.zeros((g.node_count, params.dim)),
    )
    noise = noise_distribution(g.weighted_degrees(), params.noise_power)
    tables = first_order_tables(g)
    eligible = int(np.count_nonzero(np.diff(g.offsets)))
    total_updates = params.epochs * eligible * pairs_per_walk(
        walk_params.walk_length, params.window
    )
    step = [0]  # shared mutable counter; approximate under concurrency

    def apply_walk(walk, rng_neg):
        c = params.window
        for s, center in enumerate(walk):
            lo = max(0, s - c)
            hi = min(len(walk) - 1, s + c)
            for tpos in range(lo, hi + 1):
                if tpos == s:
                    continue
                context = walk[tpos]
                negs = sample_negatives(noise, context, params.negatives, rng_neg)
                lr = scheduled_lr(params.learning_rate, step[0], total_updates)
                sgns_pair_update(emb, center, context, negs, lr)
                step[0] += 1

    def neg_rng(node, epoch):
        return np.random.default_rng(
            np.random.SeedSequence([params.seed & _MASK64, node, epoch, _NEG_TAG])
        )

    for epoch in range(params.epochs):
        stream = walk_stream(g, walk_params, epoch, tables)
        if workers <= 1:
            for walk in stream:
                apply_walk(walk, neg_rng(walk[0], epoch))
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                pending = []
                for walk in stream:
                    pending.append(pool.submit(apply_walk, walk, neg_rng(walk[0], epoch)))
                    if len(pending) >= workers * 4:
                        pending.pop(0).result()
                for fut in pending:
                    fut.result()
    return emb


def principal_components(matrix: np.ndarray, k: int = 2, tol: float = 1e-9, max_iter: int = 10_000):
    """Top-k covariance eigenvectors by power iteration with deflation.

    Returns (components, eigenvalues) with components of shape (dim, k).
    A direction whose eigenvalue vanishes (rank deficiency) comes back as a
    zero column.
    """
    x = np.asarray(matrix, dtype=np.float64)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / max(len(x) - 1, 1)
    dim = cov.shape[0]
    rng = np.random.default_rng(0xC0)
    components = np.zeros((dim, k))
    eigenvalues = np.zeros(k)
    scale = float(np.trace(cov))
    for idx in range(k):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        for _ in range(max_iter):
            w = cov @ v
            norm = np.linalg.norm(w)
            if norm <= tol * max(scale, 1.0):
                v = np.zeros(dim)
                break
            w /= norm
            if w @ v < 0:
                w = -w
            if np.linalg.norm(w - v) < tol:
                v = w
                break
            v = w
        lam = float(v @ cov @ v)
        if lam <= tol * max(scale, 1.0):
            break
        components[:, idx] = v
        eigenvalues[idx] = lam
        cov = cov - lam * np.outer(v, v)
    return components, eigenvalues


def pca_2d(emb) -> np.ndarray:
    """Mean-centered projection onto the top-2 principal directions."""
    matrix = emb.in_vectors if isinstance(emb, EmbeddingMatrix) else np.asarray(emb)
    if matrix.shape[0] < 2:
        raise ValueError("need at least two rows to project")
    centered = matrix - matrix.mean(axis=0)
    components, _ = principal_components(matrix, k=2)
    return centered @ components


def save_embeddings(emb, path) -> None:
    """Word2vec text convention: header `node_count dim`, then id + values."""
    matrix = emb.in_vectors if isinstance(emb, EmbeddingMatrix) else np.asarray(emb)
    with open(path, "w") as f:
        f.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for i, row in enumerate(matrix):
            f.write(f"{i} " + " ".join(repr(float(v)) for v in row) + "\n")


def load_embeddings(path) -> np.ndarray:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed embedding header")
        n, dim = int(header[0]), int(header[1])
        matrix = np.zeros((n, dim))
        for line in f:
            parts = line.split()
            if len(parts) != dim + 1:
                raise ValueError(f"{path}: malformed embedding row")
            matrix[int(parts[0])] = [float(p) for p in parts[1:]]
    return matrix

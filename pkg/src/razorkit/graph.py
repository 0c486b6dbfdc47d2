"""Immutable CSR graph with alias-table neighbor sampling.

The graph is stored as three flat arrays (offsets, targets, weights) so that
the neighbor list of a node is a contiguous, sorted slice.  Sorted slices give
O(log deg) edge-membership queries; per-node alias tables give O(1) weighted
neighbor draws after a linear-time preprocessing pass.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

_CSR_MAGIC = b"RZCSR1\n"

# Residual alias mass below this is treated as exact (floating-point dust
# from the Vose worklist subtractions).
_ALIAS_CLAMP = 1e-12


@dataclass(frozen=True)
class CsrGraph:
    """Compressed sparse-row adjacency with sorted neighbor slices."""

    node_count: int
    offsets: np.ndarray
    targets: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=np.int64)
        targets = np.asarray(self.targets, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if self.node_count < 0:
            raise ValueError("node_count must be non-negative")
        if offsets.shape != (self.node_count + 1,):
            raise ValueError("offsets must have length node_count+1")
        if offsets[0] != 0 or offsets[-1] != len(targets):
            raise ValueError("offsets must start at 0 and end at len(targets)")
        if np.any(np.diff(offsets) < 0):
            raise ValueError("offsets must be non-decreasing")
        if len(targets) != len(weights):
            raise ValueError("targets and weights must be aligned")
        if len(targets) and (targets.min() < 0 or targets.max() >= self.node_count):
            raise ValueError("target id out of range")
        if np.any(weights <= 0):
            raise ValueError("edge weights must be positive")
        for v in range(self.node_count):
            sl = targets[offsets[v]:offsets[v + 1]]
            if len(sl) > 1 and np.any(np.diff(sl) <= 0):
                raise ValueError(f"neighbor list of node {v} not strictly increasing")
        for arr in (offsets, targets, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "weights", weights)

    @property
    def edge_count(self) -> int:
        return len(self.targets)

    def degree(self, v: int) -> int:
        self._check_id(v)
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbors(self, v: int) -> np.ndarray:
        self._check_id(v)
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        self._check_id(v)
        return self.weights[self.offsets[v]:self.offsets[v + 1]]

    def weighted_degrees(self) -> np.ndarray:
        """Sum of incident edge weights per node (out-weights for directed)."""
        owner = np.repeat(np.arange(self.node_count), np.diff(self.offsets))
        return np.bincount(owner, weights=self.weights, minlength=self.node_count)

    def _check_id(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise ValueError(f"node id {v} out of range [0, {self.node_count})")


def build_csr(edges, directed: bool, node_count: int) -> CsrGraph:
    """Build a CSR graph from an (src, dst, weight) edge sequence.

    Undirected mode inserts both directions.  Duplicate (src, dst) pairs are
    aggregated by summing their weights, and each neighbor list is sorted.
    """
    if node_count < 0:
        raise ValueError("node_count must be non-negative")
    srcs, dsts, ws = [], [], []
    for src, dst, w in edges:
        if not (0 <= src < node_count and 0 <= dst < node_count):
            raise ValueError(f"edge ({src}, {dst}) has id out of range")
        if w <= 0:
            raise ValueError(f"edge ({src}, {dst}) has non-positive weight {w}")
        srcs.append(src)
        dsts.append(dst)
        ws.append(w)
        if not directed:
            srcs.append(dst)
            dsts.append(src)
            ws.append(w)
    src_arr = np.asarray(srcs, dtype=np.int64)
    dst_arr = np.asarray(dsts, dtype=np.int64)
    w_arr = np.asarray(ws, dtype=np.float64)

    # Sort by (src, dst) then collapse duplicates by weight summation.
    order = np.lexsort((dst_arr, src_arr))
    src_arr, dst_arr, w_arr = src_arr[order], dst_arr[order], w_arr[order]
    if len(src_arr):
        new_group = np.empty(len(src_arr), dtype=bool)
        new_group[0] = True
        new_group[1:] = (src_arr[1:] != src_arr[:-1]) | (dst_arr[1:] != dst_arr[:-1])
        idx = np.flatnonzero(new_group)
        src_u = src_arr[idx]
        dst_u = dst_arr[idx]
        w_u = np.add.reduceat(w_arr, idx)
    else:
        src_u = src_arr
        dst_u = dst_arr
        w_u = w_arr

    offsets = np.zeros(node_count + 1, dtype=np.int64)
    np.add.at(offsets, src_u + 1, 1)
    np.cumsum(offsets, out=offsets)
    return CsrGraph(node_count, offsets, dst_u, w_u)


def has_edge(g: CsrGraph, u: int, v: int) -> bool:
    """Edge-membership test by binary search on u's sorted neighbor slice."""
    g._check_id(u)
    g._check_id(v)
    sl = g.targets[g.offsets[u]:g.offsets[u + 1]]
    i = np.searchsorted(sl, v)
    return bool(i < len(sl) and sl[i] == v)


@dataclass(frozen=True)
class AliasTable:
    """Walker alias table: cell i holds P(stay at i) and the alias index."""

    prob: np.ndarray
    alias: np.ndarray

    def __post_init__(self):
        prob = np.asarray(self.prob, dtype=np.float64)
        alias = np.asarray(self.alias, dtype=np.int64)
        if prob.shape != alias.shape:
            raise ValueError("prob and alias must have the same length")
        prob.setflags(write=False)
        alias.setflags(write=False)
        object.__setattr__(self, "prob", prob)
        object.__setattr__(self, "alias", alias)

    def __len__(self) -> int:
        return len(self.prob)


def _vose(weights: np.ndarray) -> AliasTable:
    """Two-worklist alias construction; accepts zero weights, positive sum."""
    n = len(weights)
    total = float(weights.sum())
    scaled = weights * (n / total)
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.int64)

    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        if scaled[l] < 1.0 - _ALIAS_CLAMP:
            small.append(l)
        else:
            large.append(l)
    # Leftovers hold residual mass within rounding of 1; clamp to exact.
    for i in large:
        prob[i] = 1.0
    for i in small:
        prob[i] = 1.0
    return AliasTable(prob, alias)


def build_alias(weights) -> AliasTable:
    """Build an alias table for a positive weight vector in O(n)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise ValueError("weights must be a non-empty 1-D sequence")
    if np.any(w <= 0):
        raise ValueError("all weights must be positive")
    return _vose(w.copy())


def sample_alias(t: AliasTable, rng: np.random.Generator) -> int:
    """Draw one index from the table using exactly two uniform variates."""
    n = len(t.prob)
    i = int(rng.random() * n)
    if i == n:  # guards the measure-zero edge of the cast
        i = n - 1
    if rng.random() < t.prob[i]:
        return i
    return int(t.alias[i])


def sample_alias_many(t: AliasTable, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized batch of alias draws, same per-draw scheme as sample_alias."""
    n = len(t.prob)
    i = np.minimum((rng.random(size) * n).astype(np.int64), n - 1)
    stay = rng.random(size) < t.prob[i]
    return np.where(stay, i, t.alias[i])


def alias_distribution(t: AliasTable) -> np.ndarray:
    """Reconstruct the sampling distribution encoded by an alias table."""
    n = len(t.prob)
    p = t.prob.copy() / n
    np.add.at(p, t.alias, (1.0 - t.prob) / n)
    return p


def first_order_tables(g: CsrGraph) -> list:
    """Per-node alias tables over neighbor weights.

    Isolated nodes get None; sampling from one is the walker's error to raise.
    Total table storage is proportional to the edge count.
    """
    tables = []
    for v in range(g.node_count):
        w = g.neighbor_weights(v)
        tables.append(_vose(w.copy()) if len(w) else None)
    return tables


# ---------------------------------------------------------------------------
# I/O: edge-list text format and binary CSR snapshots


def read_edge_list(path) -> list:
    """Parse `src<TAB>dst[<TAB>weight]` lines; '#' comments are skipped."""
    edges = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 fields, got {len(parts)}")
            try:
                src, dst = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            edges.append((src, dst, w))
    return edges


def save_csr(g: CsrGraph, path) -> None:
    """Write the CSR arrays as little-endian binary with a magic header."""
    with open(path, "wb") as f:
        f.write(_CSR_MAGIC)
        f.write(struct.pack("<qq", g.node_count, g.edge_count))
        f.write(g.offsets.astype("<i8").tobytes())
        f.write(g.targets.astype("<i8").tobytes())
        f.write(g.weights.astype("<f8").tobytes())


def load_csr(path) -> CsrGraph:
    with open(path, "rb") as f:
        magic = f.read(len(_CSR_MAGIC))
        if magic != _CSR_MAGIC:
            raise ValueError(f"{path}: not a CSR snapshot (bad magic)")
        node_count, edge_count = struct.unpack("<qq", f.read(16))
        offsets = np.frombuffer(f.read(8 * (node_count + 1)), dtype="<i8").astype(np.int64)
        targets = np.frombuffer(f.read(8 * edge_count), dtype="<i8").astype(np.int64)
        weights = np.frombuffer(f.read(8 * edge_count), dtype="<f8").astype(np.float64)
    return CsrGraph(node_count, offsets, targets, weights)

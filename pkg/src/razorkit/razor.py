"""Razor entropy of a distribution over unordered pairs.

An encoder sees an unordered pair {i, j} and must deterministically output
one element; the razor entropy is the smallest Shannon entropy of the output
distribution over all such choice functions.  The closed form
min_q -sum p_ij log max(q_i, q_j) is evaluated at every induced q(z) and
must agree with the direct entropy minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# 2^20 encodings is the largest enumeration worth waiting for.
MAX_OFF_DIAGONAL_SUPPORT = 20

_CHUNK = 1 << 12


@dataclass(frozen=True)
class PairDistribution:
    """Probabilities over unordered pairs {i, j} with 0 <= i <= j < m."""

    m: int
    probs: dict

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("support size must be at least 1")
        canon = {}
        for (i, j), w in self.probs.items():
            if not (0 <= i < self.m and 0 <= j < self.m):
                raise ValueError(f"pair ({i}, {j}) outside support of size {self.m}")
            if w < 0:
                raise ValueError(f"pair ({i}, {j}) has negative probability")
            key = (i, j) if i <= j else (j, i)
            canon[key] = canon.get(key, 0.0) + float(w)
        total = sum(canon.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"pair probabilities sum to {total}, expected 1")
        object.__setattr__(self, "probs", canon)

    def support(self):
        """(i, j, p) triples with positive probability, i <= j."""
        return [(i, j, w) for (i, j), w in sorted(self.probs.items()) if w > 0]


@dataclass(frozen=True)
class OracleResult:
    value: float
    encoding: dict
    q: np.ndarray


def _split_support(dist: PairDistribution):
    diag = [(i, w) for i, j, w in dist.support() if i == j]
    off = [(i, j, w) for i, j, w in dist.support() if i != j]
    if len(off) > MAX_OFF_DIAGONAL_SUPPORT:
        raise ValueError(
            f"{len(off)} off-diagonal support pairs exceed the enumeration bound "
            f"of {MAX_OFF_DIAGONAL_SUPPORT}"
        )
    base = np.zeros(dist.m)
    for i, w in diag:
        base[i] += w
    return base, off


def _encoding_chunks(dist: PairDistribution):
    """Yield (masks, q) blocks covering all 2^k deterministic encodings.

    Bit b of a mask selects the second element of off-diagonal pair b;
    q rows hold the induced output distribution of each encoding.
    """
    base, off = _split_support(dist)
    k = len(off)
    for start in range(0, 1 << k, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, 1 << k), dtype=np.int64)
        q = np.tile(base, (len(masks), 1))
        for b, (i, j, w) in enumerate(off):
            picks_j = (masks >> b) & 1
            q[:, i] += w * (1 - picks_j)
            q[:, j] += w * picks_j
        yield masks, q


def _mask_to_encoding(dist: PairDistribution, mask: int) -> dict:
    base, off = _split_support(dist)
    encoding = {(i, i): i for i, w in enumerate(base) if w > 0}
    for b, (i, j, _) in enumerate(off):
        encoding[(i, j)] = j if (mask >> b) & 1 else i
    return encoding


def _induced_q(dist: PairDistribution, mask: int) -> np.ndarray:
    base, off = _split_support(dist)
    q = base.copy()
    for b, (i, j, w) in enumerate(off):
        q[j if (mask >> b) & 1 else i] += w
    return q


def razor_entropy_oracle(dist: PairDistribution) -> OracleResult:
    """Minimum output entropy over all deterministic pair encoders.

    Exhaustive: every choice function z with z(i, j) in {i, j} is scored by
    the Shannon entropy of its output distribution q(z), in nats, with the
    0 log 0 = 0 convention.
    """
    best_value = math.inf
    best_mask = 0
    for masks, q in _encoding_chunks(dist):
        ent = -np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0).sum(axis=1)
        idx = int(np.argmin(ent))
        if ent[idx] < best_value:
            best_value = float(ent[idx])
            best_mask = int(masks[idx])
    return OracleResult(
        value=best_value,
        encoding=_mask_to_encoding(dist, best_mask),
        q=_induced_q(dist, best_mask),
    )


def pair_objective(q, pairs) -> float:
    """-sum p_ij log max(q_i, q_j) over (i, j, p) triples."""
    q = np.asarray(q, dtype=np.float64)
    total = 0.0
    for i, j, w in pairs:
        mx = max(q[i], q[j])
        if mx <= 0.0:
            return math.inf
        total -= w * math.log(mx)
    return total


def razor_entropy_formula(dist: PairDistribution) -> float:
    """Closed-form value: min over encodings z of -sum p_ij log max(q(z)_i, q(z)_j)."""
    support = dist.support()
    ii = np.array([i for i, _, _ in support])
    jj = np.array([j for _, j, _ in support])
    ww = np.array([w for _, _, w in support])
    best = math.inf
    for _, q in _encoding_chunks(dist):
        # max(q_i, q_j) is positive on every support pair: the pair's own
        # mass lands on one of its two elements under any encoding.
        mx = np.maximum(q[:, ii], q[:, jj])
        obj = -(ww * np.log(mx)).sum(axis=1)
        best = min(best, float(obj.min()))
    return best


def empirical_razor(objective_samples) -> float:
    """Mean of per-item -log max(q_x, q_y) values; plug-in razor estimate."""
    samples = np.asarray(objective_samples, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    return float(samples.mean())


def read_pair_distribution(path) -> PairDistribution:
    """Parse `i j p` lines; '#' comments skipped; duplicates summed."""
    probs = {}
    max_id = -1
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected `i j p`, got {len(parts)} fields")
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
            key = (i, j) if i <= j else (j, i)
            probs[key] = probs.get(key, 0.0) + w
            max_id = max(max_id, i, j)
    if max_id < 0:
        raise ValueError(f"{path}: no pairs found")
    return PairDistribution(m=max_id + 1, probs=probs)


def write_pair_distribution(dist: PairDistribution, path) -> None:
    with open(path, "w") as f:
        for i, j, w in dist.support():
            f.write(f"{i} {j} {repr(float(w))}\n")

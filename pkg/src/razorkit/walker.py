"""Second-order biased random walks over a CSR graph.

Transitions follow the two-parameter scheme: standing at v having arrived
from t, neighbor x is drawn with probability proportional to
weight(v, x) * alpha(t, x), where alpha is 1/p for backtracking, 1 for
neighbors of t, and 1/q otherwise.  Two samplers are provided: an exact
merge-pass reference and a rejection sampler that proposes from the
first-order alias table and accepts with probability alpha / alpha_max.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CsrGraph, first_order_tables, sample_alias, sample_alias_many

# Expected proposals per accepted step are bounded by max{a/b : a,b in {1,p,q}},
# a small constant for any sane (p, q); hitting the cap means broken inputs.
RETRY_CAP = 10_000

# Keeps the per-epoch shuffle stream disjoint from per-walk (seed, node, epoch)
# streams, whose entropy entries are all small integers.
_SHUFFLE_TAG = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class WalkParams:
    """Walk shape and bias parameters; defaults suit embedding training."""

    p: float = 1.0
    q: float = 1.0
    walk_length: int = 100
    walks_per_node: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.walk_length < 2:
            raise ValueError("walk_length must be at least 2")
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be at least 1")

    @property
    def alpha_max(self) -> float:
        return max(1.0, 1.0 / self.p, 1.0 / self.q)


def alpha(g: CsrGraph, t: int, x: int, p: float, q: float) -> float:
    """Bias factor for stepping to x given the walk came from t."""
    if x == t:
        return 1.0 / p
    sl = g.neighbors(t)
    i = np.searchsorted(sl, x)
    if i < len(sl) and sl[i] == x:
        return 1.0
    return 1.0 / q


def exact_step_distribution(g: CsrGraph, t: int, v: int, p: float, q: float):
    """Neighbors of v and their exact transition probabilities from (t, v).

    A single forward merge over the sorted neighbor lists of v and t
    classifies each candidate without per-candidate binary searches.
    """
    nbrs = g.neighbors(v)
    if len(nbrs) == 0:
        raise ValueError(f"node {v} has no neighbors to step to")
    wts = g.neighbor_weights(v)
    t_nbrs = g.neighbors(t)
    scores = np.empty(len(nbrs))
    j = 0
    for i, x in enumerate(nbrs):
        while j < len(t_nbrs) and t_nbrs[j] < x:
            j += 1
        if x == t:
            a = 1.0 / p
        elif j < len(t_nbrs) and t_nbrs[j] == x:
            a = 1.0
        else:
            a = 1.0 / q
        scores[i] = wts[i] * a
    return nbrs, scores / scores.sum()


def step_exact(g: CsrGraph, t: int, v: int, params: WalkParams, rng) -> int:
    nbrs, probs = exact_step_distribution(g, t, v, params.p, params.q)
    i = np.searchsorted(np.cumsum(probs), rng.random())
    return int(nbrs[min(i, len(nbrs) - 1)])


def step_rejection(g: CsrGraph, t: int, v: int, params: WalkParams, tables, rng) -> int:
    node, _ = step_rejection_counted(g, t, v, params, tables, rng)
    return node


def step_rejection_counted(g, t, v, params, tables, rng):
    """Rejection-sampled step; also reports how many proposals it took."""
    table = tables[v]
    if table is None:
        raise ValueError(f"node {v} has no neighbors to step to")
    nbrs = g.neighbors(v)
    amax = params.alpha_max
    for trial in range(1, RETRY_CAP + 1):
        x = int(nbrs[sample_alias(table, rng)])
        # Acceptance weight alpha/amax lies in [0,1]; with p=q=1 it is
        # identically 1, so the loop runs exactly once.
        if rng.random() < alpha(g, t, x, params.p, params.q) / amax:
            return x, trial
    raise RuntimeError(
        f"rejection sampler exceeded {RETRY_CAP} proposals at (t={t}, v={v}); "
        "check p, q and edge weights"
    )


def step_rejection_batch(g, t, v, params, tables, rng, size: int) -> np.ndarray:
    """Draw `size` independent rejection-sampled steps from (t, v) at once.

    Same proposal table and acceptance rule as step_rejection, vectorized
    for statistical tests that need 1e5+ draws per state.
    """
    table = tables[v]
    if table is None:
        raise ValueError(f"node {v} has no neighbors to step to")
    nbrs = g.neighbors(v)
    t_nbrs = g.neighbors(t)
    amax = params.alpha_max
    out = np.empty(size, dtype=np.int64)
    filled = 0
    for _ in range(RETRY_CAP):
        if filled == size:
            return out
        prop = nbrs[sample_alias_many(table, rng, size - filled)]
        if len(t_nbrs):
            pos = np.minimum(np.searchsorted(t_nbrs, prop), len(t_nbrs) - 1)
            linked = t_nbrs[pos] == prop
        else:
            linked = np.zeros(len(prop), dtype=bool)
        a = np.where(prop == t, 1.0 / params.p, np.where(linked, 1.0, 1.0 / params.q))
        accepted = prop[rng.random(len(prop)) < a / amax]
        out[filled:filled + len(accepted)] = accepted
        filled += len(accepted)
    raise RuntimeError(f"rejection sampler exceeded {RETRY_CAP} proposal rounds at (t={t}, v={v})")


def generate_walk(g: CsrGraph, start: int, params: WalkParams, tables, rng) -> list:
    """One walk of walk_length nodes; truncates early only at a dead end."""
    if tables[start] is None:
        raise ValueError(f"cannot start a walk at isolated node {start}")
    nbrs = g.neighbors(start)
    walk = [start, int(nbrs[sample_alias(tables[start], rng)])]
    while len(walk) < params.walk_length:
        t, v = walk[-2], walk[-1]
        if tables[v] is None:
            break
        walk.append(step_rejection(g, t, v, params, tables, rng))
    return walk


def walk_rng(seed: int, node: int, epoch: int) -> np.random.Generator:
    """Independent, reproducible stream for one (seed, node, epoch) walk."""
    return np.random.default_rng(
        np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, node, epoch])
    )


def walk_stream(g: CsrGraph, params: WalkParams, epoch: int, tables=None):
    """Yield one walk per eligible start node in a seeded per-epoch order.

    Walks are generated lazily, never stored, and each walk's rng stream
    depends only on (seed, node, epoch) so any worker assignment produces
    identical output.
    """
    if tables is None:
        tables = first_order_tables(g)
    eligible = np.flatnonzero(np.diff(g.offsets) > 0)
    shuffle_rng = np.random.default_rng(
        np.random.SeedSequence([params.seed & 0xFFFFFFFFFFFFFFFF, epoch, _SHUFFLE_TAG])
    )
    for node in shuffle_rng.permutation(eligible):
        yield generate_walk(g, int(node), params, tables, walk_rng(params.seed, int(node), epoch))

"""Coalitional-game attribution engine.

Wraps an arbitrary subset-value handle with memoization and a distinct-call
counter, computes exact Shapley values by full enumeration for small games,
and computes greedy top-k attributions whose prefix sums carry the
(1 - 1/e) guarantee on monotone submodular games.  Property checkers for
monotonicity, submodularity and relaxed top-k efficiency are exhaustive and
therefore limited to small player counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Exhaustive routines enumerate all 2^n subsets.
MAX_EXHAUSTIVE_PLAYERS = 12

CHECK_TOL = 1e-9


class CoalitionalGame:
    """Player set {0..n-1} with a memoized value handle, zero on the empty set.

    The handle is called with a frozenset of player indices.  Each distinct
    subset is evaluated once; repeats are served from the memo without
    touching the evaluation counter.
    """

    def __init__(self, n: int, value_fn):
        if n < 1:
            raise ValueError("need at least one player")
        self.n = n
        self._fn = value_fn
        self._memo = {}
        self._evaluations = 0
        empty = self.value(0)
        if abs(empty) > 1e-12:
            raise ValueError(f"value of the empty set must be 0, got {empty}")

    @property
    def evaluation_count(self) -> int:
        return self._evaluations

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def _to_mask(self, players) -> int:
        if isinstance(players, (int, np.integer)):
            mask = int(players)
            if mask < 0 or mask > self.full_mask:
                raise ValueError(f"bitmask {mask} outside 0..{self.full_mask}")
            return mask
        mask = 0
        for i in players:
            if not 0 <= i < self.n:
                raise ValueError(f"player {i} out of range")
            mask |= 1 << i
        return mask

    def value(self, players) -> float:
        mask = self._to_mask(players)
        if mask not in self._memo:
            subset = frozenset(i for i in range(self.n) if mask >> i & 1)
            self._memo[mask] = float(self._fn(subset))
            self._evaluations += 1
        return self._memo[mask]


@dataclass(frozen=True)
class Attribution:
    """Per-player attribution phi and the greedy selection order sigma."""

    phi: np.ndarray
    sigma: tuple

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "sigma", tuple(int(i) for i in self.sigma))


def _require_small(game: CoalitionalGame, what: str) -> None:
    if game.n > MAX_EXHAUSTIVE_PLAYERS:
        raise ValueError(
            f"{what} enumerates all subsets; n={game.n} exceeds {MAX_EXHAUSTIVE_PLAYERS}"
        )


def exact_shapley(game: CoalitionalGame) -> np.ndarray:
    """Shapley values by direct enumeration of all subsets."""
    _require_small(game, "exact_shapley")
    n = game.n
    fact = [math.factorial(s) for s in range(n + 1)]
    weight = [fact[s] * fact[n - s - 1] / fact[n] for s in range(n)]
    phi = np.zeros(n)
    for mask in range(1 << n):
        s = mask.bit_count()
        base = game.value(mask)
        for i in range(n):
            if not mask >> i & 1:
                phi[i] += weight[s] * (game.value(mask | 1 << i) - base)
    return phi


def topk_shapley(game: CoalitionalGame) -> Attribution:
    """Greedy attribution: phi of each pick is its marginal gain at selection.

    Ties go to the smallest player index, making the order reproducible.
    The phi values telescope, so their sum is exactly the grand-coalition
    value, and on monotone submodular games every size-k prefix is within a
    (1 - 1/e) factor of the best size-k coalition.
    """
    n = game.n
    phi = np.zeros(n)
    sigma = []
    prefix = 0
    base = game.value(0)
    remaining = list(range(n))
    while remaining:
        best_player = None
        best_gain = -math.inf
        for i in remaining:
            gain = game.value(prefix | 1 << i) - base
            if gain > best_gain:
                best_gain = gain
                best_player = i
        phi[best_player] = best_gain
        sigma.append(best_player)
        remaining.remove(best_player)
        prefix |= 1 << best_player
        base = game.value(prefix)
    return Attribution(phi=phi, sigma=tuple(sigma))


def is_monotone(game: CoalitionalGame) -> bool:
    """Exhaustive check that adding a player never lowers the value."""
    _require_small(game, "is_monotone")
    for mask in range(1 << game.n):
        base = game.value(mask)
        for i in range(game.n):
            if not mask >> i & 1 and game.value(mask | 1 << i) < base - CHECK_TOL:
                return False
    return True


def is_submodular(game: CoalitionalGame) -> bool:
    """Exhaustive diminishing-returns check over all (X, x1, x2) triples."""
    _require_small(game, "is_submodular")
    n = game.n
    for mask in range(1 << n):
        base = game.value(mask)
        outside = [i for i in range(n) if not mask >> i & 1]
        for a_pos, x1 in enumerate(outside):
            v1 = game.value(mask | 1 << x1)
            for x2 in outside[a_pos + 1:]:
                v2 = game.value(mask | 1 << x2)
                both = game.value(mask | 1 << x1 | 1 << x2)
                if v1 + v2 < both + base - CHECK_TOL:
                    return False
    return True


def check_relaxed_topk_efficiency(game: CoalitionalGame, attribution: Attribution) -> bool:
    """For every k: (1 - 1/e) * max_{|S|=k} f(S) <= sum of the k largest phi."""
    _require_small(game, "check_relaxed_topk_efficiency")
    n = game.n
    best_by_size = [-math.inf] * (n + 1)
    best_by_size[0] = 0.0
    for mask in range(1 << n):
        s = mask.bit_count()
        best_by_size[s] = max(best_by_size[s], game.value(mask))
    ordered = np.sort(attribution.phi)[::-1]
    prefix_sums = np.concatenate([[0.0], np.cumsum(ordered)])
    factor = 1.0 - 1.0 / math.e
    return all(
        factor * best_by_size[k] <= prefix_sums[k] + CHECK_TOL for k in range(n + 1)
    )


def additive_game(values) -> CoalitionalGame:
    v = np.asarray(values, dtype=np.float64)
    return CoalitionalGame(len(v), lambda s: float(sum(v[i] for i in s)))


def coverage_game(covers, universe_size: int) -> CoalitionalGame:
    """f(S) = size of the union of the players' cover sets."""
    sets = [frozenset(c) for c in covers]
    for c in sets:
        if any(not 0 <= e < universe_size for e in c):
            raise ValueError("cover element outside the universe")
    return CoalitionalGame(len(sets), lambda s: float(len(frozenset().union(*(sets[i] for i in s)) if s else frozenset())))


def _entropy(probs) -> float:
    return float(-sum(p * math.log(p) for p in probs if p > 0))


def xor_entropy_game() -> CoalitionalGame:
    """Two uniform bits predicting their XOR; value = entropy reduction.

    Either bit alone leaves the target uniform, both together determine it,
    so the gains are complementary rather than diminishing.
    """
    outcomes = [(b1, b2, b1 ^ b2) for b1 in (0, 1) for b2 in (0, 1)]
    joint = {o: 0.25 for o in outcomes}

    def value(subset):
        # H(b3) - H(b3 | bits in subset), from the joint table.
        target_marginal = {}
        for (b1, b2, b3), w in joint.items():
            target_marginal[b3] = target_marginal.get(b3, 0.0) + w
        prior = _entropy(target_marginal.values())
        cond = {}
        for (b1, b2, b3), w in joint.items():
            key = tuple((b1, b2)[i] for i in sorted(subset))
            cond.setdefault(key, {})
            cond[key][b3] = cond[key].get(b3, 0.0) + w
        posterior = 0.0
        for dist in cond.values():
            mass = sum(dist.values())
            posterior += mass * _entropy(p / mass for p in dist.values())
        return prior - posterior

    return CoalitionalGame(2, value)


def read_game_table(path) -> CoalitionalGame:
    """Parse `bitmask value` lines into a fully tabulated game."""
    table = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected `bitmask value`")
            table[int(parts[0])] = float(parts[1])
    if not table:
        raise ValueError(f"{path}: empty game table")
    n = max(table).bit_length()
    if n < 1:
        raise ValueError(f"{path}: table must mention at least one non-empty subset")
    missing = [mask for mask in range(1 << n) if mask not in table]
    if missing:
        raise ValueError(f"{path}: table missing {len(missing)} subsets, first {missing[0]}")

    def value(subset):
        return table[sum(1 << i for i in subset)]

    return CoalitionalGame(n, value)

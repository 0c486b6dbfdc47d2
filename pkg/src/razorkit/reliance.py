"""Feature-reliance harness.

Retrains the counterparty model on feature subsets, turns the averaged
out-of-sample loss improvements into a coalitional game, and attributes
the total improvement with greedy top-k Shapley values. The expensive
part is the subset losses, so those are memoized behind a lock and can
be pre-computed concurrently; the attribution itself replays the memo.
"""

import dataclasses
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .model import FEATURES, ModelConfig, train
from .shapley import CoalitionalGame, topk_shapley

EFFICIENCY_FACTOR = 1.0 - 1.0 / np.e


@dataclasses.dataclass(frozen=True)
class FeatureGameSpec:
    """What to retrain on, and how often, for each feature subset."""

    records: tuple
    config: ModelConfig
    universe: tuple = FEATURES
    runs_per_subset: int = 5
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        universe = tuple(self.universe)
        if not universe:
            raise ValueError("feature universe must not be empty")
        if len(set(universe)) != len(universe):
            raise ValueError("feature universe contains duplicates")
        unknown = set(universe) - set(FEATURES)
        if unknown:
            raise ValueError(f"unknown features in universe: {sorted(unknown)}")
        object.__setattr__(self, "universe", universe)
        if self.runs_per_subset < 1:
            raise ValueError("runs_per_subset must be at least 1")


def run_seed(base_seed: int, mask: int, run: int) -> int:
    """Training seed for one run of one subset.

    Derived from (base seed, canonical subset bitmask, run index) so
    subsets are comparable without sharing identically-seeded runs.
    """
    ss = np.random.SeedSequence([base_seed, mask, run])
    return int(ss.generate_state(1, np.uint64)[0])


def _mask_of(spec: FeatureGameSpec, subset) -> int:
    mask = 0
    for name in subset:
        try:
            mask |= 1 << spec.universe.index(name)
        except ValueError:
            raise ValueError(f"feature {name!r} not in the game universe") from None
    return mask


def _features_of(spec: FeatureGameSpec, mask: int):
    return frozenset(
        name for i, name in enumerate(spec.universe) if mask & (1 << i)
    )


class _LossTable:
    """Mean subset losses keyed by bitmask; safe to fill from threads."""

    def __init__(self, spec: FeatureGameSpec):
        self._spec = spec
        self._values = {}
        self._lock = threading.Lock()

    def loss(self, mask: int) -> float:
        with self._lock:
            if mask in self._values:
                return self._values[mask]
        value = self._measure(mask)
        with self._lock:
            return self._values.setdefault(mask, value)

    def _measure(self, mask: int) -> float:
        spec = self._spec
        features = _features_of(spec, mask)
        losses = []
        for run in range(spec.runs_per_subset):
            seed = run_seed(spec.base_seed, mask, run)
            config = dataclasses.replace(spec.config, seed=seed)
            result = train(list(spec.records), config, features)
            losses.append(result.test_losses[-1])
        return float(np.mean(losses))

    def snapshot(self):
        with self._lock:
            return dict(sorted(self._values.items()))


def subset_loss(spec: FeatureGameSpec, subset) -> float:
    """Mean test razor loss of runs_per_subset models trained on subset.

    The empty subset trains the bias-only model: no inputs, so the
    network reduces to a learned logit vector through the masked softmax.
    """
    return _LossTable(spec).loss(_mask_of(spec, subset))


def _build(spec: FeatureGameSpec):
    table = _LossTable(spec)

    def value_fn(players) -> float:
        mask = 0
        for i in players:
            mask |= 1 << i
        return table.loss(0) - table.loss(mask)

    return CoalitionalGame(len(spec.universe), value_fn), table


def build_feature_game(spec: FeatureGameSpec) -> CoalitionalGame:
    """Game over features whose value is the loss improvement h({})-h(S)."""
    return _build(spec)[0]


@dataclasses.dataclass(frozen=True)
class RelianceReport:
    """Attribution output plus the measurements behind it.

    marginal_gains has one row per greedy step: the prefix already
    selected and, for every feature outside it, the gain in explained
    loss from adding that feature alone. All values are in nats.
    relaxed_efficiency compares each prefix sum of descending phi with
    (1 - 1/e) times the best same-size subset among evaluated ones; it
    is reported, not asserted, because measured losses need not be
    submodular.
    """

    universe: tuple
    sigma: tuple
    phi: tuple
    h_empty: float
    total_value: float
    subset_losses: dict
    marginal_gains: tuple
    relaxed_efficiency: tuple
    evaluations: int


def _prewarm(spec, table, workers: int):
    n = len(spec.universe)
    h_empty = table.loss(0)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        prefix_mask = 0
        chosen = set()
        for _ in range(n):
            candidates = [i for i in range(n) if i not in chosen]
            futures = {
                i: pool.submit(table.loss, prefix_mask | (1 << i))
                for i in candidates
            }
            best_index = None
            best_value = None
            for i in candidates:
                value = h_empty - futures[i].result()
                if best_value is None or value > best_value:
                    best_index, best_value = i, value
            chosen.add(best_index)
            prefix_mask |= 1 << best_index


def _relaxed_efficiency_rows(phi, losses, h_empty, n):
    best_by_size = {}
    for mask, loss in losses.items():
        size = bin(mask).count("1")
        value = h_empty - loss
        if size not in best_by_size or value > best_by_size[size]:
            best_by_size[size] = value
    ordered = np.sort(np.asarray(phi))[::-1]
    prefix = np.cumsum(ordered)
    rows = []
    for k in range(1, n + 1):
        bound = EFFICIENCY_FACTOR * best_by_size[k]
        rows.append((k, float(prefix[k - 1]), float(bound),
                     bool(prefix[k - 1] >= bound - 1e-9)))
    return tuple(rows)


def run_reliance(spec: FeatureGameSpec, workers: int = 1) -> RelianceReport:
    """Full attribution pass: greedy ordering, phi values, gain table.

    Deterministic for a given spec, including across worker counts:
    every training run is seeded by (base seed, subset, run) alone.
    """
    game, table = _build(spec)
    if workers > 1:
        _prewarm(spec, table, workers)
    attribution = topk_shapley(game)

    h_empty = table.loss(0)
    losses = table.snapshot()
    n = len(spec.universe)

    gains_rows = []
    prefix_mask = 0
    prefix_names = ()
    for player in attribution.sigma:
        row = {}
        for i, name in enumerate(spec.universe):
            if prefix_mask & (1 << i):
                continue
            gain = losses[prefix_mask] - losses[prefix_mask | (1 << i)]
            row[name] = float(gain)
        gains_rows.append((prefix_names, row))
        prefix_names = prefix_names + (spec.universe[player],)
        prefix_mask |= 1 << player

    phi = tuple(float(attribution.phi[i]) for i in attribution.sigma)
    return RelianceReport(
        universe=spec.universe,
        sigma=tuple(spec.universe[i] for i in attribution.sigma),
        phi=phi,
        h_empty=float(h_empty),
        total_value=float(h_empty - losses[(1 << n) - 1]),
        subset_losses=losses,
        marginal_gains=tuple(gains_rows),
        relaxed_efficiency=_relaxed_efficiency_rows(phi, losses, h_empty, n),
        evaluations=game.evaluation_count,
    )

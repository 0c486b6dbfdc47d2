"""Counterpart-choice model trained on the razor objective.

Every transaction is evaluated from both sides: the buyer as chooser
predicting the seller, and the seller as chooser predicting the buyer.  The
per-item loss is the negative log of the larger of the two probabilities, so
the most plausible chooser explains the trade.  The network is a small MLP
over categorical embeddings and standardized numeric features, with the
chooser's output logit forced to -inf so self-trades carry exactly zero mass.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from dataclasses import dataclass

import numpy as np

FEATURES = (
    "entity",
    "direction",
    "product",
    "notional",
    "price",
    "market_price",
    "dealer_spread",
    "day",
    "time",
)

N_DAYS = 7

_CHECKPOINT_VERSION = 1
_MASK64 = 0xFFFFFFFFFFFFFFFF
_INIT_TAG = 0x11
_TRAIN_TAG = 0x12


@dataclass(frozen=True)
class TransactionRecord:
    timestamp: float
    buyer: int
    seller: int
    product: int
    notional: float
    price: float
    market_price: float
    dealer_spreads: np.ndarray
    day: int
    time_of_day: float

    def __post_init__(self):
        if self.buyer == self.seller:
            raise ValueError("buyer and seller must differ")
        if not 0 <= self.day < N_DAYS:
            raise ValueError(f"day {self.day} outside 0..{N_DAYS - 1}")
        if not 0.0 <= self.time_of_day <= 1.0:
            raise ValueError("time_of_day must lie in [0, 1]")
        if self.notional <= 0:
            raise ValueError("notional must be positive")
        spreads = np.asarray(self.dealer_spreads, dtype=np.float64)
        spreads.setflags(write=False)
        object.__setattr__(self, "dealer_spreads", spreads)


@dataclass(frozen=True)
class ModelConfig:
    n_entities: int
    n_products: int
    entity_dim: int = 16
    product_dim: int = 6
    day_dim: int = 2
    hidden_sizes: tuple = (50,)
    dropout: float = 0.7
    batch_size: int = 4096
    learning_rate: float = 2e-3
    early_stop_alpha: float = 0.99
    early_stop_k: int = 50
    max_epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n_entities < 2:
            raise ValueError("need at least two entities")
        if self.n_products < 1:
            raise ValueError("need at least one product")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        hidden = tuple(int(h) for h in self.hidden_sizes)
        if len(hidden) > 2 or any(h < 1 for h in hidden):
            raise ValueError("hidden_sizes must hold at most two positive widths")
        object.__setattr__(self, "hidden_sizes", hidden)
        if not 0.0 < self.early_stop_alpha <= 1.0:
            raise ValueError("early_stop_alpha must lie in (0, 1]")
        if self.early_stop_k < 1 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("early_stop_k, batch_size and max_epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def validate_features(features) -> frozenset:
    fs = frozenset(features)
    unknown = fs - set(FEATURES)
    if unknown:
        raise ValueError(f"unknown features: {sorted(unknown)}")
    return fs


# ---------------------------------------------------------------------------
# Feature preparation


def records_to_arrays(records) -> dict:
    """Column-major view of a record sequence."""
    if not records:
        raise ValueError("record sequence is empty")
    return {
        "timestamp": np.array([r.timestamp for r in records]),
        "buyer": np.array([r.buyer for r in records], dtype=np.int64),
        "seller": np.array([r.seller for r in records], dtype=np.int64),
        "product": np.array([r.product for r in records], dtype=np.int64),
        "notional": np.array([r.notional for r in records]),
        "price": np.array([r.price for r in records]),
        "market_price": np.array([r.market_price for r in records]),
        "dealer_spreads": np.stack([r.dealer_spreads for r in records]),
        "day": np.array([r.day for r in records], dtype=np.int64),
        "time": np.array([r.time_of_day for r in records]),
    }


def _moments(values, weights_axis=0):
    mean = values.mean(axis=weights_axis)
    var = values.var(axis=weights_axis)
    std = np.sqrt(var)
    return mean, np.where(std > 0, std, 1.0)


def _check_vocab(cols, config: ModelConfig) -> None:
    if cols["buyer"].max() >= config.n_entities or cols["seller"].max() >= config.n_entities:
        raise ValueError("entity id outside configured vocabulary")
    if cols["buyer"].min() < 0 or cols["seller"].min() < 0:
        raise ValueError("entity id outside configured vocabulary")
    if cols["product"].max() >= config.n_products or cols["product"].min() < 0:
        raise ValueError("product id outside configured vocabulary")
    if cols["dealer_spreads"].shape[1] != config.n_entities:
        raise ValueError(
            f"dealer_spreads width {cols['dealer_spreads'].shape[1]} "
            f"does not match n_entities={config.n_entities}"
        )


@dataclass(frozen=True)
class FeatureStats:
    """Standardization statistics, fit on the training split only."""

    price_mean: np.ndarray
    price_std: np.ndarray
    market_mean: np.ndarray
    market_std: np.ndarray
    spread_mean: np.ndarray
    spread_std: np.ndarray
    notional_mean: float
    notional_std: float

    @classmethod
    def fit(cls, records, config: ModelConfig) -> "FeatureStats":
        cols = records_to_arrays(records)
        _check_vocab(cols, config)
        price_mean = np.zeros(config.n_products)
        price_std = np.ones(config.n_products)
        market_mean = np.zeros(config.n_products)
        market_std = np.ones(config.n_products)
        for k in range(config.n_products):
            mask = cols["product"] == k
            if mask.any():
                price_mean[k], price_std[k] = _moments(cols["price"][mask])
                market_mean[k], market_std[k] = _moments(cols["market_price"][mask])
        spread_mean, spread_std = _moments(cols["dealer_spreads"])
        notional_mean, notional_std = _moments(cols["notional"])
        return cls(
            price_mean, price_std, market_mean, market_std,
            spread_mean, spread_std, float(notional_mean), float(notional_std),
        )

    @classmethod
    def identity(cls, config: ModelConfig) -> "FeatureStats":
        return cls(
            np.zeros(config.n_products), np.ones(config.n_products),
            np.zeros(config.n_products), np.ones(config.n_products),
            np.zeros(config.n_entities), np.ones(config.n_entities),
            0.0, 1.0,
        )


@dataclass
class FeatureBatch:
    """Featurized view of a batch from one chooser perspective."""

    chooser: np.ndarray
    target: np.ndarray
    product_ids: np.ndarray
    day_ids: np.ndarray
    numeric: dict

    def __len__(self) -> int:
        return len(self.chooser)

    def slice(self, idx) -> "FeatureBatch":
        return FeatureBatch(
            chooser=self.chooser[idx],
            target=self.target[idx],
            product_ids=self.product_ids[idx],
            day_ids=self.day_ids[idx],
            numeric={k: v[idx] for k, v in self.numeric.items()},
        )


def featurize_batch(records, chooser_is_buyer: bool, features, stats: FeatureStats,
                    config: ModelConfig) -> FeatureBatch:
    features = validate_features(features)
    cols = records_to_arrays(records)
    _check_vocab(cols, config)
    chooser = cols["buyer"] if chooser_is_buyer else cols["seller"]
    target = cols["seller"] if chooser_is_buyer else cols["buyer"]
    n = len(chooser)
    numeric = {}
    if "direction" in features:
        numeric["direction"] = np.full((n, 1), 1.0 if chooser_is_buyer else 0.0)
    if "notional" in features:
        numeric["notional"] = (
            (cols["notional"] - stats.notional_mean) / stats.notional_std
        ).reshape(-1, 1)
    if "price" in features:
        numeric["price"] = (
            (cols["price"] - stats.price_mean[cols["product"]])
            / stats.price_std[cols["product"]]
        ).reshape(-1, 1)
    if "market_price" in features:
        numeric["market_price"] = (
            (cols["market_price"] - stats.market_mean[cols["product"]])
            / stats.market_std[cols["product"]]
        ).reshape(-1, 1)
    if "dealer_spread" in features:
        numeric["dealer_spread"] = (cols["dealer_spreads"] - stats.spread_mean) / stats.spread_std
    if "time" in features:
        numeric["time"] = cols["time"].reshape(-1, 1)
    return FeatureBatch(
        chooser=chooser,
        target=target,
        product_ids=cols["product"],
        day_ids=cols["day"],
        numeric=numeric,
    )


def featurize(txn: TransactionRecord, chooser_is_buyer: bool, features, stats: FeatureStats,
              config: ModelConfig):
    """Single-record convenience wrapper; returns (batch, target id, chooser id)."""
    batch = featurize_batch([txn], chooser_is_buyer, features, stats, config)
    return batch, int(batch.target[0]), int(batch.chooser[0])


# ---------------------------------------------------------------------------
# Parameters and network


def _segments(config: ModelConfig, features):
    """(feature, kind, width) triples in canonical input order."""
    segs = []
    for name in FEATURES:
        if name not in features:
            continue
        if name == "entity":
            segs.append((name, "embed", config.entity_dim))
        elif name == "product":
            segs.append((name, "embed", config.product_dim))
        elif name == "day":
            segs.append((name, "embed", config.day_dim))
        elif name == "dealer_spread":
            segs.append((name, "numeric", config.n_entities))
        else:
            segs.append((name, "numeric", 1))
    return segs


def input_width(config: ModelConfig, features) -> int:
    return sum(w for _, _, w in _segments(config, validate_features(features)))


_EMBED_TABLES = {"entity": "entity_emb", "product": "product_emb", "day": "day_emb"}


@dataclass
class ModelParams:
    """Named parameter arrays; the single source of shape truth."""

    arrays: dict

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.arrays.items()})

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.arrays.values())


def _glorot(rng, fan_out: int, fan_in: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_params(config: ModelConfig, features, rng=None) -> ModelParams:
    features = validate_features(features)
    if rng is None:
        rng = np.random.default_rng(
            np.random.SeedSequence([config.seed & _MASK64, _INIT_TAG])
        )
    arrays = {}
    if "entity" in features:
        arrays["entity_emb"] = rng.uniform(-0.05, 0.05, size=(config.n_entities, config.entity_dim))
    if "product" in features:
        arrays["product_emb"] = rng.uniform(-0.05, 0.05, size=(config.n_products, config.product_dim))
    if "day" in features:
        arrays["day_emb"] = rng.uniform(-0.05, 0.05, size=(N_DAYS, config.day_dim))
    width = input_width(config, features)
    for i, h in enumerate(config.hidden_sizes):
        arrays[f"W{i}"] = _glorot(rng, h, width)
        arrays[f"b{i}"] = np.zeros(h)
        width = h
    arrays["W_out"] = _glorot(rng, config.n_entities, width)
    arrays["b_out"] = np.zeros(config.n_entities)
    return ModelParams(arrays)


def _assemble_input(params: ModelParams, batch: FeatureBatch, config: ModelConfig, features):
    parts = []
    for name, kind, width in _segments(config, features):
        if kind == "numeric":
            parts.append(batch.numeric[name])
        elif name == "entity":
            parts.append(params.arrays["entity_emb"][batch.chooser])
        elif name == "product":
            parts.append(params.arrays["product_emb"][batch.product_ids])
        else:
            parts.append(params.arrays["day_emb"][batch.day_ids])
    if parts:
        return np.concatenate(parts, axis=1)
    return np.zeros((len(batch), 0))


def forward_with_cache(params: ModelParams, batch: FeatureBatch, config: ModelConfig,
                       features, train_mode: bool = False, rng=None):
    """Log-probabilities over entities plus the intermediates for backward."""
    features = validate_features(features)
    x = _assemble_input(params, batch, config, features)
    h = x
    pre_activations = []
    activations = [x]
    masks = []
    keep = 1.0 - config.dropout
    for i in range(len(config.hidden_sizes)):
        z = h @ params.arrays[f"W{i}"].T + params.arrays[f"b{i}"]
        h = np.maximum(z, 0.0)
        if train_mode and config.dropout > 0.0:
            # Inverted dropout: zero with probability `dropout`, scale the
            # survivors so eval mode needs no correction.
            mask = (rng.random(h.shape) < keep) / keep
            h = h * mask
            masks.append(mask)
        else:
            masks.append(None)
        pre_activations.append(z)
        activations.append(h)
    logits = h @ params.arrays["W_out"].T + params.arrays["b_out"]
    logits[np.arange(len(batch)), batch.chooser] = -np.inf
    row_max = logits.max(axis=1, keepdims=True)
    log_norm = row_max + np.log(np.exp(logits - row_max).sum(axis=1, keepdims=True))
    logprobs = logits - log_norm
    cache = {
        "pre_activations": pre_activations,
        "activations": activations,
        "masks": masks,
        "logprobs": logprobs,
    }
    return logprobs, cache


def forward(params: ModelParams, batch: FeatureBatch, config: ModelConfig, features,
            train_mode: bool = False, rng=None) -> np.ndarray:
    """Probability rows over entities; the chooser's entry is exactly 0."""
    logprobs, _ = forward_with_cache(params, batch, config, features, train_mode, rng)
    return np.exp(logprobs)


def razor_loss_batches(params, buyer_batch: FeatureBatch, seller_batch: FeatureBatch,
                       config, features, train_mode: bool = False, rng=None):
    """Loss and per-item direction for already-featurized twin views.

    direction[i] is True when the buyer-as-chooser branch attains the max
    (ties included, so ties go to the buyer).
    """
    lp_buyer, cache_b = forward_with_cache(params, buyer_batch, config, features, train_mode, rng)
    lp_seller, cache_s = forward_with_cache(params, seller_batch, config, features, train_mode, rng)
    rows = np.arange(len(buyer_batch))
    chosen_b = lp_buyer[rows, buyer_batch.target]
    chosen_s = lp_seller[rows, seller_batch.target]
    directions = chosen_b >= chosen_s
    loss = float(-np.where(directions, chosen_b, chosen_s).mean())
    return loss, directions, (cache_b, cache_s)


def razor_loss(params, records, features, stats, config, train_mode: bool = False, rng=None):
    """Mean razor loss over records plus the chosen direction per item."""
    buyer_batch = featurize_batch(records, True, features, stats, config)
    seller_batch = featurize_batch(records, False, features, stats, config)
    loss, directions, _ = razor_loss_batches(
        params, buyer_batch, seller_batch, config, features, train_mode, rng
    )
    return loss, directions


def em_frozen_cross_entropy(params, buyer_batch, seller_batch, directions, config, features):
    """Cross-entropy with directions frozen to the recorded argmax."""
    lp_buyer, _ = forward_with_cache(params, buyer_batch, config, features)
    lp_seller, _ = forward_with_cache(params, seller_batch, config, features)
    rows = np.arange(len(buyer_batch))
    chosen = np.where(
        directions, lp_buyer[rows, buyer_batch.target], lp_seller[rows, seller_batch.target]
    )
    return float(-chosen.mean())


def _backward_branch(params, batch, cache, item_weights, config, features, grads):
    """Accumulate gradients of sum_i w_i * (-logp_i[target_i]) for one branch."""
    n = len(batch)
    probs = np.exp(cache["logprobs"])
    dlogits = probs * item_weights[:, None]
    dlogits[np.arange(n), batch.target] -= item_weights
    grads["W_out"] += dlogits.T @ cache["activations"][-1]
    grads["b_out"] += dlogits.sum(axis=0)
    dh = dlogits @ params.arrays["W_out"]
    for i in reversed(range(len(config.hidden_sizes))):
        if cache["masks"][i] is not None:
            dh = dh * cache["masks"][i]
        dz = dh * (cache["pre_activations"][i] > 0)
        grads[f"W{i}"] += dz.T @ cache["activations"][i]
        grads[f"b{i}"] += dz.sum(axis=0)
        dh = dz @ params.arrays[f"W{i}"]
    offset = 0
    for name, kind, width in _segments(config, features):
        seg = dh[:, offset:offset + width]
        offset += width
        if kind != "embed":
            continue
        table = _EMBED_TABLES[name]
        ids = {"entity": batch.chooser, "product": batch.product_ids, "day": batch.day_ids}[name]
        np.add.at(grads[table], ids, seg)


def backward(params, buyer_batch, seller_batch, directions, caches, config, features) -> dict:
    """Gradients of the mean razor loss; only the chosen branch of each item flows."""
    features = validate_features(features)
    grads = {k: np.zeros_like(v) for k, v in params.arrays.items()}
    n = len(buyer_batch)
    w_buyer = directions.astype(np.float64) / n
    w_seller = (~directions).astype(np.float64) / n
    _backward_branch(params, buyer_batch, caches[0], w_buyer, config, features, grads)
    _backward_branch(params, seller_batch, caches[1], w_seller, config, features, grads)
    return grads


# ---------------------------------------------------------------------------
# Optimization


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(
            m={k: np.zeros_like(a) for k, a in params.arrays.items()},
            v={k: np.zeros_like(a) for k, a in params.arrays.items()},
        )


def adam_step(params: ModelParams, grads: dict, state: AdamState, lr: float):
    """Bias-corrected Adam update, in place; returns (params, state)."""
    state.t += 1
    correct1 = 1.0 - state.beta1 ** state.t
    correct2 = 1.0 - state.beta2 ** state.t
    for key, grad in grads.items():
        m = state.m[key]
        v = state.v[key]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        params.arrays[key] -= lr * (m / correct1) / (np.sqrt(v / correct2) + state.eps)
    return params, state


@dataclass(frozen=True)
class EarlyStopState:
    best: float = math.inf
    counter: int = 0


def early_stop_update(state: EarlyStopState, train_loss: float, alpha: float, k: int):
    """Require a geometric improvement within a patience budget of k epochs."""
    if train_loss < alpha * state.best:
        return EarlyStopState(best=train_loss, counter=k), False
    counter = state.counter - 1
    return EarlyStopState(best=state.best, counter=counter), counter <= 0


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainResult:
    params: ModelParams
    stats: FeatureStats
    train_losses: list
    test_losses: list
    config: ModelConfig
    features: frozenset


def chronological_split(records):
    """Stable time sort, first 80% train, last 20% test."""
    ordered = sorted(records, key=lambda r: r.timestamp)
    cut = int(0.8 * len(ordered))
    train, test = ordered[:cut], ordered[cut:]
    if not train or not test:
        raise ValueError(f"{len(ordered)} records are too few for an 80/20 split")
    return train, test


def train(records, config: ModelConfig, features) -> TrainResult:
    features = validate_features(features)
    train_records, test_records = chronological_split(records)
    stats = FeatureStats.fit(train_records, config)
    rng_init = np.random.default_rng(
        np.random.SeedSequence([config.seed & _MASK64, _INIT_TAG])
    )
    rng_train = np.random.default_rng(
        np.random.SeedSequence([config.seed & _MASK64, _TRAIN_TAG])
    )
    params = init_params(config, features, rng_init)
    adam = AdamState.for_params(params)
    stop_state = EarlyStopState(counter=config.early_stop_k)

    train_buyer = featurize_batch(train_records, True, features, stats, config)
    train_seller = featurize_batch(train_records, False, features, stats, config)
    test_buyer = featurize_batch(test_records, True, features, stats, config)
    test_seller = featurize_batch(test_records, False, features, stats, config)

    n = len(train_buyer)
    train_losses = []
    test_losses = []
    for _epoch in range(config.max_epochs):
        perm = rng_train.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            bb = train_buyer.slice(idx)
            sb = train_seller.slice(idx)
            loss, directions, caches = razor_loss_batches(
                params, bb, sb, config, features, train_mode=True, rng=rng_train
            )
            grads = backward(params, bb, sb, directions, caches, config, features)
            adam_step(params, grads, adam, config.learning_rate)
            epoch_loss += loss * len(idx)
        train_losses.append(epoch_loss / n)
        test_loss, _, _ = razor_loss_batches(
            params, test_buyer, test_seller, config, features
        )
        test_losses.append(test_loss)
        stop_state, stop = early_stop_update(
            stop_state, train_losses[-1], config.early_stop_alpha, config.early_stop_k
        )
        if stop:
            break
    return TrainResult(params, stats, train_losses, test_losses, config, features)


def marginal_baseline(train_records, test_records, n_entities: int) -> float:
    """Razor loss of masked marginal participation frequencies.

    Entity frequencies are estimated on the training split with add-one
    smoothing; the chooser's mass is removed by renormalization, mirroring
    the model's masked softmax.
    """
    counts = np.ones(n_entities)
    for r in train_records:
        counts[r.buyer] += 1
        counts[r.seller] += 1
    freq = counts / counts.sum()
    losses = []
    for r in test_records:
        p_buyer_chooses = freq[r.seller] / (1.0 - freq[r.buyer])
        p_seller_chooses = freq[r.buyer] / (1.0 - freq[r.seller])
        losses.append(-math.log(max(p_buyer_chooses, p_seller_chooses)))
    return float(np.mean(losses))


# ---------------------------------------------------------------------------
# Persistence


def save_checkpoint(path, params: ModelParams, config: ModelConfig, features,
                    stats: FeatureStats) -> None:
    meta = {
        "version": _CHECKPOINT_VERSION,
        "config": dataclasses.asdict(config),
        "features": sorted(validate_features(features)),
    }
    payload = {f"param:{k}": v for k, v in params.arrays.items()}
    payload.update({f"stat:{f.name}": np.asarray(getattr(stats, f.name))
                    for f in dataclasses.fields(FeatureStats)})
    with open(path, "wb") as f:
        np.savez(f, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **payload)


def load_checkpoint(path):
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta.get("version") != _CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {meta.get('version')}")
        cfg = meta["config"]
        cfg["hidden_sizes"] = tuple(cfg["hidden_sizes"])
        config = ModelConfig(**cfg)
        features = frozenset(meta["features"])
        params = ModelParams({
            k.split(":", 1)[1]: data[k] for k in data.files if k.startswith("param:")
        })
        stat_kwargs = {}
        for f in dataclasses.fields(FeatureStats):
            value = data[f"stat:{f.name}"]
            stat_kwargs[f.name] = float(value) if value.ndim == 0 else value
        stats = FeatureStats(**stat_kwargs)
    return params, config, features, stats


# ---------------------------------------------------------------------------
# Transactions text format

_TXN_HEADER = [
    "timestamp", "buyer", "seller", "product", "notional", "price",
    "market_price", "dealer_spreads", "day", "time_of_day",
]


def write_transactions(records, path) -> None:
    """Tab-separated with header; dealer_spreads packed with `;`."""
    out = io.StringIO()
    out.write("\t".join(_TXN_HEADER) + "\n")
    for r in records:
        spreads = ";".join(repr(float(s)) for s in r.dealer_spreads)
        out.write("\t".join([
            repr(float(r.timestamp)), str(r.buyer), str(r.seller), str(r.product),
            repr(float(r.notional)), repr(float(r.price)), repr(float(r.market_price)),
            spreads, str(r.day), repr(float(r.time_of_day)),
        ]) + "\n")
    with open(path, "w") as f:
        f.write(out.getvalue())


def read_transactions(path) -> list:
    with open(path) as f:
        header = f.readline().rstrip("\n").split("\t")
        if header != _TXN_HEADER:
            raise ValueError(f"{path}: unexpected transaction header {header}")
        records = []
        for lineno, line in enumerate(f, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != len(_TXN_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(_TXN_HEADER)} fields")
            records.append(TransactionRecord(
                timestamp=float(parts[0]),
                buyer=int(parts[1]),
                seller=int(parts[2]),
                product=int(parts[3]),
                notional=float(parts[4]),
                price=float(parts[5]),
                market_price=float(parts[6]),
                dealer_spreads=np.array([float(s) for s in parts[7].split(";")]),
                day=int(parts[8]),
                time_of_day=float(parts[9]),
            ))
    return records

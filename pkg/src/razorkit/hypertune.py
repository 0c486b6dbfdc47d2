"""Tree-structured Parzen Estimator with a define-by-run trial interface.

Each requested parameter is suggested from the density ratio l(x)/g(x)
between the best past trials and the rest, fitted with truncated
Gaussian kernel mixtures on the (possibly log-) scaled domain. Because
parameters are requested through a trial handle, later requests may
depend on earlier values within the same trial, which covers
conditional spaces such as per-layer sizes after a layer count.
"""

import dataclasses
import math

import numpy as np

_SAMPLE_CAP = 10_000


@dataclasses.dataclass(frozen=True)
class TpeConfig:
    """Split fraction, candidate count and random-startup length."""

    gamma: float = 0.25
    n_candidates: int = 24
    n_startup: int = 10

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.n_candidates < 1:
            raise ValueError("need at least one candidate")
        if self.n_startup < 1:
            raise ValueError("need at least one startup trial")


@dataclasses.dataclass(frozen=True)
class ParamSpec:
    """One parameter's kind, domain and scale."""

    name: str
    kind: str
    low: float = None
    high: float = None
    categories: tuple = None
    scale: str = "linear"

    def __post_init__(self):
        if self.kind not in ("categorical", "integer", "real"):
            raise ValueError(f"unknown parameter kind {self.kind!r}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.kind == "categorical":
            if not self.categories:
                raise ValueError("categorical parameter needs categories")
            object.__setattr__(self, "categories", tuple(self.categories))
        else:
            if self.low is None or self.high is None or not self.low < self.high:
                raise ValueError(f"parameter {self.name!r} needs bounds low < high")
            if self.scale == "log" and self.low <= 0:
                raise ValueError("log scale requires strictly positive bounds")
            if self.kind == "integer" and (
                int(self.low) != self.low or int(self.high) != self.high
            ):
                raise ValueError("integer parameter needs integral bounds")

    def to_scaled(self, x):
        return np.log(x) if self.scale == "log" else np.asarray(x, dtype=np.float64)

    def from_scaled(self, s):
        x = math.exp(s) if self.scale == "log" else float(s)
        if self.kind == "integer":
            return int(min(max(round(x), int(self.low)), int(self.high)))
        return x

    @property
    def scaled_bounds(self):
        if self.scale == "log":
            return math.log(self.low), math.log(self.high)
        return float(self.low), float(self.high)


def _norm_cdf(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


class ParzenDensity:
    """Truncated Gaussian mixture on a bounded interval.

    One kernel per observation with bandwidth width / max(2, count),
    plus a prior kernel spanning the whole domain, all equally weighted
    and renormalized to the interval.
    """

    def __init__(self, values, low, high):
        if not low < high:
            raise ValueError("domain must have positive width")
        values = np.asarray(values, dtype=np.float64)
        if values.size and (values.min() < low or values.max() > high):
            raise ValueError("observations outside the domain")
        self.low = float(low)
        self.high = float(high)
        width = self.high - self.low
        bandwidth = width / max(2, values.size)
        self.centers = np.append(values, 0.5 * (low + high))
        self.sigmas = np.append(np.full(values.size, bandwidth), width)
        self.masses = np.array([
            _norm_cdf((self.high - c) / s) - _norm_cdf((self.low - c) / s)
            for c, s in zip(self.centers, self.sigmas)
        ])

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        z = (x[..., None] - self.centers) / self.sigmas
        kernel = np.exp(-0.5 * z * z) / (self.sigmas * math.sqrt(2.0 * math.pi))
        density = (kernel / self.masses).mean(axis=-1)
        inside = (x >= self.low) & (x <= self.high)
        return np.where(inside, density, 0.0)

    def log_pdf(self, x):
        return np.log(self.pdf(x))

    def sample(self, rng, n):
        out = np.empty(n)
        for i in range(n):
            k = int(rng.integers(len(self.centers)))
            for _ in range(_SAMPLE_CAP):
                draw = self.centers[k] + self.sigmas[k] * rng.standard_normal()
                if self.low <= draw <= self.high:
                    out[i] = draw
                    break
            else:
                raise RuntimeError("truncated kernel sampling exceeded retry cap")
        return out


def parzen_fit(values, low, high) -> ParzenDensity:
    """Density estimate used for both l and g; empty values give the prior."""
    return ParzenDensity(values, low, high)


def split_observations(observations, gamma):
    """Best-gamma quantile first: ((best values), (rest)), stably sorted."""
    ranked = sorted(range(len(observations)), key=lambda i: observations[i][1])
    n_best = max(1, math.ceil(gamma * len(observations)))
    best = tuple(observations[i][0] for i in ranked[:n_best])
    rest = tuple(observations[i][0] for i in ranked[n_best:])
    return best, rest


def _relevant(history, name):
    return [(assignment[name], value)
            for assignment, value in history if name in assignment]


def _prior_sample(spec: ParamSpec, rng):
    if spec.kind == "categorical":
        return spec.categories[int(rng.integers(len(spec.categories)))]
    low, high = spec.scaled_bounds
    return spec.from_scaled(rng.uniform(low, high))


def _smoothed_counts(values, categories):
    weights = np.ones(len(categories))
    for v in values:
        weights[categories.index(v)] += 1.0
    return weights / weights.sum()


def tpe_suggest(history, spec: ParamSpec, rng, config: TpeConfig = TpeConfig()):
    """One parameter value: prior during startup, argmax of l/g after."""
    observations = _relevant(history, spec.name)
    if len(observations) < config.n_startup:
        return _prior_sample(spec, rng)
    best, rest = split_observations(observations, config.gamma)

    if spec.kind == "categorical":
        p_best = _smoothed_counts(best, spec.categories)
        p_rest = _smoothed_counts(rest, spec.categories)
        candidates = rng.choice(len(spec.categories), size=config.n_candidates,
                                p=p_best)
        scores = p_best[candidates] / p_rest[candidates]
        return spec.categories[int(candidates[int(np.argmax(scores))])]

    low, high = spec.scaled_bounds
    density_best = parzen_fit(spec.to_scaled(np.asarray(best)), low, high)
    density_rest = parzen_fit(spec.to_scaled(np.asarray(rest)), low, high)
    candidates = density_best.sample(rng, config.n_candidates)
    scores = density_best.log_pdf(candidates) - density_rest.log_pdf(candidates)
    return spec.from_scaled(candidates[int(np.argmax(scores))])


class Trial:
    """Define-by-run handle: request parameters, values get recorded."""

    def __init__(self, history, rng, config: TpeConfig):
        self._history = history
        self._rng = rng
        self._config = config
        self.assignment = {}

    def _suggest(self, spec: ParamSpec):
        if spec.name in self.assignment:
            raise ValueError(f"parameter {spec.name!r} requested twice in one trial")
        value = tpe_suggest(self._history, spec, self._rng, self._config)
        self.assignment[spec.name] = value
        return value

    def suggest_real(self, name, low, high, log=False) -> float:
        return self._suggest(ParamSpec(name, "real", low, high,
                                       scale="log" if log else "linear"))

    def suggest_int(self, name, low, high, log=False) -> int:
        return self._suggest(ParamSpec(name, "integer", low, high,
                                       scale="log" if log else "linear"))

    def suggest_categorical(self, name, categories):
        return self._suggest(ParamSpec(name, "categorical", categories=categories))


@dataclasses.dataclass(frozen=True)
class OptimizeResult:
    best_assignment: dict
    best_value: float
    history: tuple


def optimize(objective, space, n_trials: int, seed: int = 0,
             config: TpeConfig = TpeConfig()) -> OptimizeResult:
    """Minimize objective(assignment) over the space program's domain.

    Trials run sequentially because suggestions condition on history.
    A trial whose space program or objective raises is recorded with
    value +inf and optimization continues.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    history = []
    for _ in range(n_trials):
        trial = Trial(history, rng, config)
        try:
            space(trial)
            value = float(objective(trial.assignment))
            if math.isnan(value):
                raise ValueError("objective returned NaN")
        except Exception:
            value = math.inf
        history.append((dict(trial.assignment), value))
    best_index = min(range(len(history)), key=lambda i: history[i][1])
    best_assignment, best_value = history[best_index]
    return OptimizeResult(best_assignment=dict(best_assignment),
                          best_value=best_value,
                          history=tuple((dict(a), v) for a, v in history))

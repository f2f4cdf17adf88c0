"""Synthetic generator: persistent latent scores, softmax mixing, Gaussian draws.

Latent scores follow a diagonal VAR(1); mixing proportions are their
softmax with the last score pinned at zero for identifiability. Each
observation draws a component from the mixing proportions, then a
Gaussian around that component's centroid with an equicorrelated
covariance.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

SOFT_NOISE_SCALE = 0.2
HARD_NOISE_SCALE = 5.0
DEFAULT_PERSISTENCE = 0.99


def default_centroids(n_states: int, n_features: int) -> np.ndarray:
    """Built-in centroid layouts for the two- and three-state settings."""
    if n_states == 2:
        rows = [1.0, -1.0]
    elif n_states == 3:
        rows = [1.0, 0.0, -1.0]
    else:
        raise ValueError("no default centroids for n_states > 3; pass them explicitly")
    return np.array([[r] * n_features for r in rows])


def scenario_preset(name: str) -> dict:
    """Partial configuration for the named scenario.

    'soft' keeps mixing proportions away from 0/1; 'hard' pushes them to
    the boundary. Both use strong temporal persistence.
    """
    if name == "soft":
        return {"noise_scale": SOFT_NOISE_SCALE, "persistence": DEFAULT_PERSISTENCE}
    if name == "hard":
        return {"noise_scale": HARD_NOISE_SCALE, "persistence": DEFAULT_PERSISTENCE}
    raise ValueError(f"unknown scenario {name!r}")


@dataclass(frozen=True)
class SimulationConfig:
    n_states: int
    n_features: int
    n_steps: int
    noise_scale: float
    persistence: float = DEFAULT_PERSISTENCE
    correlation: float = 0.0
    centroids: np.ndarray | None = None
    burn_in: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n_states < 2:
            raise ValueError("n_states must be at least 2")
        if self.n_features < 1:
            raise ValueError("n_features must be at least 1")
        if self.n_steps < 2:
            raise ValueError("n_steps must be at least 2")
        if not 0.0 <= self.persistence < 1.0:
            raise ValueError("persistence must lie in [0, 1)")
        if self.noise_scale <= 0.0:
            raise ValueError("noise_scale must be positive")
        if self.n_features > 1:
            lo = -1.0 / (self.n_features - 1)
            if not lo < self.correlation < 1.0:
                raise ValueError("correlation outside the positive-definite range")
        cents = self.centroids
        if cents is None:
            cents = default_centroids(self.n_states, self.n_features)
        cents = np.asarray(cents, dtype=float)
        if cents.shape != (self.n_states, self.n_features):
            raise ValueError("centroids must be n_states x n_features")
        cents.setflags(write=False)
        object.__setattr__(self, "centroids", cents)
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")


@dataclass(frozen=True)
class SimulatedSeries:
    y: np.ndarray
    pi_true: np.ndarray
    component_labels: np.ndarray
    alpha: np.ndarray


def _stream(cfg: SimulationConfig, key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(key,))
    return np.random.default_rng(ss)


def simulate_latent_scores(cfg: SimulationConfig) -> np.ndarray:
    """T x (K-1) VAR(1) path started at zero after a burn-in period."""
    rng = _stream(cfg, 0)
    k1 = cfg.n_states - 1
    total = cfg.burn_in + cfg.n_steps
    noise = rng.normal(0.0, cfg.noise_scale, size=(total, k1))
    path = np.empty((total, k1))
    state = np.zeros(k1)
    for t in range(total):
        state = cfg.persistence * state + noise[t]
        path[t] = state
    return path[cfg.burn_in:]


def softmax_mixing(alpha: np.ndarray) -> np.ndarray:
    """Row-wise softmax of [alpha, 0]; computed with max subtraction."""
    a = np.asarray(alpha, dtype=float)
    if not np.isfinite(a).all():
        raise ValueError("non-finite latent scores")
    full = np.concatenate([a, np.zeros((a.shape[0], 1))], axis=1)
    full -= full.max(axis=1, keepdims=True)
    ex = np.exp(full)
    return ex / ex.sum(axis=1, keepdims=True)


def equicorrelation_sqrt(n_features: int, correlation: float) -> np.ndarray:
    """Symmetric square root of the unit-variance equicorrelated covariance."""
    high = 1.0 + (n_features - 1) * correlation
    low = 1.0 - correlation if n_features > 1 else 1.0
    if high <= 0.0 or low <= 0.0:
        raise ValueError("covariance is not positive definite")
    c_shared = np.sqrt(high)
    c_ortho = np.sqrt(low)
    return c_ortho * np.eye(n_features) + (c_shared - c_ortho) / n_features * np.ones(
        (n_features, n_features))


def sample_series(cfg: SimulationConfig) -> SimulatedSeries:
    """Draw a full series: scores, mixing proportions, components, emissions."""
    alpha = simulate_latent_scores(cfg)
    pi = softmax_mixing(alpha)

    rng_mix = _stream(cfg, 1)
    u = rng_mix.random(cfg.n_steps)
    cum = np.cumsum(pi, axis=1)
    labels = (u[:, None] > cum).sum(axis=1)

    rng_noise = _stream(cfg, 2)
    root = equicorrelation_sqrt(cfg.n_features, cfg.correlation)
    noise = rng_noise.standard_normal((cfg.n_steps, cfg.n_features)) @ root
    y = cfg.centroids[labels] + noise
    return SimulatedSeries(y=y, pi_true=pi, component_labels=labels, alpha=alpha)

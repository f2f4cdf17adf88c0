"""Coordinate-descent estimation: memberships sweep, prototype update, restarts.

Each outer iteration re-solves every membership row in time order (the
row at t sees the already-updated row t-1 and the stale row t+1), then
recomputes prototypes exactly. Both halves are non-increasing in the
objective, so the per-iteration trace is monotone up to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import _kernels
from .distances import distance_matrix, feature_ranges
from .types import (
    GOWER,
    SQUARED_EUCLIDEAN,
    DataMatrix,
    FeatureRanges,
    FitConfig,
    PrototypeSet,
    normalize_memberships,
)


@dataclass(frozen=True)
class FitResult:
    memberships: np.ndarray
    prototypes: PrototypeSet
    objective: float
    objective_trace: np.ndarray
    restart_objectives: np.ndarray
    iterations_used: int
    seed: int


class NumericalError(RuntimeError):
    """Raised when the objective stops being finite."""


def _restart_rng(seed: int, restart_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(restart_index,))
    return np.random.default_rng(ss)


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Smallest value whose cumulative weight reaches half the total."""
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    total = cum[-1]
    if total <= 0.0:
        raise ValueError("weights sum to zero")
    idx = int(np.searchsorted(cum, total / 2.0, side="left"))
    return float(values[order][idx])


def weighted_mode(codes: np.ndarray, weights: np.ndarray, n_levels: int) -> int:
    """Level with the largest total weight; ties go to the earliest level."""
    totals = np.bincount(codes.astype(np.int64), weights=weights, minlength=n_levels)
    return int(np.argmax(totals))


def initialize(data: DataMatrix, cfg: FitConfig,
               restart_index: int) -> tuple[np.ndarray, PrototypeSet]:
    """Draw membership rows uniformly from the simplex and derive prototypes.

    The stream is seeded by (cfg.seed, restart_index), so each restart is
    reproducible in isolation.
    """
    rng = _restart_rng(cfg.seed, restart_index)
    s = rng.dirichlet(np.ones(cfg.n_states), size=data.n_rows)
    ranges = feature_ranges(data)
    protos = update_prototypes(data, s, cfg.fuzziness, cfg.distance_mode,
                               ranges, rng=rng)
    return s, protos


def update_prototypes(data: DataMatrix, memberships: np.ndarray, fuzziness: float,
                      distance_mode: str, ranges: FeatureRanges,
                      rng: np.random.Generator | None = None) -> PrototypeSet:
    """Exact fit-term minimizer given the memberships.

    Gower mode: per-feature weighted median (continuous) or weighted mode
    (categorical) under weights s**fuzziness. Euclidean mode: weighted
    mean. A state whose weight mass is zero is reseeded from a uniformly
    random data row and flagged in the result.
    """
    s = np.asarray(memberships, dtype=float)
    n_rows, n_states = s.shape
    if n_rows != data.n_rows:
        raise ValueError("membership row count does not match data")
    w = s ** fuzziness
    mass = w.sum(axis=0)
    vals = data.values
    protos = np.empty((n_states, data.n_features))

    reseeded = []
    dead = np.flatnonzero(mass <= 0.0)
    if dead.size:
        if rng is None:
            rng = np.random.default_rng(0)
        for k in dead:
            protos[k] = vals[int(rng.integers(n_rows))]
            reseeded.append(int(k))
    alive = np.flatnonzero(mass > 0.0)

    if distance_mode == SQUARED_EUCLIDEAN:
        if not data.schema.all_continuous:
            raise ValueError("squared-Euclidean mode requires an all-continuous schema")
        if alive.size:
            protos[alive] = (w[:, alive].T @ vals) / mass[alive, None]
    elif distance_mode == GOWER:
        for p, feat in enumerate(data.schema.features):
            col = vals[:, p]
            if feat.is_categorical:
                codes = col.astype(np.int64)
                for k in alive:
                    level = weighted_mode(codes, w[:, k], len(feat.levels))
                    protos[k, p] = float(level)
            else:
                order = np.argsort(col, kind="stable")
                sorted_col = col[order]
                cum = np.cumsum(w[order][:, alive], axis=0)
                idx = np.argmax(cum >= cum[-1] / 2.0, axis=0)
                protos[alive, p] = sorted_col[idx]
    else:
        raise ValueError(f"unknown distance mode {distance_mode!r}")

    return PrototypeSet(data.schema, protos, reseeded=tuple(reseeded))


def sweep_memberships(data: DataMatrix, memberships: np.ndarray,
                      prototypes: PrototypeSet, cfg: FitConfig,
                      ranges: FeatureRanges) -> np.ndarray:
    """One sequential pass of per-step subproblem solves over t = 1..T."""
    gmat = distance_matrix(data.values, prototypes.values, ranges, cfg.distance_mode)
    s = np.array(memberships, dtype=float)
    _kernels.sweep_kernel(gmat, s, float(cfg.fuzziness), float(cfg.jump_penalty),
                          cfg.pgd_max_iter, cfg.pgd_tol)
    return s


def _coordinate_descent(data: DataMatrix, cfg: FitConfig, s: np.ndarray,
                        ranges: FeatureRanges,
                        rng: np.random.Generator | None):
    """Alternate sweeps and prototype updates from a given membership state."""
    s = np.array(s, dtype=float)
    protos = update_prototypes(data, s, cfg.fuzziness, cfg.distance_mode,
                               ranges, rng=rng)
    gmat = distance_matrix(data.values, protos.values, ranges, cfg.distance_mode)

    def total(gm):
        return (_kernels.fit_term(s, gm, float(cfg.fuzziness))
                + cfg.jump_penalty * _kernels.penalty_term(s))

    current = total(gmat)
    trace = [current]
    iterations = 0
    for _ in range(cfg.max_outer_iter):
        _kernels.sweep_kernel(gmat, s, float(cfg.fuzziness),
                              float(cfg.jump_penalty),
                              cfg.pgd_max_iter, cfg.pgd_tol)
        protos = update_prototypes(data, s, cfg.fuzziness, cfg.distance_mode,
                                   ranges, rng=rng)
        gmat = distance_matrix(data.values, protos.values, ranges,
                               cfg.distance_mode)
        new = total(gmat)
        if not np.isfinite(new):
            raise NumericalError("objective became non-finite")
        trace.append(new)
        iterations += 1
        rel = abs(new - current) / max(1.0, current)
        current = new
        if rel < cfg.outer_tol:
            break
    return s, protos, np.array(trace), iterations


def fit(data: DataMatrix, cfg: FitConfig) -> FitResult:
    """Estimate memberships and prototypes over all restarts.

    Runs cfg.restarts independent initializations and keeps the run with
    the lowest final objective (ties broken by restart index, so serial
    and parallel execution agree). Deterministic given (data, cfg).
    """
    if cfg.n_states > data.n_rows:
        raise ValueError("more states than data rows")
    if cfg.distance_mode == SQUARED_EUCLIDEAN and not data.schema.all_continuous:
        raise ValueError("squared-Euclidean mode requires an all-continuous schema")
    ranges = feature_ranges(data)

    best = None
    restart_objectives = np.empty(cfg.restarts)
    for r in range(cfg.restarts):
        rng = _restart_rng(cfg.seed, r)
        s0 = rng.dirichlet(np.ones(cfg.n_states), size=data.n_rows)
        s, protos, trace, iters = _coordinate_descent(data, cfg, s0, ranges, rng)
        final = float(trace[-1])
        restart_objectives[r] = final
        if best is None or final < best[0]:
            best = (final, r, s, protos, trace, iters)

    final, _, s, protos, trace, iters = best
    return FitResult(
        memberships=normalize_memberships(s),
        prototypes=protos,
        objective=final,
        objective_trace=trace,
        restart_objectives=restart_objectives,
        iterations_used=iters,
        seed=cfg.seed,
    )


def map_labels(memberships: np.ndarray) -> np.ndarray:
    """Per-row argmax; ties resolve to the lowest state index."""
    s = np.asarray(memberships, dtype=float)
    if s.ndim != 2:
        raise ValueError("membership matrix must be 2-d")
    return np.argmax(s, axis=1)

"""Distances and the full model objective.

The mixed-type distance is a sum of per-feature contributions: a
range-normalized absolute difference for continuous features and a 0/1
mismatch for categorical ones. A feature with zero observed range is
uninformative and contributes 0.
"""

from __future__ import annotations

import numpy as np

from .types import (
    GOWER,
    SQUARED_EUCLIDEAN,
    DataMatrix,
    FeatureRanges,
    FitConfig,
    PrototypeSet,
)


def feature_ranges(data: DataMatrix) -> FeatureRanges:
    """Column max minus min for continuous features, NaN for categorical."""
    cont = data.schema.continuous_mask()
    sigma = np.full(data.n_features, np.nan)
    vals = data.values
    for p in np.flatnonzero(cont):
        sigma[p] = vals[:, p].max() - vals[:, p].min()
    return FeatureRanges(sigma)


def gower_distance(x, y, ranges: FeatureRanges) -> float:
    """Mixed-type dissimilarity between two rows under fixed ranges.

    Continuous features contribute |x_p - y_p| / sigma_p (0 when the
    range is zero); categorical features contribute 1 on mismatch. The
    result lies in [0, P].
    """
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    sigma = ranges.sigma
    if xv.shape != yv.shape or xv.shape != sigma.shape:
        raise ValueError("vectors do not conform to the ranges schema")
    cont = ranges.continuous_mask()
    total = 0.0
    informative = cont & (sigma > 0)
    if informative.any():
        total += (np.abs(xv[informative] - yv[informative]) / sigma[informative]).sum()
    cat = ~cont
    if cat.any():
        total += float((xv[cat] != yv[cat]).sum())
    return float(total)


def squared_euclidean(x, y) -> float:
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise ValueError("length mismatch")
    d = xv - yv
    return float(d @ d)


def distance_matrix(values: np.ndarray, prototypes: np.ndarray,
                    ranges: FeatureRanges, mode: str) -> np.ndarray:
    """T x K matrix of distances from every row to every prototype."""
    if mode == SQUARED_EUCLIDEAN:
        diff = values[:, None, :] - prototypes[None, :, :]
        return np.einsum("tkp,tkp->tk", diff, diff)
    if mode != GOWER:
        raise ValueError(f"unknown distance mode {mode!r}")
    sigma = ranges.sigma
    cont = ranges.continuous_mask()
    out = np.zeros((values.shape[0], prototypes.shape[0]))
    informative = cont & (sigma > 0)
    if informative.any():
        diff = np.abs(values[:, None, informative] - prototypes[None, :, informative])
        out += (diff / sigma[informative]).sum(axis=2)
    cat = ~cont
    if cat.any():
        out += (values[:, None, cat] != prototypes[None, :, cat]).sum(axis=2)
    return out


def jump_penalty_term(memberships: np.ndarray) -> float:
    """Sum over t >= 2 of the squared L1 difference of consecutive rows."""
    if memberships.shape[0] < 2:
        return 0.0
    l1 = np.abs(np.diff(memberships, axis=0)).sum(axis=1)
    return float((l1 * l1).sum())


def objective_value(data: DataMatrix, memberships: np.ndarray,
                    prototypes: PrototypeSet, cfg: FitConfig,
                    ranges: FeatureRanges) -> float:
    """Fuzziness-weighted fit term plus the jump penalty.

    The fit term uses the distance unsquared in Gower mode and the
    squared norm in the Euclidean mode.
    """
    s = np.asarray(memberships, dtype=float)
    if s.shape != (data.n_rows, prototypes.n_states):
        raise ValueError("membership shape does not match data and prototypes")
    if prototypes.values.shape[1] != data.n_features:
        raise ValueError("prototype width does not match data")
    gmat = distance_matrix(data.values, prototypes.values, ranges, cfg.distance_mode)
    fit = float(((s ** cfg.fuzziness) * gmat).sum())
    return fit + cfg.jump_penalty * jump_penalty_term(s)

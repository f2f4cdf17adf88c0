"""Evaluation metrics and reference oracles.

State indices coming out of a fit are arbitrary, so probability matrices
are compared after an exhaustive search over column permutations and
label vectors after the analogous relabeling.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .fitting import fit
from .types import DataMatrix, FitConfig

MAX_ALIGN_STATES = 8


def align_and_mse(estimated: np.ndarray, truth: np.ndarray):
    """Minimum per-entry MSE over column permutations of the estimate.

    Returns (mse, permutation) where permutation sigma means
    estimated[:, sigma] is the best match to truth.
    """
    est = np.asarray(estimated, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.shape != tru.shape or est.ndim != 2:
        raise ValueError("probability matrices must have identical 2-d shapes")
    n_states = est.shape[1]
    if n_states > MAX_ALIGN_STATES:
        raise ValueError("exhaustive alignment is limited to 8 states")
    best_mse = np.inf
    best_perm = None
    for perm in itertools.permutations(range(n_states)):
        mse = float(((est[:, perm] - tru) ** 2).mean())
        if mse < best_mse:
            best_mse = mse
            best_perm = perm
    return best_mse, best_perm


def adjusted_rand_index(a, b) -> float:
    """Pair-counting agreement between two partitions, chance-corrected."""
    av = np.asarray(a).ravel()
    bv = np.asarray(b).ravel()
    if av.shape != bv.shape:
        raise ValueError("label vectors must have the same length")
    n = av.shape[0]
    if n < 2:
        raise ValueError("need at least two observations")
    _, ai = np.unique(av, return_inverse=True)
    _, bi = np.unique(bv, return_inverse=True)
    n_a = ai.max() + 1
    n_b = bi.max() + 1
    table = np.zeros((n_a, n_b), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_ij = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        return 1.0
    return float((sum_ij - expected) / (maximum - expected))


def balanced_accuracy(truth, pred, align: bool = True) -> float:
    """Mean per-class recall, after relabeling pred to best match truth.

    With align=True the predicted labels are mapped through the
    permutation of the truth classes that maximizes the score.
    """
    tv = np.asarray(truth).ravel()
    pv = np.asarray(pred).ravel()
    if tv.shape != pv.shape:
        raise ValueError("label vectors must have the same length")
    classes = np.unique(tv)
    if not np.isin(np.unique(pv), classes).all():
        raise ValueError("prediction uses a class absent from truth")

    def score(mapped):
        recalls = []
        for c in classes:
            mask = tv == c
            recalls.append((mapped[mask] == c).mean())
        return float(np.mean(recalls))

    if not align:
        return score(pv)
    best = 0.0
    for perm in itertools.permutations(classes):
        lut = dict(zip(classes, perm))
        mapped = np.array([lut[x] for x in pv])
        best = max(best, score(mapped))
    return best


def cmeans_memberships(sq_distances: np.ndarray, fuzziness: float) -> np.ndarray:
    """Closed-form membership update for the Euclidean soft-clustering step.

    Rows containing a zero distance put all mass there (split uniformly
    over ties); elsewhere s_tk is proportional to d2_tk**(-1/(m-1)).
    """
    d2 = np.asarray(sq_distances, dtype=float)
    if fuzziness <= 1.0:
        raise ValueError("fuzziness must exceed 1 for the closed form")
    s = np.empty_like(d2)
    zero_rows = (d2 <= 0.0).any(axis=1)
    if zero_rows.any():
        hits = d2[zero_rows] <= 0.0
        s[zero_rows] = hits / hits.sum(axis=1, keepdims=True)
    rest = ~zero_rows
    if rest.any():
        # ratio form avoids overflow for very small distances
        d = d2[rest]
        ratio = (d[:, :, None] / d[:, None, :]) ** (1.0 / (fuzziness - 1.0))
        s[rest] = 1.0 / ratio.sum(axis=2)
    return s


def fuzzy_cmeans_oracle(data, n_clusters: int, fuzziness: float,
                        init: np.ndarray, max_iter: int = 300,
                        tol: float = 1e-12):
    """Alternating closed-form reference for the unpenalized Euclidean case.

    Starts from the given memberships, alternates the closed-form
    membership update with weighted-mean centroids, and stops when the
    relative objective change drops below tol. Returns (memberships,
    centroids).
    """
    x = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    s = np.array(init, dtype=float)
    if s.shape != (x.shape[0], n_clusters):
        raise ValueError("init shape must be T x n_clusters")

    def centroids_of(s):
        w = s ** fuzziness
        return (w.T @ x) / w.sum(axis=0)[:, None]

    def sqdist(c):
        diff = x[:, None, :] - c[None, :, :]
        return np.einsum("tkp,tkp->tk", diff, diff)

    centers = centroids_of(s)
    current = float(((s ** fuzziness) * sqdist(centers)).sum())
    for _ in range(max_iter):
        s = cmeans_memberships(sqdist(centers), fuzziness)
        centers = centroids_of(s)
        new = float(((s ** fuzziness) * sqdist(centers)).sum())
        rel = abs(new - current) / max(1.0, current)
        current = new
        if rel < tol:
            break
    return s, centers


@dataclass(frozen=True)
class StateStats:
    state: int
    count: int
    mean: np.ndarray
    sd: np.ndarray
    corr: np.ndarray
    constant_columns: tuple[int, ...]


def state_conditional_stats(series: np.ndarray, labels) -> dict[int, StateStats]:
    """Per-state sample mean, SD (n-1) and Pearson correlations.

    Columns that are constant within a state get SD 0 and NaN
    correlations, flagged in constant_columns. A state with fewer than
    two observations is an error.
    """
    x = np.asarray(series, dtype=float)
    lab = np.asarray(labels).ravel()
    if x.ndim != 2 or x.shape[0] != lab.shape[0]:
        raise ValueError("series and labels must share their length")
    out = {}
    for state in np.unique(lab):
        rows = x[lab == state]
        if rows.shape[0] < 2:
            raise ValueError(f"state {state} has fewer than two observations")
        sd = rows.std(axis=0, ddof=1)
        constant = tuple(int(i) for i in np.flatnonzero(sd == 0.0))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            corr = np.corrcoef(rows, rowvar=False)
        corr = np.atleast_2d(corr)
        out[int(state)] = StateStats(
            state=int(state),
            count=rows.shape[0],
            mean=rows.mean(axis=0),
            sd=sd,
            corr=corr,
            constant_columns=constant,
        )
    return out


def lambda_stability_curve(data: DataMatrix, n_states: int, fuzziness: float,
                           penalty_grid, cfg: FitConfig):
    """Aligned MSE between membership fits at consecutive penalty values.

    The grid must be sorted with a uniform step; every fit reuses the
    same seed from cfg. Returns a list of (penalty, mse) pairs, one per
    consecutive grid pair.
    """
    grid = [float(v) for v in penalty_grid]
    if len(grid) < 2:
        raise ValueError("penalty grid needs at least two values")
    steps = np.diff(grid)
    if (steps <= 0).any() or np.abs(steps - steps[0]).max() > 1e-9:
        raise ValueError("penalty grid must be sorted with a uniform step")
    fits = []
    for lam in grid:
        run = fit(data, replace(cfg, n_states=n_states, fuzziness=fuzziness,
                                jump_penalty=lam))
        fits.append(run.memberships)
    curve = []
    for i in range(len(grid) - 1):
        mse, _ = align_and_mse(fits[i + 1], fits[i])
        curve.append((grid[i], mse))
    return curve

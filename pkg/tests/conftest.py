"""Shared brute-force oracles used by both the unit and acceptance suites."""

import itertools

import numpy as np


def qp_projection_oracle(v):
    """Exact simplex projection via enumeration of active sets."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    best = None
    best_dist = np.inf
    for r in range(1, n + 1):
        for support in itertools.combinations(range(n), r):
            p = np.zeros(n)
            shift = (1.0 - v[list(support)].sum()) / r
            p[list(support)] = v[list(support)] + shift
            if (p < -1e-12).any():
                continue
            dist = ((p - v) ** 2).sum()
            if dist < best_dist:
                best_dist = dist
                best = p
    return best


def brute_force_weighted_median(values, weights):
    """Argmin of the weighted absolute loss over the observed values."""
    values = np.asarray(values, dtype=float)
    best_v, best_loss = None, np.inf
    for v in sorted(values):
        loss = (weights * np.abs(values - v)).sum()
        if loss < best_loss - 1e-15:
            best_loss, best_v = loss, v
    return best_v, best_loss

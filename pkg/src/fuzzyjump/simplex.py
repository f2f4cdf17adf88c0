"""Simplex projection and the per-time-step membership subproblem."""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import _kernels
from .types import validate_memberships


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold; idempotent and equivariant under coordinate
    permutations.
    """
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ValueError("input must be a nonempty vector")
    if not np.isfinite(arr).all():
        raise ValueError("non-finite input")
    return _kernels.project_simplex(arr.copy())


@dataclass(frozen=True)
class SubproblemSpec:
    """One time step of the membership problem.

    prev / next are the neighboring membership rows when present; the
    boundary steps drop the missing anchor. warm_start must lie on the
    simplex.
    """

    distances: np.ndarray
    fuzziness: float
    jump_penalty: float
    warm_start: np.ndarray
    prev: np.ndarray | None = None
    next: np.ndarray | None = None

    def __post_init__(self):
        g = np.asarray(self.distances, dtype=float)
        if g.ndim != 1 or g.shape[0] < 1:
            raise ValueError("distances must be a nonempty vector")
        if not np.isfinite(g).all() or (g < 0).any():
            raise ValueError("distances must be finite and nonnegative")
        if self.fuzziness < 1.0:
            raise ValueError("fuzziness must be >= 1")
        if self.jump_penalty < 0.0:
            raise ValueError("jump_penalty must be >= 0")
        object.__setattr__(self, "distances", g)
        warm = np.asarray(self.warm_start, dtype=float)
        validate_memberships(warm[None, :])
        object.__setattr__(self, "warm_start", warm)
        for name in ("prev", "next"):
            anchor = getattr(self, name)
            if anchor is not None:
                a = np.asarray(anchor, dtype=float)
                if a.shape != g.shape:
                    raise ValueError(f"{name} has the wrong length")
                validate_memberships(a[None, :])
                object.__setattr__(self, name, a)

    def _anchors(self):
        kk = self.distances.shape[0]
        zero = np.zeros(kk)
        prev = self.prev if self.prev is not None else zero
        nxt = self.next if self.next is not None else zero
        return prev, self.prev is not None, nxt, self.next is not None


def subproblem_value(spec: SubproblemSpec, s) -> float:
    """Objective of the single-step problem at a simplex point s."""
    sv = np.asarray(s, dtype=float)
    prev, has_prev, nxt, has_next = spec._anchors()
    return float(_kernels.subproblem_value(
        sv, spec.distances, spec.fuzziness, spec.jump_penalty,
        prev, has_prev, nxt, has_next))


def solve_subproblem(spec: SubproblemSpec, max_iter: int = 200,
                     tol: float = 1e-10) -> np.ndarray:
    """Minimize the single-step objective over the simplex.

    Projected gradient descent with backtracking; always returns a
    feasible point whose objective does not exceed the warm start's.
    """
    prev, has_prev, nxt, has_next = spec._anchors()
    return _kernels.solve_subproblem_kernel(
        spec.distances, spec.fuzziness, spec.jump_penalty,
        prev, has_prev, nxt, has_next,
        spec.warm_start.copy(), max_iter, tol)

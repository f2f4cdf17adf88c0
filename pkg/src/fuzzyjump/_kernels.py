"""Compiled inner loops for the membership solver.

Everything in here is called once per sweep from Python; the per-time-step
projected gradient descent runs entirely inside compiled code so that a
T=1000 sweep costs milliseconds instead of seconds. The per-row solver
works in caller-provided scratch buffers to keep the hot path free of
allocations.
"""

import numpy as np
from numba import njit

ARMIJO = 1e-4
MIN_STEP = 1e-20
MAX_STEP_GROWTH = 2.0


@njit(cache=True)
def _project_inplace(v, scratch):
    """Project v onto the probability simplex, overwriting v.

    Sort-and-threshold with an insertion sort into scratch (rows are
    short); the result is renormalized by one final division.
    """
    n = v.shape[0]
    for i in range(n):
        scratch[i] = v[i]
    for i in range(1, n):
        key = scratch[i]
        j = i - 1
        while j >= 0 and scratch[j] < key:
            scratch[j + 1] = scratch[j]
            j -= 1
        scratch[j + 1] = key
    css = 0.0
    theta = 0.0
    for j in range(n):
        css += scratch[j]
        t = (css - 1.0) / (j + 1.0)
        if scratch[j] > t:
            theta = t
    total = 0.0
    for k in range(n):
        x = v[k] - theta
        if x < 0.0:
            x = 0.0
        v[k] = x
        total += x
    for k in range(n):
        v[k] /= total


@njit(cache=True)
def _project_mass_inplace(v, scratch, mass):
    """Project v onto {x >= 0, sum x = mass}, overwriting v."""
    n = v.shape[0]
    for i in range(n):
        scratch[i] = v[i]
    for i in range(1, n):
        key = scratch[i]
        j = i - 1
        while j >= 0 and scratch[j] < key:
            scratch[j + 1] = scratch[j]
            j -= 1
        scratch[j + 1] = key
    css = 0.0
    theta = 0.0
    for j in range(n):
        css += scratch[j]
        t = (css - mass) / (j + 1.0)
        if scratch[j] > t:
            theta = t
    total = 0.0
    for k in range(n):
        x = v[k] - theta
        if x < 0.0:
            x = 0.0
        v[k] = x
        total += x
    for k in range(n):
        v[k] *= mass / total


@njit(cache=True)
def project_simplex(v):
    """Allocating wrapper around the in-place projection."""
    out = v.copy()
    scratch = np.empty(v.shape[0])
    _project_inplace(out, scratch)
    return out


@njit(cache=True)
def subproblem_value(s, g, m, lam, prev, has_prev, nxt, has_next):
    """Single-step objective: fit term plus squared-L1 anchors to neighbors."""
    val = 0.0
    for k in range(s.shape[0]):
        val += s[k] ** m * g[k]
    if has_prev:
        l1 = 0.0
        for k in range(s.shape[0]):
            l1 += abs(s[k] - prev[k])
        val += lam * l1 * l1
    if has_next:
        l1 = 0.0
        for k in range(s.shape[0]):
            l1 += abs(s[k] - nxt[k])
        val += lam * l1 * l1
    return val


@njit(cache=True)
def _subproblem_grad(s, g, m, lam, prev, has_prev, nxt, has_next, out):
    # subgradient of |.| at 0 is taken as 0
    for k in range(s.shape[0]):
        if m == 1.0:
            out[k] = g[k]
        else:
            out[k] = m * s[k] ** (m - 1.0) * g[k]
    if has_prev:
        l1 = 0.0
        for k in range(s.shape[0]):
            l1 += abs(s[k] - prev[k])
        for k in range(s.shape[0]):
            d = s[k] - prev[k]
            if d > 0.0:
                out[k] += 2.0 * lam * l1
            elif d < 0.0:
                out[k] -= 2.0 * lam * l1
    if has_next:
        l1 = 0.0
        for k in range(s.shape[0]):
            l1 += abs(s[k] - nxt[k])
        for k in range(s.shape[0]):
            d = s[k] - nxt[k]
            if d > 0.0:
                out[k] += 2.0 * lam * l1
            elif d < 0.0:
                out[k] -= 2.0 * lam * l1


@njit(cache=True)
def _solve_into(s, g, m, lam, prev, has_prev, nxt, has_next, max_iter, tol,
                grad, grad_old, s_old, cand, scratch):
    """Projected gradient descent with backtracking, operating on s in place.

    Monotone by construction: a candidate is accepted only when it
    satisfies the sufficient-decrease condition, so the final point never
    exceeds the warm start's objective. The trial step starts at 1/L for
    a curvature estimate L, then follows a spectral (secant) guess capped
    at twice the previously accepted step, which both speeds up the
    well-conditioned case and lets the solver traverse nearly flat
    landscapes (large fuzziness exponents).
    """
    kk = g.shape[0]
    _project_inplace(s, scratch)
    f = subproblem_value(s, g, m, lam, prev, has_prev, nxt, has_next)

    gmax = 0.0
    for k in range(kk):
        if g[k] > gmax:
            gmax = g[k]
    n_anchor = 0
    if has_prev:
        n_anchor += 1
    if has_next:
        n_anchor += 1
    curvature = m * max(1.0, m - 1.0) * gmax + 4.0 * lam * kk * n_anchor
    step = 1.0 / max(curvature, 1e-12)

    have_history = False
    for _ in range(max_iter):
        _subproblem_grad(s, g, m, lam, prev, has_prev, nxt, has_next, grad)

        trial = MAX_STEP_GROWTH * step
        if have_history:
            num = 0.0
            den = 0.0
            for k in range(kk):
                dx = s[k] - s_old[k]
                num += dx * dx
                den += dx * (grad[k] - grad_old[k])
            if den > 0.0 and num > 0.0:
                bb = num / den
                if bb < trial:
                    trial = bb

        accepted = False
        fc = f
        while trial > MIN_STEP:
            for k in range(kk):
                cand[k] = s[k] - trial * grad[k]
            _project_inplace(cand, scratch)
            fc = subproblem_value(cand, g, m, lam, prev, has_prev, nxt, has_next)
            dx2 = 0.0
            for k in range(kk):
                d = cand[k] - s[k]
                dx2 += d * d
            if fc <= f - (ARMIJO / trial) * dx2:
                accepted = True
                break
            trial *= 0.5

        if has_prev or has_next:
            # Full steps are mispriced where the ambient subgradient lies:
            # on a kink of an anchor term (sign(0)=0 hides the crossing
            # cost) and on the boundary for fuzziness close to 1 (the fit
            # gradient vanishes at a zero coordinate although re-entering
            # costs about g_k per unit). Mispriced pulls can shrink the
            # accepted step to a useless creep, so also search the face
            # that keeps those coordinates fixed, where descent is priced
            # correctly, and keep the better of the two candidates.
            kink_tol = 1e-9
            boundary_tol = 1e-12
            pinned = np.zeros(kk, dtype=np.bool_)
            free_mass = 1.0
            n_free = 0
            for k in range(kk):
                at_kink = s[k] <= boundary_tol
                if has_prev and abs(s[k] - prev[k]) <= kink_tol:
                    at_kink = True
                if has_next and abs(s[k] - nxt[k]) <= kink_tol:
                    at_kink = True
                if at_kink:
                    pinned[k] = True
                    free_mass -= s[k]
                else:
                    n_free += 1
            if 1 < n_free < kk and free_mass > 0.0:
                free = np.empty(n_free)
                free_scratch = np.empty(n_free)
                # the accepted step may have collapsed during a creep;
                # restart the face search at the curvature scale
                pin_trial = MAX_STEP_GROWTH * max(step, 1.0 / max(curvature, 1e-12))
                while pin_trial > MIN_STEP:
                    i = 0
                    for k in range(kk):
                        if not pinned[k]:
                            free[i] = s[k] - pin_trial * grad[k]
                            i += 1
                    _project_mass_inplace(free, free_scratch, free_mass)
                    i = 0
                    for k in range(kk):
                        if pinned[k]:
                            scratch[k] = s[k]
                        else:
                            scratch[k] = free[i]
                            i += 1
                    fp = subproblem_value(scratch, g, m, lam, prev, has_prev,
                                          nxt, has_next)
                    dx2 = 0.0
                    for k in range(kk):
                        d = scratch[k] - s[k]
                        dx2 += d * d
                    if fp <= f - (ARMIJO / pin_trial) * dx2:
                        if not accepted or fp < fc:
                            fc = fp
                            trial = pin_trial
                            for k in range(kk):
                                cand[k] = scratch[k]
                            accepted = True
                        break
                    pin_trial *= 0.5

        if not accepted:
            break
        for k in range(kk):
            s_old[k] = s[k]
            grad_old[k] = grad[k]
            s[k] = cand[k]
        have_history = True
        drop = f - fc
        f = fc
        step = trial
        if drop < tol:
            break


@njit(cache=True)
def solve_subproblem_kernel(g, m, lam, prev, has_prev, nxt, has_next,
                            warm, max_iter, tol):
    """One-off entry point; the sweep uses _solve_into with shared buffers."""
    kk = g.shape[0]
    s = warm.copy()
    _solve_into(s, g, m, lam, prev, has_prev, nxt, has_next, max_iter, tol,
                np.empty(kk), np.empty(kk), np.empty(kk), np.empty(kk),
                np.empty(kk))
    return s


@njit(cache=True)
def sweep_kernel(gmat, s, m, lam, max_iter, tol):
    """Sequential membership pass, in place.

    Row t is re-solved against the already-updated row t-1 and the
    not-yet-updated row t+1; boundary rows drop the missing anchor.
    """
    n_steps, kk = gmat.shape
    grad = np.empty(kk)
    grad_old = np.empty(kk)
    s_old = np.empty(kk)
    cand = np.empty(kk)
    scratch = np.empty(kk)
    dummy = s[0]
    for t in range(n_steps):
        has_prev = t > 0
        has_next = t < n_steps - 1
        prev = s[t - 1] if has_prev else dummy
        nxt = s[t + 1] if has_next else dummy
        _solve_into(s[t], gmat[t], m, lam, prev, has_prev, nxt, has_next,
                    max_iter, tol, grad, grad_old, s_old, cand, scratch)


@njit(cache=True)
def fit_term(s, gmat, m):
    """Sum of s**m weighted distances."""
    total = 0.0
    for t in range(s.shape[0]):
        for k in range(s.shape[1]):
            total += s[t, k] ** m * gmat[t, k]
    return total


@njit(cache=True)
def penalty_term(s):
    """Sum over consecutive row pairs of the squared L1 difference."""
    total = 0.0
    for t in range(1, s.shape[0]):
        l1 = 0.0
        for k in range(s.shape[1]):
            l1 += abs(s[t, k] - s[t - 1, k])
        total += l1 * l1
    return total

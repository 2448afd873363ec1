# -*- encoding: utf-8
"""Compiled inner loops.

Everything here is ``nogil``, so worker threads run these kernels
concurrently.  Arrays are float64 unless noted; dates are 0-based.

"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def step_paths(spot, drift, diffusion, normals, out):
    """Exact lognormal steps from ``spot`` along every row of ``normals``."""
    n, m = normals.shape
    for j in range(n):
        x = spot
        for k in range(m):
            x = x * math.exp(drift[k] + diffusion[k] * normals[j, k])
            out[j, k] = x


@njit(cache=True, nogil=True)
def _features(x, t, with_time, out):
    out[0] = 1.0
    out[1] = x
    out[2] = x * x
    if with_time:
        out[3] = t
        out[4] = t * x
        out[5] = t * x * x


@njit(cache=True, nogil=True)
def _continuation(alpha, x, t, with_time):
    value = alpha[0] + alpha[1] * x + alpha[2] * x * x
    if with_time:
        value += alpha[3] * t + alpha[4] * t * x + alpha[5] * t * x * x
    return value


@njit(cache=True, nogil=True)
def _value_path(x, f, disc, alphas, known, date_block, times, with_time,
                held_out, kappa_out):
    # Backward pass over one path.  Exercise needs a strictly positive
    # payoff and known coefficients; ties go to exercise.
    last = x.shape[0] - 1
    value = f[last]
    exercised_at = last
    kappa_out[last] = last
    for k in range(last - 1, -1, -1):
        held = disc[k] * value
        held_out[k] = held
        b = date_block[k]
        exercise = False
        if f[k] > 0.0 and known[b]:
            exercise = f[k] >= _continuation(alphas[b], x[k], times[k], with_time)
        if exercise:
            value = f[k]
            exercised_at = k
        else:
            value = held
        kappa_out[k] = exercised_at
    return value


@njit(cache=True, nogil=True)
def backward_values(paths, payoffs, disc, alphas, known, date_block, times,
                    with_time):
    """Values every path; returns (P_1, P̃_{k+1} per date, κ_k per date)."""
    n, m = paths.shape
    first = np.empty(n)
    held = np.zeros((n, max(m - 1, 0)))
    kappa = np.empty((n, m), dtype=np.int64)
    for j in range(n):
        first[j] = _value_path(
            paths[j], payoffs[j], disc, alphas, known, date_block, times,
            with_time, held[j], kappa[j]
        )
    return first, held, kappa


@njit(cache=True, nogil=True)
def value_and_accumulate(paths, payoffs, disc, alphas, known, date_block,
                         times, with_time, boundary, beta, to_today,
                         matrices, vectors):
    """Values a batch of paths and adds them to the normal equations.

    A date with a NaN ``boundary`` uses the in-the-money indicator as
    the regression weight, otherwise the Gaussian bump around it.
    Returns the sum and the sum of squares of the discounted prices.

    """
    n, m = paths.shape
    p_b = matrices.shape[1]
    held = np.empty(max(m - 1, 0))
    kappa = np.empty(m, dtype=np.int64)
    f = np.zeros(p_b)
    total = 0.0
    total_sq = 0.0
    for j in range(n):
        first = _value_path(
            paths[j], payoffs[j], disc, alphas, known, date_block, times,
            with_time, held, kappa
        )
        price = to_today * first
        total += price
        total_sq += price * price

        for k in range(m - 1):
            x = paths[j, k]
            if math.isnan(boundary[k]):
                weight = 1.0 if payoffs[j, k] > 0.0 else 0.0
            else:
                z = (x - boundary[k]) / beta[k]
                weight = math.exp(-0.5 * z * z)
            if weight == 0.0:
                continue
            b = date_block[k]
            _features(x, times[k], with_time, f)
            for a in range(p_b):
                vectors[b, a] += weight * f[a] * held[k]
                for c in range(p_b):
                    matrices[b, a, c] += weight * (f[a] * f[c])
    return total, total_sq


@njit(cache=True, nogil=True)
def _exercise_gap(alpha, x, t, with_time, strike):
    return (strike - x) - _continuation(alpha, x, t, with_time)


@njit(cache=True, nogil=True)
def boundary_root(alpha, t, with_time, strike, floor, tolerance, n_scan):
    """Spot where the put's payoff meets the fitted continuation value.

    Returns the strike if exercise already wins there.  Otherwise scans
    ``n_scan`` equally spaced spots from the strike down to ``floor`` for
    the first one where it does, and bisects back to ``tolerance``.
    NaN if exercise never wins.

    """
    if _exercise_gap(alpha, strike, t, with_time, strike) >= 0.0:
        return strike
    step = (strike - floor) / (n_scan - 1)
    hi = strike
    for i in range(1, n_scan):
        lo = strike - i * step
        if _exercise_gap(alpha, lo, t, with_time, strike) >= 0.0:
            while hi - lo > tolerance:
                mid = 0.5 * (hi + lo)
                if _exercise_gap(alpha, mid, t, with_time, strike) >= 0.0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (hi + lo)
        hi = lo
    return np.nan


@njit(cache=True, nogil=True)
def boundary_roots(alphas, known, date_block, times, with_time, strike,
                   floor, tolerance, n_scan, out):
    """``boundary_root`` at every date but the last; NaN where unknown."""
    m = times.shape[0]
    for k in range(m):
        b = date_block[k]
        if k == m - 1 or not known[b]:
            out[k] = np.nan
        else:
            out[k] = boundary_root(
                alphas[b], times[k], with_time, strike, floor, tolerance, n_scan
            )


@njit(cache=True, nogil=True)
def implicit_march(values, intrinsic, lower, diag, upper, left_values,
                   exercise, use_psor, omega, tol, max_sweeps, boundary_out):
    """Fully implicit backward march of the Black-Scholes PDE.

    ``values`` holds the payoff on the whole S-grid on entry and today's
    values on exit.  Step ``s`` moves from time-to-maturity (s-1)·dt to
    s·dt; where ``exercise[s]`` is set, values are floored at the
    intrinsic value (by projection, or by PSOR).  ``boundary_out[s]`` is
    the largest grid spot where the floor binds, NaN if none.

    Returns -1, or the step at which PSOR ran out of sweeps.

    """
    n_inner = diag.shape[0]
    n_steps = left_values.shape[0] - 1

    # Thomas factorisation; the matrix is the same at every step.
    c_prime = np.empty(n_inner)
    denom = np.empty(n_inner)
    denom[0] = diag[0]
    c_prime[0] = upper[0] / diag[0]
    for i in range(1, n_inner):
        denom[i] = diag[i] - lower[i] * c_prime[i - 1]
        c_prime[i] = upper[i] / denom[i]

    rhs = np.empty(n_inner)
    d_prime = np.empty(n_inner)

    for s in range(1, n_steps + 1):
        for i in range(n_inner):
            rhs[i] = values[i + 1]
        values[0] = left_values[s]
        values[n_inner + 1] = 0.0
        rhs[0] -= lower[0] * values[0]

        d_prime[0] = rhs[0] / denom[0]
        for i in range(1, n_inner):
            d_prime[i] = (rhs[i] - lower[i] * d_prime[i - 1]) / denom[i]
        values[n_inner] = d_prime[n_inner - 1]
        for i in range(n_inner - 2, -1, -1):
            values[i + 1] = d_prime[i] - c_prime[i] * values[i + 2]

        boundary_out[s] = np.nan
        if not exercise[s]:
            continue

        if use_psor:
            converged = False
            for _ in range(max_sweeps):
                change = 0.0
                for i in range(n_inner):
                    y = rhs[i]
                    if i > 0:
                        y -= lower[i] * values[i]
                    if i < n_inner - 1:
                        y -= upper[i] * values[i + 2]
                    y /= diag[i]
                    old = values[i + 1]
                    new = old + omega * (y - old)
                    if new < intrinsic[i + 1]:
                        new = intrinsic[i + 1]
                    values[i + 1] = new
                    if abs(new - old) > change:
                        change = abs(new - old)
                if change < tol:
                    converged = True
                    break
            if not converged:
                return s
        else:
            for i in range(1, n_inner + 1):
                if values[i] < intrinsic[i]:
                    values[i] = intrinsic[i]

        for i in range(1, n_inner + 1):
            if intrinsic[i] > 0.0 and values[i] <= intrinsic[i]:
                boundary_out[s] = i
    return -1

"""Symmetric tridiagonal eigenproblems: Sturm bisection and inverse iteration.

The matrix has diagonal ``d`` (length N) and off-diagonal ``e`` (length N-1).
Eigenvalues are located by bisection on the Sturm count (the number of
negative pivots of T - x I); eigenvectors come from inverse iteration with a
banded LU solve.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

try:
    from numba import njit
except ImportError:     # pure numpy fallback, same results, slower
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def sturm_count(d, e2, x):
    """Number of eigenvalues strictly below x; e2 holds the squared off-diagonal."""
    count = 0
    q = d[0] - x
    if q < 0:
        count += 1
    tiny = 1e-300
    for i in range(1, d.size):
        if q == 0.0:
            q = tiny
        q = d[i] - x - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


@njit(cache=True)
def _bisect_range(d, e2, lo, hi, first, last, tol):
    """Eigenvalues with indices first..last (0-based), bracketed by [lo, hi]."""
    out = np.empty(last - first + 1)
    for j in range(first, last + 1):
        a, b = lo, hi
        # reuse the previous eigenvalue as a lower bracket
        if j > first:
            a = max(a, out[j - first - 1] - tol)
        while b - a > tol * max(1.0, abs(a) + abs(b)):
            mid = 0.5 * (a + b)
            if sturm_count(d, e2, mid) > j:
                b = mid
            else:
                a = mid
        out[j - first] = 0.5 * (a + b)
    return out


def gershgorin(d, e):
    ae = np.abs(e)
    r = np.zeros_like(d)
    r[:-1] += ae
    r[1:] += ae
    return float(np.min(d - r)), float(np.max(d + r))


def eigvals_below(d, e, upper: float, max_count: int | None = None, tol: float = 1e-14):
    """All eigenvalues < upper (at most ``max_count`` of the smallest)."""
    d = np.ascontiguousarray(d, dtype=float)
    e2 = np.ascontiguousarray(np.asarray(e, dtype=float) ** 2)
    lo, hi = gershgorin(d, np.asarray(e, dtype=float))
    hi = min(hi, upper) if np.isfinite(upper) else hi
    n_below = sturm_count(d, e2, hi) if np.isfinite(upper) else d.size
    if max_count is not None:
        n_below = min(n_below, max_count)
    if n_below == 0:
        return np.empty(0)
    return _bisect_range(d, e2, lo - 1.0, hi + 1e-12 * abs(hi), 0, n_below - 1, tol)


def eigvals_index(d, e, first: int, last: int, tol: float = 1e-14):
    """Eigenvalues with indices first..last inclusive (ascending order)."""
    d = np.ascontiguousarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    e2 = np.ascontiguousarray(e**2)
    lo, hi = gershgorin(d, e)
    return _bisect_range(d, e2, lo - 1.0, hi + 1.0, first, last, tol)


def inverse_iteration(d, e, lam: float, iters: int = 3, seed: int = 0):
    """Unit eigenvector for the eigenvalue lam (assumed simple)."""
    n = d.size
    shift = lam + 1e-10 * max(1.0, abs(lam))
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[1] = d - shift
    ab[2, :-1] = e
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        v = solve_banded((1, 1), ab, v)
        v /= np.linalg.norm(v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v

"""Shared fixtures and a from-scratch brute-force oracle.

The oracle here deliberately repeats none of the library's code paths: it
evaluates the objective by direct summation and minimizes each coordinate
subproblem by scanning the finite candidate set {0} union {ratios}. A
piecewise-linear convex function attains its minimum at a kink, so the
scan is exact up to float arithmetic.
"""

import numpy as np
import pytest

from l1line import DataMatrix

# Reference data set used throughout: five points in four dimensions with
# a fully worked, hand-checkable solution path of four intervals.
FIVE_POINTS = np.array(
    [
        [4.0, -2.0, 3.0, -6.0],
        [-3.0, 4.0, 2.0, -1.0],
        [2.0, 3.0, -3.0, -2.0],
        [-3.0, 4.0, 2.0, 3.0],
        [5.0, 3.0, 2.0, -1.0],
    ]
)


@pytest.fixture
def five():
    return DataMatrix(FIVE_POINTS.copy())


def raw_objective(x, v, alpha, lam):
    """Sum_i ||x_i - v * alpha_i||_1 + lam * ||v||_1, by direct summation."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    err = np.abs(x - np.outer(alpha, v)).sum()
    return float(err + lam * np.abs(v).sum())


def scan_weighted_min(ratios, weights, lam, excluded=0.0):
    """Minimize sum_i w_i |r_i - t| + lam |t| over the kink candidates.

    Returns (t, value). Ties keep the first candidate in scan order,
    0 first and then the ratios as given.
    """
    r = np.asarray(ratios, dtype=float)
    w = np.asarray(weights, dtype=float)
    best_t, best_val = 0.0, float((w * np.abs(r)).sum())
    for t in r:
        val = float((w * np.abs(r - t)).sum() + lam * abs(t))
        if val < best_val:
            best_t, best_val = float(t), val
    return best_t, best_val + float(excluded)


def scan_best_z(x, lam):
    """Full-problem brute force: min over preserved columns of the
    separable per-target minima plus the preserved coordinate's penalty."""
    x = np.asarray(x, dtype=float)
    n, m = x.shape
    best = np.inf
    for jhat in range(m):
        pivot = x[:, jhat]
        live = pivot != 0.0
        if not live.any():
            continue
        w = np.abs(pivot[live])
        total = lam  # penalty of the preserved coordinate itself
        for j in range(m):
            if j == jhat:
                continue
            ratios = x[live, j] / pivot[live]
            excluded = float(np.abs(x[~live, j]).sum())
            _, val = scan_weighted_min(ratios, w, lam, excluded)
            total += val
        best = min(best, total)
    return best


def random_matrix(rng, n, m, zero_frac=0.0, integer=False):
    """Random data with at least one usable column. zero_frac plants exact
    zeros so degenerate ratios and excluded points get exercised."""
    while True:
        if integer:
            x = rng.integers(-5, 6, size=(n, m)).astype(float)
        else:
            x = rng.normal(scale=3.0, size=(n, m))
        if zero_frac > 0.0:
            x[rng.random(size=(n, m)) < zero_frac] = 0.0
        if np.any(np.any(x != 0.0, axis=0)):
            return x

"""Ordinary least-squares comparison line: dominant right singular direction.

Power iteration on the m-by-m Gram matrix X'X. Deterministic: the start
vector is all-ones normalized, and the one source of randomness (restart
after a degenerate iterate) uses a fixed seed.
"""

from __future__ import annotations

import warnings

import numpy as np

from .core import ContractError, DataMatrix

__all__ = ["l2_best_fit_line"]

_RESTART_SEED = 0x5EED


def l2_best_fit_line(
    data: DataMatrix, max_iter: int = 10000, tol: float = 1e-10
) -> np.ndarray:
    """Unit direction maximizing captured squared norm.

    Sign convention: the first coordinate with magnitude above 1e-12 is made
    positive. If the iteration has not moved less than tol between steps
    after max_iter rounds, a warning is emitted and the last iterate is
    returned.
    """
    x = data.x
    if not np.any(x != 0.0):
        raise ContractError("all points are zero; no direction to fit")
    gram = x.T @ x
    m = data.m

    v = np.ones(m) / np.sqrt(m)
    rng = np.random.default_rng(_RESTART_SEED)
    converged = False
    for _ in range(max_iter):
        w = gram @ v
        norm = float(np.linalg.norm(w))
        if norm <= 1e-30:
            # Start vector (numerically) in the null space; restart randomly.
            v = rng.normal(size=m)
            v /= np.linalg.norm(v)
            continue
        w /= norm
        if float(np.dot(w, v)) < 0.0:
            w = -w
        if float(np.linalg.norm(w - v)) < tol:
            v = w
            converged = True
            break
        v = w
    if not converged:
        warnings.warn(
            "power iteration did not converge within "
            f"{max_iter} iterations (tol {tol}); returning the last iterate",
            RuntimeWarning,
            stacklevel=2,
        )

    for c in v:
        if abs(c) > 1e-12:
            if c < 0.0:
                v = -v
            break
    return v

"""Best line through the origin at one penalty value.

Tries every usable preserved coordinate, solves all single-coordinate
subproblems from that coordinate's sorted-ratio table, and keeps the
candidate with the smallest objective (ties to the smaller column index).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import ContractError, DataMatrix, DegenerateColumnError, LineFit
from .kernels import column_errors, preserved_table, solve_columns

__all__ = ["fit_line", "fit_line_preserving"]


def _check_lam(lam: float) -> float:
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ContractError(f"penalty must be finite and nonnegative, got {lam}")
    return float(lam)


def fit_line_preserving(data: DataMatrix, preserved: int, lam: float) -> LineFit:
    """Optimal line with one fixed coordinate pinned to 1.

    Raises DegenerateColumnError when that coordinate is zero for every
    point. Runs in O(m n log n) on first use of a preserved coordinate
    (table build), O(m n) after.
    """
    lam = _check_lam(lam)
    table = preserved_table(data, preserved)
    values, found, pos = solve_columns(table, lam)
    errs = column_errors(table, values, found, pos)

    v = values.copy()
    v[preserved] = 1.0
    error = float(errs.sum() - errs[preserved])
    weight = 1.0 + float(np.abs(values).sum() - abs(values[preserved]))
    z = error + lam * weight
    return LineFit(
        v=v,
        preserved=preserved,
        alpha=data.column(preserved).copy(),
        z=z,
    )


def fit_line(data: DataMatrix, lam: float, threads: int = 1) -> LineFit:
    """Best line over all usable preserved coordinates at one penalty.

    Columns that are zero for every point are skipped as candidates; if all
    columns are zero the all-zero line (objective 0) is returned. Ties in
    the objective keep the smallest column index. threads > 1 evaluates
    candidates in a thread pool with a deterministic reduction.
    """
    lam = _check_lam(lam)
    usable = data.usable_columns()
    if not usable:
        v = np.zeros(data.m)
        return LineFit(v=v, preserved=None, alpha=np.zeros(data.n), z=0.0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fits = list(
                pool.map(lambda j: fit_line_preserving(data, j, lam), usable)
            )
    else:
        fits = [fit_line_preserving(data, j, lam) for j in usable]

    best = fits[0]
    for fit in fits[1:]:
        if fit.z < best.z:
            best = fit
    return best

"""Sorted-ratio tables and the vectorized weighted-median machinery.

Fixing a preserved coordinate reduces the fit to one independent scalar
problem per remaining coordinate: minimize sum_i w_i |r_i - t| + lam |t|
over t, where r_i is the ratio of the target to the preserved coordinate
and w_i the magnitude of the preserved coordinate. Everything here works on
a per-preserved-coordinate table holding, for every target column at once,
the ratios sorted ascending with weight prefix sums, so a solve at one
penalty is a couple of array passes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CONDITION_TOL, DataMatrix, DegenerateColumnError

__all__ = [
    "PreservedTable",
    "PairTable",
    "preserved_table",
    "pair_table",
    "solve_columns",
    "column_errors",
    "resolve_flat",
    "resolve_pairs",
    "candidate_spans",
    "positive_knots",
]

# Per-DataMatrix cache of tables, LRU-evicted. A table at n=1000, m=100 is
# ~6 MB, so the cap keeps memory flat when sweeping many preserved columns.
TABLE_CACHE_CAP = 8

# Small matrices get every preserved coordinate's table built in one batched
# numpy pass (n * m * usable cells at most this); larger ones are built per
# coordinate so memory stays bounded.
BATCH_CELL_CAP = 1 << 18

# Ratio planted on batched slots whose point is excluded (zero preserved
# coordinate). Sorts after every real ratio, multiplies to an exact 0.0
# against its zero weight, and is never selected (the live mask, and a span
# that can't cover a nonnegative penalty).
_INERT_RATIO = np.finfo(float).max

# Memoizes "this matrix is too big to batch" on DataMatrix._pairs.
_NO_PAIRS = object()


@dataclass(frozen=True, eq=False)
class PreservedTable:
    """All per-target sorted-ratio data for one preserved coordinate.

    Points whose preserved coordinate is zero cannot sit on any line with
    that coordinate pinned to 1; they contribute a constant error
    (excluded_mass) per target column and are left out of the table rows.

    Arrays are (p, m) with p included points; column layout matches the data
    (the preserved column itself is present but meaningless to consumers).
    Sort is ascending by ratio with ties broken by ascending original point
    index (stable sort over rows already in index order).
    """

    preserved: int
    rows: np.ndarray        # (p,) original point indices of included points
    row_ids: np.ndarray     # (p, m) original point index at each sorted slot
    ratios: np.ndarray      # (p, m) sorted ascending per column
    signs: np.ndarray       # (p, m) +1 where ratio >= 0 (also -0.0), else -1
    weights: np.ndarray     # (p, m) |preserved coordinate|, sort-aligned
    before: np.ndarray      # (p, m) weight strictly below the slot
    after: np.ndarray       # (p, m) weight strictly above the slot
    wr_before: np.ndarray   # (p, m) weight*ratio strictly below
    wr_after: np.ndarray    # (p, m) weight*ratio strictly above
    col_mass: np.ndarray    # (m,) sum of |column| over all points
    excluded_mass: np.ndarray  # (m,) sum of |column| over excluded points
    total_weight: float     # sum of weights == col_mass[preserved]
    # Batched tables keep excluded points as inert zero-weight slots sorted
    # last instead of dropping their rows; live is False exactly there.
    # None means every slot is a real point.
    live: np.ndarray | None = None

    @property
    def p(self) -> int:
        return self.ratios.shape[0]

    @property
    def m(self) -> int:
        return self.ratios.shape[1]


@dataclass(frozen=True, eq=False)
class PairTable:
    """Sorted-ratio data for every (preserved, target) pair at once.

    Arrays are (n, u*m) with u usable preserved columns; the flat pair index
    of preserved usable[b] and target j is b*m + j. Excluded points sit as
    inert slots (see PreservedTable.live). Built only for small matrices;
    the per-preserved tables are column views into these arrays.
    """

    usable: tuple[int, ...]
    m: int
    ratios: np.ndarray
    signs: np.ndarray
    weights: np.ndarray
    before: np.ndarray
    after: np.ndarray
    wr_before: np.ndarray
    wr_after: np.ndarray
    live: np.ndarray | None
    excluded: np.ndarray      # (u*m,) per-pair excluded-point mass
    col_mass: np.ndarray      # (u*m,) target column absolute mass, tiled
    diag: np.ndarray          # (u,) flat indices of the preserved==target pairs
    row_ids: np.ndarray       # (n, u*m) original point index at each slot

    @property
    def n(self) -> int:
        return self.ratios.shape[0]


def pair_table(data: DataMatrix) -> PairTable | None:
    """Batched tables for every usable preserved column, or None.

    Returns None when the matrix is too large to batch (or has no usable
    column); the decision is memoized on the matrix. Building also fills
    the per-preserved table cache with column views.
    """
    pt = data._pairs
    if pt is not None:
        return None if pt is _NO_PAIRS else pt

    x = data.x
    n, m = x.shape
    usable = data.usable_columns()
    if not usable or n * m * len(usable) > BATCH_CELL_CAP:
        data._pairs = _NO_PAIRS
        return None

    u = len(usable)
    absx = np.abs(x)
    col_mass = absx.sum(axis=0)
    piv = x[:, usable]
    inert = piv == 0.0
    w = np.abs(piv)
    raw = (x[:, None, :] / np.where(inert, 1.0, piv)[:, :, None]).reshape(
        n, u * m
    )
    has_inert = inert.any()
    if has_inert:
        raw.reshape(n, u, m)[inert] = _INERT_RATIO
    order = np.argsort(raw, axis=0, kind="stable")
    ratios = np.take_along_axis(raw, order, axis=0)
    weights = np.take_along_axis(np.repeat(w, m, axis=1), order, axis=0)

    cw = np.cumsum(weights, axis=0)
    before = cw - weights
    after = cw[-1] - cw
    wr = weights * ratios
    cwr = np.cumsum(wr, axis=0)
    wr_before = cwr - wr
    wr_after = cwr[-1] - cwr

    usable_arr = np.asarray(usable)
    pt = PairTable(
        usable=tuple(usable),
        m=m,
        ratios=ratios,
        signs=np.where(ratios >= 0.0, 1.0, -1.0),
        weights=weights,
        before=before,
        after=after,
        wr_before=wr_before,
        wr_after=wr_after,
        live=weights > 0.0 if has_inert else None,
        excluded=(inert.astype(float).T @ absx).reshape(u * m),
        col_mass=np.tile(col_mass, u),
        diag=usable_arr + m * np.arange(u),
        row_ids=order,
    )
    data._pairs = pt

    cache = data._tables
    all_rows = np.arange(n)
    inert_cols = inert.any(axis=0)
    for b, pivot in enumerate(usable):
        sl = slice(b * m, (b + 1) * m)
        cache[pivot] = PreservedTable(
            preserved=pivot,
            rows=np.flatnonzero(~inert[:, b]) if inert_cols[b] else all_rows,
            row_ids=order[:, sl],
            ratios=ratios[:, sl],
            signs=pt.signs[:, sl],
            weights=weights[:, sl],
            before=before[:, sl],
            after=after[:, sl],
            wr_before=wr_before[:, sl],
            wr_after=wr_after[:, sl],
            col_mass=col_mass,
            excluded_mass=pt.excluded[sl],
            total_weight=float(col_mass[pivot]),
            live=pt.live[:, sl] if (pt.live is not None and inert_cols[b]) else None,
        )
    return pt


def preserved_table(data: DataMatrix, preserved: int) -> PreservedTable:
    """Build (or fetch from the per-matrix cache) the table for one column."""
    if not 0 <= preserved < data.m:
        raise DegenerateColumnError(f"no such column: {preserved}")
    cache = data._tables
    hit = cache.get(preserved)
    if hit is not None:
        cache.move_to_end(preserved)
        return hit

    if pair_table(data) is not None:
        hit = cache.get(preserved)
        if hit is not None:
            return hit
        raise DegenerateColumnError(
            f"column {preserved} is zero for every point and cannot be preserved"
        )

    x = data.x
    pivot = x[:, preserved]
    keep = pivot != 0.0
    if not keep.any():
        raise DegenerateColumnError(
            f"column {preserved} is zero for every point and cannot be preserved"
        )
    rows = np.flatnonzero(keep)
    sub = x[keep]
    denom = sub[:, preserved]
    w = np.abs(denom)
    raw = sub / denom[:, None]

    order = np.argsort(raw, axis=0, kind="stable")
    ratios = np.take_along_axis(raw, order, axis=0)
    weights = w[order]
    row_ids = rows[order]

    cw = np.cumsum(weights, axis=0)
    # span arithmetic must match the batched lane bit for bit: subtract each
    # column's own cumsum total, not one pairwise-summed scalar
    before = cw - weights
    after = cw[-1] - cw

    wr = weights * ratios
    cwr = np.cumsum(wr, axis=0)
    wr_before = cwr - wr
    wr_after = cwr[-1] - cwr

    col_mass = np.abs(x).sum(axis=0)
    if keep.all():
        excluded_mass = np.zeros(data.m)
    else:
        excluded_mass = np.abs(x[~keep]).sum(axis=0)

    table = PreservedTable(
        preserved=preserved,
        rows=rows,
        row_ids=row_ids,
        ratios=ratios,
        signs=np.where(ratios >= 0.0, 1.0, -1.0),
        weights=weights,
        before=before,
        after=after,
        wr_before=wr_before,
        wr_after=wr_after,
        col_mass=col_mass,
        excluded_mass=excluded_mass,
        total_weight=float(col_mass[preserved]),
    )
    cache[preserved] = table
    if len(cache) > TABLE_CACHE_CAP:
        cache.popitem(last=False)
    return table


def solve_columns(table: PreservedTable, lam: float):
    """Optimal coefficient for every target column at one penalty.

    Scans sorted slots for the first one k with
    |sgn(r_k) lam + before_k - after_k| <= w_k (closed, abs tol); that
    slot's ratio is the coefficient, otherwise the coefficient is 0.

    Returns (values, found, pos): (m,) float, (m,) bool, (m,) int arrays.
    The preserved column's entry is meaningless; callers mask it.
    """
    cond = (
        np.abs(table.signs * lam + table.before - table.after)
        <= table.weights + CONDITION_TOL
    )
    if table.live is not None:
        cond &= table.live
    found = cond.any(axis=0)
    pos = cond.argmax(axis=0)
    cols = np.arange(table.m)
    values = np.where(found, table.ratios[pos, cols], 0.0)
    return values, found, pos


def column_errors(table: PreservedTable, values, found, pos) -> np.ndarray:
    """Attained error sum_i |x_ij - t * x_i,preserved| per column.

    Includes the constant contribution of excluded points. For columns with
    no satisfying slot (t = 0) this is simply the column's absolute mass.
    """
    cols = np.arange(table.m)
    at = values * (table.before[pos, cols] - table.after[pos, cols])
    at = at + (table.wr_after[pos, cols] - table.wr_before[pos, cols])
    return np.where(found, at + table.excluded_mass, table.col_mass)


# Element cap per broadcast block in resolve_flat; a block materializes a
# handful of float temporaries of this size, so peak memory stays flat no
# matter how many pairs are requested.
_FLAT_BLOCK = 1 << 21


def _resolve_arrays(
    signs, before, after, weights, ratios, wr_before, wr_after,
    excluded, col_mass, live, cols, lams,
):
    g = lams.shape[0]
    values = np.empty(g)
    errors = np.empty(g)
    step = max(1, _FLAT_BLOCK // max(1, signs.shape[0]))
    for lo in range(0, g, step):
        sl = slice(lo, min(lo + step, g))
        c = cols[sl]
        base = before[:, c] - after[:, c]
        cond = np.abs(signs[:, c] * lams[sl] + base) <= weights[:, c] + CONDITION_TOL
        if live is not None:
            cond &= live[:, c]
        found = cond.any(axis=0)
        pos = cond.argmax(axis=0)
        vals = np.where(found, ratios[pos, c], 0.0)
        k = np.arange(c.shape[0])
        err = vals * base[pos, k] + (wr_after[pos, c] - wr_before[pos, c])
        values[sl] = vals
        errors[sl] = np.where(found, err + excluded[c], col_mass[c])
    return values, errors


def resolve_flat(table: PreservedTable, cols: np.ndarray, lams: np.ndarray):
    """Coefficient and attained error for many (target column, penalty)
    pairs at once; cols and lams run in parallel.

    Same slot-scan semantics as solve_columns. Returns (values, errors),
    one entry per pair; errors include the excluded-point mass.
    """
    return _resolve_arrays(
        table.signs, table.before, table.after, table.weights, table.ratios,
        table.wr_before, table.wr_after, table.excluded_mass, table.col_mass,
        table.live, cols, lams,
    )


def resolve_pairs(pairs: PairTable, pair_cols: np.ndarray, lams: np.ndarray):
    """resolve_flat over flat (preserved, target) pair indices."""
    return _resolve_arrays(
        pairs.signs, pairs.before, pairs.after, pairs.weights, pairs.ratios,
        pairs.wr_before, pairs.wr_after, pairs.excluded, pairs.col_mass,
        pairs.live, pair_cols, lams,
    )


def candidate_spans(table: PreservedTable):
    """Penalty span over which each sorted slot is the optimum.

    Slot k of column j satisfies the optimality test exactly for penalties
    in [lo, hi] with lo = sgn(r)(after - before) - w and hi = lo + 2w.
    Slots with hi <= 0 never matter for nonnegative penalties.

    Returns (lo, hi, active): (p, m) float, float, bool arrays.
    """
    lo = table.signs * (table.after - table.before) - table.weights
    hi = lo + 2.0 * table.weights
    active = hi > 0.0
    return lo, hi, active


def positive_knots(table: PreservedTable) -> np.ndarray:
    """Every positive penalty where some target's coefficient can change.

    Union over target columns of active span starts (where positive) and
    span ends. Multiset: duplicates are not removed. The preserved column
    is excluded.
    """
    lo, hi, active = candidate_spans(table)
    mask = np.ones(table.m, dtype=bool)
    mask[table.preserved] = False
    lo = lo[:, mask]
    hi = hi[:, mask]
    active = active[:, mask]
    starts = lo[active & (lo > 0.0)]
    ends = hi[active]
    return np.concatenate([starts, ends])

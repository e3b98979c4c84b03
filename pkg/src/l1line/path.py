"""Exact penalty paths: per-coordinate breakpoints and the merged envelope.

Every coordinate's optimal coefficient is piecewise constant in the
penalty, changing only at finitely many values derivable from the sorted
ratio spans. Fixing a preserved coordinate therefore gives a piecewise
constant vector path whose objective is piecewise affine; the overall
solution path is the lower envelope of those affine families across all
preserved coordinates.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    OBJECTIVE_TOL,
    ContractError,
    DataMatrix,
    LineFit,
    PenaltyInterval,
    SolutionPath,
)
from .kernels import (
    PairTable,
    candidate_spans,
    pair_table,
    preserved_table,
    resolve_flat,
    resolve_pairs,
)

__all__ = [
    "PathSegment",
    "PerCoordinatePath",
    "breakpoints_for_preserved",
    "merge_path",
    "build_path",
    "query_path",
]

# Pointer slack when advancing per-coordinate segments past a (deduplicated)
# boundary; must be well below the dedup tolerance.
_EDGE_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class PathSegment:
    """One constant piece of a fixed-preserved-coordinate path.

    On (lo, hi) the coefficient vector is v (preserved slot pinned to 1) and
    the objective is error_intercept + lam * l1_slope.
    """

    lo: float
    hi: float
    v: np.ndarray
    error_intercept: float
    l1_slope: float


@dataclass(frozen=True, eq=False)
class PerCoordinatePath:
    """Everything the penalty sweep yields for one preserved coordinate.

    breakpoints is the reported listing: per target coordinate, every
    candidate penalty that is nonnegative, or the target's death penalty
    when no candidate qualifies. knots is the full set of positive change
    points (a superset of the information in breakpoints), which the merge
    step requires. segments cover [0, inf) contiguously.
    """

    preserved: int
    breakpoints: tuple[float, ...]
    knots: tuple[float, ...]
    segments: tuple[PathSegment, ...]

    def segment_at(self, lam: float) -> PathSegment:
        if not (lam >= 0.0 and math.isfinite(lam)):
            raise ContractError(f"penalty must be finite and nonnegative, got {lam}")
        his = [seg.hi for seg in self.segments]
        idx = bisect_left(his, lam)
        if idx == len(his):
            idx -= 1
        return self.segments[idx]

    def v_at(self, lam: float) -> np.ndarray:
        """Coefficient vector on the piece owning lam (pieces right-closed)."""
        return self.segment_at(lam).v


def _dedupe_sorted(values: np.ndarray, tol: float) -> list[float]:
    out: list[float] = []
    for v in values:
        if not out or v - out[-1] > tol:
            out.append(float(v))
    return out


def _assemble(
    preserved: int,
    m: int,
    base_v: np.ndarray,
    base_e: np.ndarray,
    events: list[tuple[float, int, float, float]],
    reported: np.ndarray,
) -> PerCoordinatePath:
    """Per-coordinate path from base coefficient/error rows plus change
    events (penalty, target, new coefficient, new error). Mutates the base
    rows while sweeping."""
    events.sort(key=lambda e: e[0])
    boundaries = _dedupe_sorted(
        np.array([e[0] for e in events]), OBJECTIVE_TOL
    )

    # One state row per segment of the union sweep, then totals in bulk.
    nseg = len(boundaries) + 1
    state_v = np.empty((nseg, m))
    state_e = np.empty((nseg, m))
    state_v[0] = base_v
    state_e[0] = base_e
    ei = 0
    for s, bnd in enumerate(boundaries):
        while ei < len(events) and events[ei][0] <= bnd + _EDGE_EPS:
            _, j, val, err = events[ei]
            base_v[j] = val
            base_e[j] = err
            ei += 1
        state_v[s + 1] = base_v
        state_e[s + 1] = base_e
    state_v[:, preserved] = 1.0
    err_sums = state_e.sum(axis=1)
    slopes = np.abs(state_v).sum(axis=1)

    segments: list[PathSegment] = []
    prev = 0.0
    for s, edge in enumerate(boundaries + [math.inf]):
        vec = state_v[s].copy()
        vec.setflags(write=False)
        segments.append(
            PathSegment(
                lo=prev,
                hi=edge,
                v=vec,
                error_intercept=float(err_sums[s]),
                l1_slope=float(slopes[s]),
            )
        )
        prev = edge

    return PerCoordinatePath(
        preserved=preserved,
        breakpoints=tuple(_dedupe_sorted(reported, OBJECTIVE_TOL)),
        knots=tuple(boundaries),
        segments=tuple(segments),
    )


def breakpoints_for_preserved(data: DataMatrix, preserved: int) -> PerCoordinatePath:
    """Penalty sweep with one coordinate pinned to 1.

    For every target coordinate the candidate spans give the penalties at
    which its coefficient can change; segment values are re-solved at span
    midpoints, so every piece agrees exactly with a pointwise solve in its
    interior.
    """
    table = preserved_table(data, preserved)
    m = data.m
    lo, hi, active = candidate_spans(table)
    act = active.copy()
    act[:, preserved] = False
    target = np.ones(m, dtype=bool)
    target[preserved] = False

    # Reported listing: per target every nonnegative span start; targets
    # without one report their death penalty (largest active span end);
    # targets with no active span at all were already dead at 0.
    nonneg = act & (lo >= 0.0)
    has_nonneg = nonneg.any(axis=0)
    has_act = act.any(axis=0)
    parts = [lo[nonneg]]
    fallback = target & has_act & ~has_nonneg
    if fallback.any():
        parts.append(np.where(act, hi, -np.inf)[:, fallback].max(axis=0))
    dead = int((target & ~has_act).sum())
    if dead:
        parts.append(np.zeros(dead))
    reported = np.concatenate(parts)
    reported.sort()

    # Change points per column, deduplicated, plus one probe penalty per
    # cell (midpoints, and past-the-last for the unbounded cell).
    colgrid = np.broadcast_to(np.arange(m), lo.shape)
    pos_start = act & (lo > 0.0)
    k_vals = np.concatenate([lo[pos_start], hi[act]])
    k_cols = np.concatenate([colgrid[pos_start], colgrid[act]])
    order = np.lexsort((k_vals, k_cols))
    col_bounds: dict[int, list[float]] = {
        int(j): [0.0] for j in np.flatnonzero(target)
    }
    for c, kv in zip(k_cols[order].tolist(), k_vals[order].tolist()):
        b = col_bounds[c]
        if len(b) == 1 or kv - b[-1] > OBJECTIVE_TOL:
            b.append(kv)

    probe_vals: list[float] = []
    probe_cols: list[int] = []
    for j, b in col_bounds.items():
        for t in range(len(b) - 1):
            probe_vals.append(0.5 * (b[t] + b[t + 1]))
        probe_vals.append(b[-1] * 1.5 + 1.0)
        probe_cols.extend([j] * len(b))

    values, errs = resolve_flat(
        table, np.array(probe_cols, dtype=np.intp), np.array(probe_vals)
    )

    # Compress cells into change events per column. Equal coefficient means
    # equal error; the piece continues even if the covering slot changed
    # (tied ratios).
    vl = values.tolist()
    el = errs.tolist()
    events: list[tuple[float, int, float, float]] = []
    base_v = np.zeros(m)
    base_e = np.zeros(m)
    gi = 0
    for j, b in col_bounds.items():
        base_v[j] = last = vl[gi]
        base_e[j] = el[gi]
        gi += 1
        for t in range(1, len(b)):
            val = vl[gi]
            err = el[gi]
            gi += 1
            if val != last:
                events.append((b[t], j, val, err))
                last = val

    return _assemble(preserved, m, base_v, base_e, events, reported)


def _sweep_batched(pairs: PairTable) -> list[PerCoordinatePath]:
    """Every preserved coordinate's penalty sweep in one batched pass.

    Pair-indexed twin of breakpoints_for_preserved: identical formulas on
    the same table slots, so the outputs match the per-coordinate function
    exactly; only the grouping differs.
    """
    m = pairs.m
    u = len(pairs.usable)
    npairs = u * m
    lo = pairs.signs * (pairs.after - pairs.before) - pairs.weights
    hi = lo + 2.0 * pairs.weights
    act = hi > 0.0
    act[:, pairs.diag] = False
    pair_ok = np.ones(npairs, dtype=bool)
    pair_ok[pairs.diag] = False

    nonneg = act & (lo >= 0.0)
    has_nonneg = nonneg.any(axis=0)
    has_act = act.any(axis=0)
    pairgrid = np.broadcast_to(np.arange(npairs), lo.shape)
    rep_vals = [lo[nonneg]]
    rep_blocks = [pairgrid[nonneg] // m]
    fallback = pair_ok & has_act & ~has_nonneg
    if fallback.any():
        rep_vals.append(np.where(act, hi, -np.inf)[:, fallback].max(axis=0))
        rep_blocks.append(np.flatnonzero(fallback) // m)
    dead = pair_ok & ~has_act
    if dead.any():
        rep_vals.append(np.zeros(int(dead.sum())))
        rep_blocks.append(np.flatnonzero(dead) // m)
    rep_vals = np.concatenate(rep_vals)
    rep_blocks = np.concatenate(rep_blocks)
    rorder = np.lexsort((rep_vals, rep_blocks))
    reported: list[list[float]] = [[] for _ in range(u)]
    for blk, val in zip(
        rep_blocks[rorder].tolist(), rep_vals[rorder].tolist()
    ):
        reported[blk].append(val)

    pos_start = act & (lo > 0.0)
    k_vals = np.concatenate([lo[pos_start], hi[act]])
    k_pairs = np.concatenate([pairgrid[pos_start], pairgrid[act]])
    korder = np.lexsort((k_vals, k_pairs))
    pair_bounds: dict[int, list[float]] = {
        int(pid): [0.0] for pid in np.flatnonzero(pair_ok)
    }
    for pid, kv in zip(k_pairs[korder].tolist(), k_vals[korder].tolist()):
        b = pair_bounds[pid]
        if len(b) == 1 or kv - b[-1] > OBJECTIVE_TOL:
            b.append(kv)

    probe_vals: list[float] = []
    probe_pairs: list[int] = []
    for pid, b in pair_bounds.items():
        for t in range(len(b) - 1):
            probe_vals.append(0.5 * (b[t] + b[t + 1]))
        probe_vals.append(b[-1] * 1.5 + 1.0)
        probe_pairs.extend([pid] * len(b))

    values, errs = resolve_pairs(
        pairs, np.array(probe_pairs, dtype=np.intp), np.array(probe_vals)
    )

    vl = values.tolist()
    el = errs.tolist()
    base_v = np.zeros((u, m))
    base_e = np.zeros((u, m))
    events: list[list[tuple[float, int, float, float]]] = [[] for _ in range(u)]
    gi = 0
    for pid, b in pair_bounds.items():
        blk, j = divmod(pid, m)
        ev = events[blk]
        base_v[blk, j] = last = vl[gi]
        base_e[blk, j] = el[gi]
        gi += 1
        for t in range(1, len(b)):
            val = vl[gi]
            err = el[gi]
            gi += 1
            if val != last:
                ev.append((b[t], j, val, err))
                last = val

    return [
        _assemble(
            pairs.usable[blk],
            m,
            base_v[blk],
            base_e[blk],
            events[blk],
            np.array(reported[blk]),
        )
        for blk in range(u)
    ]


def _zero_path(data: DataMatrix) -> SolutionPath:
    v = np.zeros(data.m)
    v.setflags(write=False)
    interval = PenaltyInterval(
        lo=0.0,
        hi=math.inf,
        v_star=v,
        preserved=None,
        error_intercept=0.0,
        l1_slope=0.0,
    )
    return SolutionPath(intervals=(interval,), diagnostics={}, data=data)


def merge_path(data: DataMatrix, per_coordinate) -> SolutionPath:
    """Lower envelope over the per-preserved-coordinate paths.

    per_coordinate must hold one PerCoordinatePath per usable column of the
    data, in ascending preserved order. Within each union interval every
    candidate's objective is exactly affine, so each candidate's winning
    window is closed-form; enumerating all windows emits every envelope
    piece in one pass. Ties (equal value and slope) go to the smaller
    preserved index.
    """
    paths = list(per_coordinate)
    usable = data.usable_columns()
    if [p.preserved for p in paths] != usable:
        raise ContractError(
            "need exactly one per-coordinate path for each usable column, "
            "sorted by preserved index"
        )
    if not paths:
        return _zero_path(data)

    knots = np.array(sorted(k for p in paths for k in p.knots))
    boundaries = _dedupe_sorted(knots, OBJECTIVE_TOL)

    nq = len(paths)
    pieces: list[tuple[float, int, PathSegment]] = []  # (start, path idx, segment)
    diagnostics: dict = {"union_knots": len(boundaries), "envelope_fallbacks": 0}
    multi: list[tuple[float, float, int]] = []

    # Active segment per path on every union interval, plus its objective
    # line, all gathered up front.
    starts_arr = np.empty(len(boundaries) + 1)
    starts_arr[0] = 0.0
    starts_arr[1:] = boundaries
    nt = starts_arr.shape[0]
    seg_lists = [p.segments for p in paths]
    seg_idx = np.empty((nq, nt), dtype=np.intp)
    cs = np.empty((nq, nt))
    ss = np.empty((nq, nt))
    for q, segs in enumerate(seg_lists):
        his = np.array([s.hi for s in segs])
        idx = np.searchsorted(his, starts_arr + _EDGE_EPS, side="right")
        np.minimum(idx, len(segs) - 1, out=idx)
        seg_idx[q] = idx
        cs[q] = np.array([s.error_intercept for s in segs])[idx]
        ss[q] = np.array([s.l1_slope for s in segs])[idx]
    z_at_start = cs + ss * starts_arr

    def emit(start: float, q: int, t: int) -> None:
        seg = seg_lists[q][seg_idx[q, t]]
        while pieces and start <= pieces[-1][0] + OBJECTIVE_TOL:
            start = min(start, pieces[-1][0])
            pieces.pop()
        if pieces and pieces[-1][2] is seg:
            return
        pieces.append((start, q, seg))

    if nq > 1 and nt > 1:
        # Quick test per internal interval: a strictly unique winner at
        # both ends never gets undercut inside (affine differences positive
        # at both ends stay positive), so the interval is a single piece.
        z_at_end = cs[:, :-1] + ss[:, :-1] * starts_arr[1:]
        part_a = np.partition(z_at_start, 1, axis=0)
        part_b = np.partition(z_at_end, 1, axis=0)
        win_a = z_at_start.argmin(axis=0)
        win_b = z_at_end.argmin(axis=0)
        single = (
            (win_a[:-1] == win_b)
            & (part_a[1, :-1] > part_a[0, :-1])
            & (part_b[1] > part_b[0])
        )
    else:
        single = np.zeros(max(nt - 1, 0), dtype=bool)

    for t in range(nt):
        a = float(starts_arr[t])
        b = float(starts_arr[t + 1]) if t + 1 < nt else math.inf

        if nq == 1:
            emit(a, 0, t)
            continue
        if t + 1 < nt and single[t]:
            emit(a, int(win_a[t]), t)
            continue

        za = z_at_start[:, t]
        st = ss[:, t]
        if t + 1 == nt:
            # Terminal interval: a strictly unique minimum with weakly
            # minimal slope can never be overtaken on [a, inf).
            wa = int(za.argmin())
            if st[wa] <= st.min() and int((za == za[wa]).sum()) == 1:
                emit(a, wa, t)
                continue
        slope_gap = st[None, :] - st[:, None]
        value_gap = za[:, None] - za[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = value_gap / slope_gap
        beta_lo = np.where(slope_gap > 0.0, cross, -np.inf).max(axis=1)
        beta_hi = np.where(slope_gap < 0.0, cross, np.inf).min(axis=1)
        # An equal-slope line strictly below makes the candidate redundant.
        viable = ~((slope_gap == 0.0) & (value_gap > 0.0)).any(axis=1)
        from_left = viable & (beta_lo <= 0.0) & (beta_hi > 0.0)
        inside = (
            viable & (beta_lo > 0.0) & (beta_lo < beta_hi) & (a + beta_lo <= b)
        )
        lam_q = np.where(from_left, a, a + beta_lo)
        interval_emissions = [
            (float(lam_q[q]), int(q)) for q in np.flatnonzero(from_left | inside)
        ]
        interval_emissions.sort(key=lambda e: e[0])
        if not interval_emissions or interval_emissions[0][0] > a + OBJECTIVE_TOL:
            # Numerical corner: fall back to the plain minimum at the left
            # edge. Tests assert this never fires on exercised data.
            diagnostics["envelope_fallbacks"] += 1
            interval_emissions.insert(0, (a, int(za.argmin())))

        kept: list[tuple[float, int]] = []
        for lam, q in interval_emissions:
            if kept and lam <= kept[-1][0] + OBJECTIVE_TOL:
                continue
            kept.append((lam, q))
        if len(kept) > 2:
            multi.append((a, b, len(kept) - 1))
        for lam, q in kept:
            emit(lam, q, t)

    if multi:
        diagnostics["multi_crossing"] = multi

    intervals: list[PenaltyInterval] = []
    slope_violations = 0
    for t, (start, q, seg) in enumerate(pieces):
        hi = pieces[t + 1][0] if t + 1 < len(pieces) else math.inf
        intervals.append(
            PenaltyInterval(
                lo=start,
                hi=hi,
                v_star=seg.v,
                preserved=paths[q].preserved,
                error_intercept=seg.error_intercept,
                l1_slope=seg.l1_slope,
            )
        )
        if t and seg.l1_slope > intervals[t - 1].l1_slope:
            slope_violations += 1
    if slope_violations:
        diagnostics["slope_violations"] = slope_violations

    return SolutionPath(
        intervals=tuple(intervals), diagnostics=diagnostics, data=data
    )


def build_path(data: DataMatrix, threads: int = 1) -> SolutionPath:
    """Complete solution path over all penalties.

    threads > 1 computes the per-preserved-coordinate sweeps in a thread
    pool; the result is identical to the sequential one.
    """
    usable = data.usable_columns()
    if not usable:
        return _zero_path(data)
    pairs = pair_table(data)
    if pairs is not None:
        return merge_path(data, _sweep_batched(pairs))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            paths = list(
                pool.map(lambda j: breakpoints_for_preserved(data, j), usable)
            )
    else:
        paths = [breakpoints_for_preserved(data, j) for j in usable]
    return merge_path(data, paths)


def query_path(path: SolutionPath, lam: float) -> LineFit:
    """Minimizer at one penalty, read off the path.

    Intervals are right-closed: a query exactly at a breakpoint returns the
    interval ending there. A query at 0 returns the first interval's
    solution (the limit from the right; at exactly 0 other minimizers can
    tie, with the same objective).
    """
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ContractError(f"penalty must be finite and nonnegative, got {lam}")
    his = [iv.hi for iv in path.intervals]
    idx = bisect_left(his, lam)
    if idx == len(his):
        idx -= 1
    iv = path.intervals[idx]
    alpha = None
    if path.data is not None and iv.preserved is not None:
        alpha = path.data.column(iv.preserved).copy()
    elif path.data is not None:
        alpha = np.zeros(path.data.n)
    return LineFit(
        v=iv.v_star,
        preserved=iv.preserved,
        alpha=alpha,
        z=iv.objective_at(lam),
    )

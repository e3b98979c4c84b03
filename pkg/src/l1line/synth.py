"""Synthetic line-plus-noise data and the robustness simulation harness.

Points are drawn along a random unit direction with heavy-tailed
(Laplace) coordinate noise; optional contamination replaces a chosen
number of coordinates in a chosen number of points with large uniform
outliers. Model draw and contamination use independent child streams of
the seed, so turning contamination off never changes the clean points.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baseline import l2_best_fit_line
from .core import (
    ZERO_TOL,
    ContractError,
    DataMatrix,
    LineFit,
    SolutionPath,
    discordance,
    l0_count,
)
from .kernels import column_errors, positive_knots, preserved_table, solve_columns

__all__ = [
    "SimConfig",
    "LambdaSummary",
    "SimRow",
    "SimulationReport",
    "generate",
    "lambda_summaries",
    "union_lambda_summaries",
    "run_simulation",
]


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one synthetic draw.

    nc points have mc of their coordinates replaced by outliers drawn
    uniformly in +-[outlier_scale/2, outlier_scale]; outlier_scale defaults
    to 50x the noise scale.
    """

    n: int
    m: int
    nc: int = 0
    mc: int = 0
    noise_scale: float = 1.0
    outlier_scale: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("need n >= 1 points")
        if self.m < 2:
            raise ContractError("need m >= 2 coordinates")
        if not 0 <= self.nc <= self.n:
            raise ContractError(f"nc must be in [0, n], got {self.nc}")
        if not 0 <= self.mc <= self.m:
            raise ContractError(f"mc must be in [0, m], got {self.mc}")
        if not self.noise_scale > 0:
            raise ContractError("noise_scale must be positive")
        if self.outlier_scale is None:
            object.__setattr__(self, "outlier_scale", 50.0 * self.noise_scale)
        if not self.outlier_scale > 0:
            raise ContractError("outlier_scale must be positive")


def generate(config: SimConfig) -> tuple[DataMatrix, np.ndarray]:
    """Draw one data set; returns (data, true direction)."""
    root = np.random.SeedSequence(config.seed)
    model_ss, contam_ss = root.spawn(2)
    rng = np.random.default_rng(model_ss)

    while True:
        g = rng.normal(size=config.m)
        norm = float(np.linalg.norm(g))
        if norm > 1e-12:
            break
    v_true = g / norm

    alpha = 10.0 * rng.normal(size=config.n)
    noise = rng.laplace(0.0, config.noise_scale, size=(config.n, config.m))
    x = np.outer(alpha, v_true) + noise

    if config.nc > 0 and config.mc > 0:
        crng = np.random.default_rng(contam_ss)
        points = crng.choice(config.n, size=config.nc, replace=False)
        for i in points:
            coords = crng.choice(config.m, size=config.mc, replace=False)
            mags = crng.uniform(
                config.outlier_scale / 2.0, config.outlier_scale, size=config.mc
            )
            signs = 2.0 * crng.integers(0, 2, size=config.mc) - 1.0
            x[i, coords] = signs * mags

    return DataMatrix(x), v_true


@dataclass(frozen=True)
class LambdaSummary:
    """Smallest / mean / largest penalty breakpoint of a sweep.

    degenerate is True when there are no breakpoints at all (then all three
    values are 0).
    """

    lambda_min: float
    lambda_avg: float
    lambda_max: float
    degenerate: bool = False


def lambda_summaries(path: SolutionPath) -> LambdaSummary:
    """Summary of the merged path's interior breakpoints."""
    interior = [iv.hi for iv in path.intervals[:-1] if iv.hi > 0.0]
    if not interior:
        return LambdaSummary(0.0, 0.0, 0.0, True)
    return LambdaSummary(
        float(min(interior)),
        float(sum(interior) / len(interior)),
        float(max(interior)),
        False,
    )


def union_lambda_summaries(data: DataMatrix) -> LambdaSummary:
    """Summary over every per-coordinate-pair change point of the data.

    Works from the candidate spans directly (multiset; duplicates kept), so
    it scales to sizes where building the merged path is not feasible.
    """
    count = 0
    total = 0.0
    lo = math.inf
    hi = 0.0
    for j in data.usable_columns():
        ks = positive_knots(preserved_table(data, j))
        if ks.size == 0:
            continue
        count += ks.size
        total += float(ks.sum())
        lo = min(lo, float(ks.min()))
        hi = max(hi, float(ks.max()))
    if count == 0:
        return LambdaSummary(0.0, 0.0, 0.0, True)
    return LambdaSummary(lo, total / count, hi, False)


@dataclass(frozen=True)
class SimRow:
    label: str
    l0_mean: float
    l0_sd: float
    discordance_mean: float
    discordance_sd: float


@dataclass(frozen=True)
class SimulationReport:
    config: SimConfig
    reps: int
    rows: tuple[SimRow, ...]
    lambda_stats: dict


def _fits_at(data: DataMatrix, lams: list[float]) -> list[LineFit]:
    """fit_line at several penalties with one table build per column."""
    usable = data.usable_columns()
    if not usable:
        raise ContractError("data has no usable columns")
    best: list[LineFit | None] = [None] * len(lams)
    for j in usable:
        table = preserved_table(data, j)
        for t, lam in enumerate(lams):
            values, found, pos = solve_columns(table, lam)
            errs = column_errors(table, values, found, pos)
            v = values.copy()
            v[j] = 1.0
            error = float(errs.sum() - errs[j])
            weight = 1.0 + float(np.abs(values).sum() - abs(values[j]))
            z = error + lam * weight
            cur = best[t]
            if cur is None or z < cur.z:
                best[t] = LineFit(
                    v=v, preserved=j, alpha=data.column(j).copy(), z=z
                )
    return best  # type: ignore[return-value]


def _one_rep(config: SimConfig, rep: int, zero_tol: float) -> dict:
    cfg = dataclasses.replace(config, seed=config.seed + rep)
    data, v_true = generate(cfg)

    out: dict = {}
    v2 = l2_best_fit_line(data)
    out["l2"] = (l0_count(v2, zero_tol), discordance(v2, v_true))

    summary = union_lambda_summaries(data)
    out["lam"] = summary

    lam_min = summary.lambda_min
    lam_avg = summary.lambda_avg
    fits = _fits_at(data, [0.0, lam_min, lam_avg])
    for label, fit in zip(("lambda=0", "lambda=min", "lambda=avg"), fits):
        out[label] = (l0_count(fit.v, zero_tol), discordance(fit.v, v_true))

    # Beyond the largest breakpoint every path ends in the one-coordinate
    # line on the heaviest column; report that terminal solution rather
    # than the knife edge at exactly the largest breakpoint.
    masses = np.abs(data.x).sum(axis=0)
    anchor = int(masses.argmax())
    terminal = np.zeros(data.m)
    terminal[anchor] = 1.0
    out["lambda=max"] = (1, discordance(terminal, v_true))
    return out


def run_simulation(
    config: SimConfig, reps: int, threads: int = 1, zero_tol: float = ZERO_TOL
) -> SimulationReport:
    """Fit quality across replications, for the L2 baseline and for the
    penalized fit at penalty 0 and at the smallest / mean / largest
    breakpoint of each replication's sweep.

    Replication r redraws with seed config.seed + r. Row statistics are
    means and sample standard deviations across replications.
    """
    if reps < 1:
        raise ContractError("need at least one replication")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda r: _one_rep(config, r, zero_tol), range(reps))
            )
    else:
        results = [_one_rep(config, r, zero_tol) for r in range(reps)]

    def stats(values) -> tuple[float, float]:
        arr = np.asarray(values, dtype=float)
        sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return float(arr.mean()), sd

    rows = []
    for label in ("l2", "lambda=0", "lambda=min", "lambda=avg", "lambda=max"):
        l0_mean, l0_sd = stats([r[label][0] for r in results])
        d_mean, d_sd = stats([r[label][1] for r in results])
        name = "l2-baseline" if label == "l2" else label
        rows.append(SimRow(name, l0_mean, l0_sd, d_mean, d_sd))

    lam_stats = {}
    for field_name in ("lambda_min", "lambda_avg", "lambda_max"):
        mean, sd = stats([getattr(r["lam"], field_name) for r in results])
        lam_stats[field_name] = {"mean": mean, "sd": sd}
    lam_stats["degenerate_reps"] = sum(1 for r in results if r["lam"].degenerate)

    return SimulationReport(
        config=config, reps=reps, rows=tuple(rows), lambda_stats=lam_stats
    )

"""Shared types for L1-norm line fitting through the origin.

A fitted line is described by a direction vector v with one coordinate
pinned to 1 (the "preserved" coordinate); each data point's position along
the line is then forced to be its own preserved-coordinate value, which is
what makes the objective separable and exactly solvable.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ContractError",
    "DegenerateColumnError",
    "CertificateError",
    "OBJECTIVE_TOL",
    "CONDITION_TOL",
    "ZERO_TOL",
    "DataMatrix",
    "LineFit",
    "PenaltyInterval",
    "SolutionPath",
    "evaluate_objective",
    "reconstruct",
    "discordance",
    "l0_count",
]

# Absolute tolerance for comparing objective values (breakpoint dedup uses it too).
OBJECTIVE_TOL = 1e-9
# Closed-side slack for the weighted-median optimality test.
CONDITION_TOL = 1e-12
# Default threshold below which a coefficient counts as zero.
ZERO_TOL = 1e-12


class ContractError(ValueError):
    """An input violates a documented precondition."""


class DegenerateColumnError(ContractError):
    """The requested preserved coordinate is zero for every point."""


class CertificateError(Exception):
    """An optimality certificate could not be built or failed its checks."""


class DataMatrix:
    """Immutable n-by-m matrix of points, one row per point.

    Requires n >= 1 points, m >= 2 coordinates, all entries finite. The
    underlying array is copied and frozen; per-preserved-coordinate sorted
    tables are cached on the instance (small LRU, see kernels module).
    """

    __slots__ = ("x", "_tables", "_usable", "_pairs")

    def __init__(self, values) -> None:
        x = np.array(values, dtype=float)
        if x.ndim != 2:
            raise ContractError(f"expected a 2-d array of points, got ndim={x.ndim}")
        n, m = x.shape
        if n < 1:
            raise ContractError("need at least one point")
        if m < 2:
            raise ContractError(f"need at least two coordinates, got m={m}")
        if not np.isfinite(x).all():
            raise ContractError("matrix entries must be finite")
        x.setflags(write=False)
        self.x = x
        self._tables: OrderedDict = OrderedDict()
        self._usable: list[int] | None = None
        self._pairs = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.x.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.x[:, j]

    def usable_columns(self) -> list[int]:
        """Indices of columns with at least one nonzero entry.

        Only these can serve as the preserved coordinate.
        """
        if self._usable is None:
            nz = (self.x != 0.0).any(axis=0)
            self._usable = [j for j in range(self.m) if nz[j]]
        return self._usable

    def __repr__(self) -> str:  # pragma: no cover
        return f"DataMatrix(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class LineFit:
    """A fitted line at one penalty value.

    v has v[preserved] == 1 unless the fit is the all-zero line (then
    preserved is None and v is the zero vector). alpha[i] is point i's
    position along the line and always equals the preserved column
    (alpha is None only for fits reconstructed from a serialized path,
    where the data is no longer at hand). z is the attained objective.
    """

    v: np.ndarray
    preserved: int | None
    alpha: np.ndarray | None
    z: float

    @property
    def is_zero(self) -> bool:
        return self.preserved is None


@dataclass(frozen=True, eq=False)
class PenaltyInterval:
    """One piece of a solution path: on (lo, hi] the minimizer is v_star.

    hi is math.inf for the final piece. The attained objective is affine
    in the penalty: z*(lam) = error_intercept + lam * l1_slope.
    """

    lo: float
    hi: float
    v_star: np.ndarray
    preserved: int | None
    error_intercept: float
    l1_slope: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ContractError(f"empty penalty interval [{self.lo}, {self.hi}]")

    def objective_at(self, lam: float) -> float:
        return self.error_intercept + lam * self.l1_slope

    def contains(self, lam: float) -> bool:
        # Intervals are right-closed; the first one also owns lam == 0.
        if self.lo == 0.0 and lam == 0.0:
            return True
        return self.lo < lam <= self.hi


@dataclass(frozen=True, eq=False)
class SolutionPath:
    """Piecewise-constant minimizers over the whole penalty range [0, inf).

    Intervals are contiguous, the last one unbounded. diagnostics carries
    merge metadata, e.g. intervals where more than one winner change was
    found ("multi_crossing").
    """

    intervals: tuple[PenaltyInterval, ...]
    diagnostics: dict = field(default_factory=dict)
    data: DataMatrix | None = None

    def __post_init__(self):
        if not self.intervals:
            raise ContractError("a solution path needs at least one interval")
        if self.intervals[0].lo != 0.0:
            raise ContractError("path must start at penalty 0")
        if not math.isinf(self.intervals[-1].hi):
            raise ContractError("path must end with an unbounded interval")
        for a, b in zip(self.intervals, self.intervals[1:]):
            if a.hi != b.lo:
                raise ContractError(
                    f"path intervals not contiguous at {a.hi} vs {b.lo}"
                )

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior penalty values where the minimizer changes."""
        return tuple(iv.hi for iv in self.intervals[:-1])


def _as_vector(v, m: int | None = None, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be 1-d, got ndim={arr.ndim}")
    if m is not None and arr.shape[0] != m:
        raise ContractError(f"{name} has length {arr.shape[0]}, expected {m}")
    if not np.isfinite(arr).all():
        raise ContractError(f"{name} must be finite")
    return arr


def evaluate_objective(data: DataMatrix, v, alpha, lam: float) -> float:
    """Total L1 error of the rank-one model alpha_i * v plus lam * ||v||_1.

    The penalty covers every coefficient of v, the preserved one included.
    """
    if lam < 0:
        raise ContractError(f"penalty must be nonnegative, got {lam}")
    vv = _as_vector(v, data.m, "v")
    aa = _as_vector(alpha, data.n, "alpha")
    residual = data.x - np.outer(aa, vv)
    return float(np.abs(residual).sum() + lam * np.abs(vv).sum())


def reconstruct(data: DataMatrix, fit: LineFit) -> DataMatrix:
    """Rank-one approximation of the data implied by a fit."""
    if fit.alpha is None:
        raise ContractError("fit carries no per-point positions")
    vv = _as_vector(fit.v, data.m, "v")
    aa = _as_vector(fit.alpha, data.n, "alpha")
    return DataMatrix(np.outer(aa, vv))


def discordance(v, v_true) -> float:
    """1 - |cos angle| between two directions; 0 iff collinear.

    Invariant under sign flips and positive rescaling of either argument.
    """
    a = _as_vector(v, None, "v")
    b = _as_vector(v_true, len(a), "v_true")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ContractError("discordance is undefined for zero vectors")
    c = abs(float(np.dot(a, b)) / (na * nb))
    # FP can push |cos| a hair past 1.
    return max(0.0, 1.0 - min(c, 1.0))


def l0_count(v, tol: float = ZERO_TOL) -> int:
    """Number of coefficients with magnitude above tol."""
    if tol < 0:
        raise ContractError("tol must be nonnegative")
    arr = _as_vector(v, None, "v")
    return int(np.count_nonzero(np.abs(arr) > tol))

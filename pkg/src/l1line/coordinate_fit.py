"""Single-coordinate subproblems: solver, brute-force oracle, certificates.

With a preserved coordinate fixed, each remaining coordinate j is fit by
minimizing f(t) = sum_i w_i |r_i - t| + lam |t|, a penalized weighted
median. The fast solver scans sorted ratios for the first slot whose span
covers the penalty; the oracle evaluates f at every candidate; the dual
certificate proves optimality without reference to the scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CONDITION_TOL,
    OBJECTIVE_TOL,
    CertificateError,
    ContractError,
    DataMatrix,
)
from .kernels import preserved_table

__all__ = [
    "RatioList",
    "DualCertificate",
    "CertifyReport",
    "build_ratio_list",
    "solve_subproblem",
    "oracle_subproblem",
    "subproblem_value",
    "build_dual_certificate",
    "check_certificate",
    "certify_data",
]


@dataclass(frozen=True, eq=False)
class RatioList:
    """Sorted ratio data for one (preserved, target) coordinate pair.

    ratios/weights/point_ids are parallel arrays sorted by ratio ascending,
    ties by ascending point index. Points whose preserved coordinate is zero
    are absent; they add the constant excluded_mass to the target's error
    no matter what coefficient is chosen.
    """

    preserved: int
    target: int
    ratios: np.ndarray
    weights: np.ndarray
    point_ids: np.ndarray
    excluded_mass: float

    @property
    def entries(self) -> tuple[tuple[float, float, int], ...]:
        return tuple(
            (float(r), float(w), int(i))
            for r, w, i in zip(self.ratios, self.weights, self.point_ids)
        )

    def __len__(self) -> int:
        return self.ratios.shape[0]


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Dual feasible point proving a subproblem solution optimal.

    pi is aligned with the RatioList's sorted entries; gamma is the
    multiplier on the penalty term. Feasibility: |pi_i| <= w_i, |gamma| <=
    lam, sum(pi) + gamma = 0. Optimality: the dual objective
    sum_i r_i pi_i matches the attained primal value.
    """

    pi: np.ndarray
    gamma: float


@dataclass(frozen=True)
class CertifyReport:
    pairs: int
    ok: bool
    failures: tuple[str, ...]


def build_ratio_list(data: DataMatrix, preserved: int, target: int) -> RatioList:
    if target == preserved:
        raise ContractError("target and preserved coordinate must differ")
    if not 0 <= target < data.m:
        raise ContractError(f"no such column: {target}")
    table = preserved_table(data, preserved)
    ratios = table.ratios[:, target]
    weights = table.weights[:, target]
    point_ids = table.row_ids[:, target]
    if table.live is not None:
        keep = table.live[:, target]
        ratios = ratios[keep]
        weights = weights[keep]
        point_ids = point_ids[keep]
    return RatioList(
        preserved=preserved,
        target=target,
        ratios=ratios.copy(),
        weights=weights.copy(),
        point_ids=point_ids.copy(),
        excluded_mass=float(table.excluded_mass[target]),
    )


def _check_lam(lam: float) -> float:
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ContractError(f"penalty must be finite and nonnegative, got {lam}")
    return float(lam)


def solve_subproblem(ratio_list: RatioList, lam: float) -> tuple[float, int | None]:
    """First sorted slot whose optimality span covers lam, or 0.

    Returns (coefficient, chosen point index); chosen is None when no slot
    qualifies and the coefficient is driven to 0.
    """
    lam = _check_lam(lam)
    w = ratio_list.weights
    if w.shape[0] == 0:
        return 0.0, None
    r = ratio_list.ratios
    s = np.where(r >= 0.0, 1.0, -1.0)
    cw = np.cumsum(w)
    before = cw - w
    after = float(w.sum()) - cw
    cond = np.abs(s * lam + before - after) <= w + CONDITION_TOL
    if not cond.any():
        return 0.0, None
    k = int(cond.argmax())
    return float(r[k]), int(ratio_list.point_ids[k])


def subproblem_value(ratio_list: RatioList, t: float, lam: float) -> float:
    """f(t) = sum_i w_i |r_i - t| + lam |t| (excluded mass not included)."""
    lam = _check_lam(lam)
    if len(ratio_list) == 0:
        return lam * abs(t)
    return float(
        np.sum(ratio_list.weights * np.abs(ratio_list.ratios - t))
        + lam * abs(t)
    )


def oracle_subproblem(ratio_list: RatioList, lam: float) -> tuple[float, float]:
    """Brute-force minimum of f over {0} union {all ratios}.

    The minimum of a convex piecewise-linear function lies at a kink, and
    every kink of f is a ratio or 0, so this is exact. Ties go to the
    candidate with smaller |t|, then to the nonnegative one. Returns
    (coefficient, attained value).
    """
    lam = _check_lam(lam)
    if len(ratio_list) == 0:
        return 0.0, 0.0
    cands = np.concatenate([[0.0], ratio_list.ratios])
    # f at every candidate, one row per candidate.
    vals = (
        np.abs(ratio_list.ratios[None, :] - cands[:, None]) * ratio_list.weights
    ).sum(axis=1) + lam * np.abs(cands)
    best = float(vals.min())
    tied = np.flatnonzero(vals <= best + CONDITION_TOL)
    key = sorted(tied, key=lambda i: (abs(cands[i]), cands[i]))
    pick = key[0]
    return float(cands[pick]), float(vals[pick])


def build_dual_certificate(
    ratio_list: RatioList, lam: float, chosen: int | None
) -> DualCertificate:
    """Construct and validate the optimality certificate for a solve.

    chosen is the point index returned by solve_subproblem (None when the
    coefficient is 0 with no covering slot). Raises CertificateError when
    the certificate cannot be built or fails feasibility/duality — that is
    the signal that solver and inputs are inconsistent.
    """
    lam = _check_lam(lam)
    r = ratio_list.ratios
    w = ratio_list.weights
    p = r.shape[0]

    if chosen is None:
        # Coefficient 0: gradient at 0 must be coverable by the penalty.
        # Entries sitting exactly at 0 take no side themselves; they soak
        # up as much of the signed mass as their weights allow before the
        # penalty multiplier has to cover the rest.
        pi = np.sign(r) * w
        at_zero = r == 0.0
        spill = float(pi.sum())
        cap = float(w[at_zero].sum())
        if cap > 0.0 and spill != 0.0:
            absorb = min(max(-spill, -cap), cap)
            pi[at_zero] = absorb * (w[at_zero] / cap)
        gamma = -float(pi.sum())
        value = 0.0
    else:
        hits = np.flatnonzero(ratio_list.point_ids == chosen)
        if hits.shape[0] != 1:
            raise CertificateError(
                f"chosen point {chosen} does not identify one entry"
            )
        k = int(hits[0])
        gamma = -lam if r[k] >= 0.0 else lam
        pi = np.where(np.arange(p) < k, -w, w)
        pi[k] = -gamma - float(pi.sum() - pi[k])
        value = float(r[k])

    cert = DualCertificate(pi=pi, gamma=float(gamma))
    ok, problems = check_certificate(ratio_list, lam, cert, value)
    if not ok:
        raise CertificateError("; ".join(problems))
    return cert


def check_certificate(
    ratio_list: RatioList,
    lam: float,
    cert: DualCertificate,
    value: float,
    tol: float = OBJECTIVE_TOL,
) -> tuple[bool, list[str]]:
    """Validate feasibility and strong duality of a certificate.

    value is the primal coefficient being certified. Returns (ok, problems);
    problems lists every violated condition.
    """
    lam = _check_lam(lam)
    r = ratio_list.ratios
    w = ratio_list.weights
    pi = np.asarray(cert.pi, dtype=float)
    problems: list[str] = []
    if pi.shape != r.shape:
        return False, [f"pi has shape {pi.shape}, expected {r.shape}"]

    slack = np.abs(pi) - w
    if slack.size and float(slack.max()) > tol:
        k = int(slack.argmax())
        problems.append(
            f"|pi[{k}]| = {abs(pi[k])} exceeds weight {w[k]}"
        )
    if abs(cert.gamma) > lam + tol:
        problems.append(f"|gamma| = {abs(cert.gamma)} exceeds penalty {lam}")
    balance = float(pi.sum()) + cert.gamma
    if abs(balance) > tol:
        problems.append(f"pi and gamma do not balance: residual {balance}")

    dual = float(np.dot(r, pi)) if pi.size else 0.0
    primal = subproblem_value(ratio_list, value, lam)
    if abs(dual - primal) > tol:
        problems.append(
            f"duality gap: dual {dual} vs primal {primal} at t={value}"
        )
    return (not problems), problems


def certify_data(
    data: DataMatrix,
    lam: float,
    tol: float = OBJECTIVE_TOL,
    corrupt: bool = False,
) -> CertifyReport:
    """Build and validate certificates for every coordinate pair.

    Runs solve + certificate for all (preserved, target) pairs over usable
    preserved columns. corrupt=True tampers with the first certificate
    before validation (a self-test hook: a working checker must then report
    failure).
    """
    lam = _check_lam(lam)
    failures: list[str] = []
    pairs = 0
    corrupted_yet = False
    for anchor in data.usable_columns():
        for target in range(data.m):
            if target == anchor:
                continue
            pairs += 1
            rl = build_ratio_list(data, anchor, target)
            value, chosen = solve_subproblem(rl, lam)
            try:
                cert = build_dual_certificate(rl, lam, chosen)
            except CertificateError as exc:
                failures.append(
                    f"pair (preserved={anchor + 1}, target={target + 1}): {exc}"
                )
                continue
            if corrupt and not corrupted_yet and len(rl) > 0:
                corrupted_yet = True
                bad = cert.pi.copy()
                bad[0] += 2.0 * (float(rl.weights[0]) + 1.0)
                ok, problems = check_certificate(
                    rl, lam, DualCertificate(pi=bad, gamma=cert.gamma), value, tol
                )
                if not ok:
                    failures.append(
                        f"pair (preserved={anchor + 1}, target={target + 1}): "
                        f"corrupted certificate rejected (self-test): "
                        + "; ".join(problems)
                    )
                # A checker that accepts the tampered certificate leaves no
                # failure behind, so the self-test run exits clean — which is
                # exactly the red flag the negative control looks for.
    return CertifyReport(pairs=pairs, ok=not failures, failures=tuple(failures))

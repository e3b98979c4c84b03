"""JSON document shapes shared by the CLI and the HTTP service.

The path document is lossless: floats survive a JSON round trip bit for
bit (serialized via repr), and the unbounded end of the last interval is
written as the string "inf", never as a numeric stand-in. Column numbers
in documents are 1-based; the Python API is 0-based.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ContractError, DataMatrix, LineFit, PenaltyInterval, SolutionPath
from .coordinate_fit import CertifyReport
from .synth import SimulationReport

__all__ = [
    "SCHEMA_VERSION",
    "matrix_fingerprint",
    "path_document",
    "parse_path_document",
    "fit_document",
    "certify_document",
    "simulate_document",
]

SCHEMA_VERSION = 1


def matrix_fingerprint(data: DataMatrix) -> str:
    """Canonical content hash for matrices that did not come from a file."""
    import hashlib

    text = "\n".join(
        ",".join(format(v, ".17g") for v in row) for row in data.x
    )
    return hashlib.sha256(text.encode()).hexdigest()


def path_document(path: SolutionPath, fingerprint: str) -> dict:
    intervals = []
    for iv in path.intervals:
        intervals.append(
            {
                "lo": iv.lo,
                "hi": "inf" if math.isinf(iv.hi) else iv.hi,
                "preserved_column": None if iv.preserved is None else iv.preserved + 1,
                "v_star": [float(c) for c in iv.v_star],
                "error_intercept": iv.error_intercept,
                "l1_slope": iv.l1_slope,
            }
        )
    diagnostics = {}
    for key, value in path.diagnostics.items():
        if key == "multi_crossing":
            diagnostics[key] = [
                {"lo": lo, "hi": "inf" if math.isinf(hi) else hi, "crossings": c}
                for lo, hi, c in value
            ]
        else:
            diagnostics[key] = value
    return {
        "schema_version": SCHEMA_VERSION,
        "fingerprint": fingerprint,
        "intervals": intervals,
        "diagnostics": diagnostics,
    }


def parse_path_document(doc: dict) -> tuple[SolutionPath, str]:
    """Rebuild a path from its document. Raises ContractError on bad shape."""
    if not isinstance(doc, dict):
        raise ContractError("path document must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ContractError(
            f"unsupported schema_version {doc.get('schema_version')!r}"
        )
    fingerprint = doc.get("fingerprint")
    raw = doc.get("intervals")
    if not isinstance(raw, list) or not raw:
        raise ContractError("path document has no intervals")
    intervals = []
    for entry in raw:
        try:
            hi = entry["hi"]
            hi = math.inf if hi == "inf" else float(hi)
            preserved = entry["preserved_column"]
            preserved = None if preserved is None else int(preserved) - 1
            v = np.array([float(c) for c in entry["v_star"]])
            v.setflags(write=False)
            intervals.append(
                PenaltyInterval(
                    lo=float(entry["lo"]),
                    hi=hi,
                    v_star=v,
                    preserved=preserved,
                    error_intercept=float(entry["error_intercept"]),
                    l1_slope=float(entry["l1_slope"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"malformed interval in path document: {exc}")
    diagnostics = doc.get("diagnostics", {})
    if isinstance(diagnostics, dict) and "multi_crossing" in diagnostics:
        diagnostics = dict(diagnostics)
        diagnostics["multi_crossing"] = [
            (
                e["lo"],
                math.inf if e["hi"] == "inf" else e["hi"],
                e["crossings"],
            )
            for e in diagnostics["multi_crossing"]
        ]
    return (
        SolutionPath(intervals=tuple(intervals), diagnostics=diagnostics, data=None),
        fingerprint,
    )


def fit_document(fit: LineFit, lam: float, zero_tol: float) -> dict:
    from .core import l0_count

    return {
        "lambda": lam,
        "preserved_column": None if fit.preserved is None else fit.preserved + 1,
        "v": [float(c) for c in fit.v],
        "z": fit.z,
        "l0": l0_count(fit.v, zero_tol),
    }


def certify_document(report: CertifyReport, lam: float) -> dict:
    return {
        "lambda": lam,
        "pairs": report.pairs,
        "ok": report.ok,
        "failures": list(report.failures),
    }


def simulate_document(report: SimulationReport) -> dict:
    cfg = report.config
    return {
        "config": {
            "n": cfg.n,
            "m": cfg.m,
            "nc": cfg.nc,
            "mc": cfg.mc,
            "noise_scale": cfg.noise_scale,
            "outlier_scale": cfg.outlier_scale,
            "seed": cfg.seed,
        },
        "reps": report.reps,
        "rows": [
            {
                "label": row.label,
                "l0_mean": row.l0_mean,
                "l0_sd": row.l0_sd,
                "discordance_mean": row.discordance_mean,
                "discordance_sd": row.discordance_sd,
            }
            for row in report.rows
        ],
        "lambda_stats": report.lambda_stats,
    }

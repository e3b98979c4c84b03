"""Robust best-fit lines through the origin under the L1 norm.

Fits a direction v with one coordinate pinned to 1, scoring candidates by
the summed absolute reconstruction error plus a sparsity penalty on v.
Exact at a fixed penalty, exact as a full piecewise-constant penalty path,
with brute-force and dual-certificate verification built in.
"""

from .baseline import l2_best_fit_line
from .coordinate_fit import (
    CertifyReport,
    DualCertificate,
    RatioList,
    build_dual_certificate,
    build_ratio_list,
    certify_data,
    check_certificate,
    oracle_subproblem,
    solve_subproblem,
    subproblem_value,
)
from .core import (
    CertificateError,
    ContractError,
    DataMatrix,
    DegenerateColumnError,
    LineFit,
    PenaltyInterval,
    SolutionPath,
    discordance,
    evaluate_objective,
    l0_count,
    reconstruct,
)
from .fixed_lambda import fit_line, fit_line_preserving
from .path import (
    PathSegment,
    PerCoordinatePath,
    breakpoints_for_preserved,
    build_path,
    merge_path,
    query_path,
)
from .synth import (
    LambdaSummary,
    SimConfig,
    SimulationReport,
    generate,
    lambda_summaries,
    run_simulation,
    union_lambda_summaries,
)

__version__ = "0.1.0"

__all__ = [
    "CertificateError",
    "CertifyReport",
    "ContractError",
    "DataMatrix",
    "DegenerateColumnError",
    "DualCertificate",
    "LambdaSummary",
    "LineFit",
    "PathSegment",
    "PenaltyInterval",
    "PerCoordinatePath",
    "RatioList",
    "SimConfig",
    "SimulationReport",
    "SolutionPath",
    "breakpoints_for_preserved",
    "build_dual_certificate",
    "build_path",
    "build_ratio_list",
    "certify_data",
    "check_certificate",
    "discordance",
    "evaluate_objective",
    "fit_line",
    "fit_line_preserving",
    "generate",
    "l0_count",
    "l2_best_fit_line",
    "lambda_summaries",
    "merge_path",
    "oracle_subproblem",
    "query_path",
    "reconstruct",
    "run_simulation",
    "solve_subproblem",
    "subproblem_value",
    "union_lambda_summaries",
    "__version__",
]

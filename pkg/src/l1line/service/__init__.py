"""HTTP face of the fitting library.

Stateless: every request carries its own matrix or generator settings.
Domain precondition violations (bad matrix shape, bad penalty, bad
simulation sizes) surface as 422 responses with a detail string.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..core import ContractError, DataMatrix
from ..coordinate_fit import certify_data
from ..document import (
    certify_document,
    fit_document,
    matrix_fingerprint,
    path_document,
    simulate_document,
)
from ..fixed_lambda import fit_line
from ..path import breakpoints_for_preserved, merge_path
from ..synth import SimConfig, run_simulation
from .schemas import (
    CertifyRequest,
    CertifyResponse,
    FitRequest,
    FitResponse,
    HealthResponse,
    PathRequest,
    PathResponse,
    SimulateRequest,
    SimulateResponse,
)

__all__ = ["create_app"]


def _segment_payload(seg) -> dict:
    return {
        "lo": seg.lo,
        "hi": "inf" if math.isinf(seg.hi) else seg.hi,
        "v": [float(c) for c in seg.v],
        "error_intercept": seg.error_intercept,
        "l1_slope": seg.l1_slope,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="l1line", version="0.1.0")

    @app.exception_handler(ContractError)
    async def _contract_error(request: Request, exc: ContractError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/healthz", response_model=HealthResponse)
    async def healthz():
        return {"status": "ok"}

    @app.post("/fit", response_model=FitResponse)
    async def fit(req: FitRequest):
        data = DataMatrix(req.matrix)
        result = fit_line(data, req.penalty, threads=req.threads)
        return fit_document(result, req.penalty, req.zero_tol)

    @app.post("/path", response_model=PathResponse, response_model_exclude_none=True)
    async def path(req: PathRequest):
        data = DataMatrix(req.matrix)
        usable = data.usable_columns()
        per = [breakpoints_for_preserved(data, j) for j in usable]
        merged = merge_path(data, per)
        fingerprint = req.fingerprint or matrix_fingerprint(data)
        doc = path_document(merged, fingerprint)
        if req.per_coordinate:
            doc["per_coordinate"] = [
                {
                    "preserved_column": p.preserved + 1,
                    "breakpoints": list(p.breakpoints),
                    "knots": list(p.knots),
                    "segments": [_segment_payload(s) for s in p.segments],
                }
                for p in per
            ]
        return doc

    @app.post("/simulate", response_model=SimulateResponse)
    async def simulate(req: SimulateRequest):
        config = SimConfig(
            n=req.n,
            m=req.m,
            nc=req.nc,
            mc=req.mc,
            noise_scale=req.noise_scale,
            outlier_scale=req.outlier_scale,
            seed=req.seed,
        )
        report = run_simulation(
            config, req.reps, threads=req.threads, zero_tol=req.zero_tol
        )
        return simulate_document(report)

    @app.post("/certify", response_model=CertifyResponse)
    async def certify(req: CertifyRequest):
        data = DataMatrix(req.matrix)
        report = certify_data(data, req.penalty, corrupt=req.corrupt)
        return certify_document(report, req.penalty)

    return app

"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

__all__ = [
    "FitRequest",
    "FitResponse",
    "PathRequest",
    "SegmentModel",
    "PerCoordinateModel",
    "IntervalModel",
    "PathResponse",
    "SimulateRequest",
    "SimRowModel",
    "SimulateResponse",
    "CertifyRequest",
    "CertifyResponse",
    "HealthResponse",
]


class _Base(BaseModel):
    model_config = ConfigDict(populate_by_name=True)


class FitRequest(_Base):
    matrix: list[list[float]]
    penalty: float = Field(0.0, ge=0.0, alias="lambda")
    zero_tol: float = Field(1e-12, ge=0.0)
    threads: int = Field(1, ge=1, le=64)


class FitResponse(_Base):
    penalty: float = Field(alias="lambda")
    preserved_column: int | None
    v: list[float]
    z: float
    l0: int


class PathRequest(_Base):
    matrix: list[list[float]]
    fingerprint: str | None = None
    per_coordinate: bool = False
    threads: int = Field(1, ge=1, le=64)


class IntervalModel(_Base):
    lo: float
    hi: Literal["inf"] | float
    preserved_column: int | None
    v_star: list[float]
    error_intercept: float
    l1_slope: float


class SegmentModel(_Base):
    lo: float
    hi: Literal["inf"] | float
    v: list[float]
    error_intercept: float
    l1_slope: float


class PerCoordinateModel(_Base):
    preserved_column: int
    breakpoints: list[float]
    knots: list[float]
    segments: list[SegmentModel]


class PathResponse(_Base):
    schema_version: int
    fingerprint: str | None
    intervals: list[IntervalModel]
    diagnostics: dict
    per_coordinate: list[PerCoordinateModel] | None = None


class SimulateRequest(_Base):
    n: int = Field(ge=1)
    m: int = Field(ge=2)
    nc: int = Field(0, ge=0)
    mc: int = Field(0, ge=0)
    noise_scale: float = 1.0
    outlier_scale: float | None = None
    seed: int = 0
    reps: int = Field(1, ge=1)
    zero_tol: float = Field(1e-12, ge=0.0)
    threads: int = Field(1, ge=1, le=64)


class SimRowModel(_Base):
    label: str
    l0_mean: float
    l0_sd: float
    discordance_mean: float
    discordance_sd: float


class SimulateResponse(_Base):
    config: dict
    reps: int
    rows: list[SimRowModel]
    lambda_stats: dict


class CertifyRequest(_Base):
    matrix: list[list[float]]
    penalty: float = Field(0.0, ge=0.0, alias="lambda")
    corrupt: bool = False


class CertifyResponse(_Base):
    penalty: float = Field(alias="lambda")
    pairs: int
    ok: bool
    failures: list[str]


class HealthResponse(_Base):
    status: str

"""Request and response bodies for the HTTP service.

Requests reuse the declarative specs from sparseweights.config, so a JSON
document accepted by the CLI's --config is accepted verbatim as a request
body and vice versa.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..config import (
    DualWeightSpec,
    ExponentSpec,
    FamilySpec,
    FunctionSpec,
    InstanceWeightSpec,
    ReportRow,
    WeightSpec,
)
from ..dyadic import MAX_RESOLUTION


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ConstantsRequest(_Model):
    """Characteristic constants of a weight (and optional companions)."""

    resolution: int = Field(default=10, ge=0, le=MAX_RESOLUTION)
    weight: WeightSpec
    p: float | None = None
    sigmas: list[WeightSpec] = []
    exponents: ExponentSpec | None = None


class ConstantRow(_Model):
    constant: str
    value: float
    level: int
    index: int
    at_finest: bool


class ConstantsResponse(_Model):
    resolution: int
    rows: list[ConstantRow]


class EvalRequest(_Model):
    """Pointwise evaluation of a sparse or maximal operator."""

    resolution: int = Field(default=10, ge=0, le=MAX_RESOLUTION)
    operator: Literal["sparse", "maximal"] = "sparse"
    family: FamilySpec | None = None
    p0: float = 1.0
    gamma: float = 1.0
    functions: list[FunctionSpec]
    sigmas: list[WeightSpec] | None = None


class EvalResponse(_Model):
    resolution: int
    operator: str
    cells: list[float]


class DecomposeRequest(_Model):
    """Level-set buckets and principal forests for one instance."""

    resolution: int = Field(default=10, ge=0, le=MAX_RESOLUTION)
    family: FamilySpec
    exponents: ExponentSpec
    sigmas: list[WeightSpec]
    weight: InstanceWeightSpec = DualWeightSpec()
    functions: list[FunctionSpec]


class ForestSummary(_Model):
    slot: int
    size: int
    depth: int
    cubes_text: str
    carleson_ratio: float


class BucketSummary(_Model):
    a: int | None
    size: int
    psi_min: float
    psi_max: float
    cubes_text: str
    ls_ratio: float | None = None


class DecomposeResponse(_Model):
    resolution: int
    family_size: int
    window: tuple[int, int] | None
    buckets: list[BucketSummary]
    forests: list[ForestSummary]


class SelftestCheck(_Model):
    name: str
    passed: bool
    detail: str = ""


class SelftestResponse(_Model):
    checks: list[SelftestCheck]
    total: int
    failures: int
    all_pass: bool


class ExperimentResponse(_Model):
    rows: list[ReportRow]
    total: int
    failures: int
    all_pass: bool


class HealthResponse(_Model):
    status: str
    version: str

"""Declarative JSON-facing models and builders for the core objects.

Every experiment input (weights, test functions, sparse families, exponent
tuples, whole theorem instances) has a small pydantic model here, so that a
run is fully described by a JSON document: the same schema drives the CLI
config files and the HTTP service bodies, and a result row can be replayed
from its recorded parameters.
"""

from __future__ import annotations

import json
import re
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from . import weights as wmod
from .dyadic import MAX_RESOLUTION, Cube, StepFunction
from .sparse import BranchingParams, SparseFamily, random_sparse
from .weights import ExponentTuple


class ConfigError(ValueError):
    """Raised for malformed configuration input; maps to CLI exit code 2."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------------------------------------------------------------------
# weights, functions, families, exponents


class PowerWeightSpec(_Model):
    kind: Literal["power"] = "power"
    alpha: float

    @field_validator("alpha")
    @classmethod
    def _alpha_integrable(cls, v: float) -> float:
        if not v > -1.0:
            raise ValueError(f"power weight needs alpha > -1, got {v}")
        return v


class CellsWeightSpec(_Model):
    kind: Literal["cells"] = "cells"
    values: list[float]


class RandomWeightSpec(_Model):
    kind: Literal["random"] = "random"
    seed: int
    logrange: float = 2.0


WeightSpec = Annotated[
    Union[PowerWeightSpec, CellsWeightSpec, RandomWeightSpec],
    Field(discriminator="kind"),
]


class DualWeightSpec(_Model):
    """Marker: derive w from the sigmas through the dual-weight formulas."""

    kind: Literal["dual"] = "dual"


InstanceWeightSpec = Annotated[
    Union[PowerWeightSpec, CellsWeightSpec, RandomWeightSpec, DualWeightSpec],
    Field(discriminator="kind"),
]


class IndicatorFunctionSpec(_Model):
    kind: Literal["indicator"] = "indicator"
    k: int = Field(ge=0, le=MAX_RESOLUTION)
    normalized: bool = True


FunctionSpec = Annotated[
    Union[PowerWeightSpec, CellsWeightSpec, RandomWeightSpec, IndicatorFunctionSpec],
    Field(discriminator="kind"),
]


def build_weight(spec, resolution: int) -> StepFunction:
    if isinstance(spec, PowerWeightSpec):
        return wmod.power_weight(spec.alpha, resolution)
    if isinstance(spec, CellsWeightSpec):
        f = StepFunction.from_cells(spec.values)
        if f.resolution != resolution:
            raise ConfigError(
                f"cells spec has resolution {f.resolution}, expected {resolution}"
            )
        return f
    if isinstance(spec, RandomWeightSpec):
        return wmod.random_weight(spec.seed, resolution, spec.logrange)
    raise ConfigError(f"cannot build a weight from {type(spec).__name__}")


def build_function(spec, resolution: int) -> StepFunction:
    if isinstance(spec, IndicatorFunctionSpec):
        return wmod.indicator_function(spec.k, resolution, spec.normalized)
    return build_weight(spec, resolution)


def describe_spec(spec) -> str:
    """Compact single-token description used in report rows."""
    if isinstance(spec, PowerWeightSpec):
        return f"power:{spec.alpha:g}"
    if isinstance(spec, CellsWeightSpec):
        return f"cells:{len(spec.values)}"
    if isinstance(spec, RandomWeightSpec):
        return f"random:{spec.seed}"
    if isinstance(spec, DualWeightSpec):
        return "dual"
    if isinstance(spec, IndicatorFunctionSpec):
        return f"indicator:{spec.k}"
    return type(spec).__name__


class BranchingConfig(_Model):
    delta_min: int = 1
    delta_max: int = 3
    min_children: int = 0
    max_children: int | None = None
    max_cubes: int = 512

    def to_params(self) -> BranchingParams:
        return BranchingParams(
            self.delta_min,
            self.delta_max,
            self.min_children,
            self.max_children,
            self.max_cubes,
        )


class RandomFamilySpec(_Model):
    kind: Literal["random"] = "random"
    seed: int
    branching: BranchingConfig = BranchingConfig()


class ExplicitFamilySpec(_Model):
    kind: Literal["cubes"] = "cubes"
    cubes: list[tuple[int, int]]


FamilySpec = Annotated[
    Union[RandomFamilySpec, ExplicitFamilySpec], Field(discriminator="kind")
]


def build_family(spec, resolution: int) -> SparseFamily:
    if isinstance(spec, RandomFamilySpec):
        return random_sparse(spec.seed, resolution, spec.branching.to_params())
    if isinstance(spec, ExplicitFamilySpec):
        return SparseFamily(
            [Cube(level, index) for level, index in spec.cubes], resolution
        )
    raise ConfigError(f"cannot build a family from {type(spec).__name__}")


class ExponentSpec(_Model):
    ps: list[float]
    p0: float = 1.0
    gamma: float = 1.0

    def build(self) -> ExponentTuple:
        return ExponentTuple(tuple(self.ps), self.p0, self.gamma)


class InstanceSpec(_Model):
    """Complete description of one theorem instance; replayable by itself."""

    resolution: int = Field(default=10, ge=0, le=MAX_RESOLUTION)
    family: FamilySpec
    exponents: ExponentSpec
    sigmas: list[WeightSpec]
    weight: InstanceWeightSpec = DualWeightSpec()
    functions: list[FunctionSpec]


# ---------------------------------------------------------------------------
# samplers, searches, experiment suites


class SamplerConfig(_Model):
    """Parameter ranges for random theorem instances.

    Power-law weight exponents alpha are drawn from (-1 + alpha_eps,
    alpha_max]; alpha_eps is floored at 0.05 to keep the constants in a
    range where double precision is trustworthy.
    """

    m: int = Field(default=2, ge=1)
    p_choices: list[float] = [1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0]
    p0_choices: list[float] = [1.0, 1.25, 1.5, 2.0]
    gamma_choices: list[float] = [0.5, 0.75, 1.0, 1.5, 2.0, 3.0]
    alpha_eps: float = Field(default=0.05, ge=0.05)
    alpha_max: float = 3.0
    beta_min: float = -0.5
    beta_max: float = 3.0
    logrange: float = 2.0
    sigma_kinds: list[Literal["power", "random"]] = ["power", "random"]
    function_kinds: list[Literal["power", "indicator", "random"]] = [
        "power",
        "indicator",
        "random",
    ]
    w_modes: list[Literal["dual", "power", "random"]] = ["dual", "power"]
    family: BranchingConfig = BranchingConfig()
    family_seed_pool: int = Field(default=64, ge=1)

    @field_validator("alpha_max")
    @classmethod
    def _alpha_max_ok(cls, v: float) -> float:
        if not v > -1.0:
            raise ValueError("alpha_max must exceed -1")
        return v

    @field_validator("beta_min")
    @classmethod
    def _beta_min_ok(cls, v: float) -> float:
        if not v > -1.0:
            raise ValueError("beta_min must exceed -1 (grid integrability)")
        return v


REGIME_LABELS = ("p<=gamma", "p1-max", "p2-max", "qprime-max")


class SearchConfig(_Model):
    """Random-restart coordinate ascent over theorem instances."""

    resolution: int = Field(default=10, ge=1, le=MAX_RESOLUTION)
    restarts: int = Field(default=20, ge=1)
    steps: int = Field(default=30, ge=0)
    seed: int = 0
    target: Literal["theorem-ratio", "maximal-ratio"] = "theorem-ratio"
    sampler: SamplerConfig = SamplerConfig()
    regimes: list[str] | None = None
    max_sample_attempts: int = Field(default=200, ge=1)

    @field_validator("regimes")
    @classmethod
    def _regimes_known(cls, v):
        if v is not None:
            pattern = re.compile(r"p\d+-max$")
            bad = [r for r in v if r not in REGIME_LABELS and not pattern.match(r)]
            if bad:
                raise ValueError(f"unknown regime labels: {bad}")
            if not v:
                raise ValueError("regimes list must not be empty when given")
        return v


class RescaleSuite(_Model):
    check: Literal["rescale-identity"] = "rescale-identity"
    trials: int = Field(default=100, ge=1)
    resolution: int = 8
    m: int = Field(default=2, ge=1)
    p0_choices: list[float] = [1.5, 2.0, 3.0]
    gamma_choices: list[float] = [1.0, 2.0, 4.0]
    logrange: float = 2.0
    family: BranchingConfig = BranchingConfig()
    tolerance: float = 1e-9


class CarlesonSuite(_Model):
    check: Literal["carleson"] = "carleson"
    trials: int = Field(default=200, ge=1)
    resolutions: list[int] = [6, 7, 8, 9, 10]
    logrange: float = 2.0
    family: BranchingConfig = BranchingConfig()


class PrincipalCarlesonSuite(_Model):
    check: Literal["principal-carleson"] = "principal-carleson"
    trials: int = Field(default=200, ge=1)
    resolutions: list[int] = [5, 6, 7, 8, 9, 10]
    p_choices: list[float] = [1.5, 2.0, 4.0]
    logrange: float = 3.0
    family: BranchingConfig = BranchingConfig()


class TheoremSuite(_Model):
    check: Literal["theorem-ratio"] = "theorem-ratio"
    trials: int = Field(default=200, ge=1)
    resolution: int = 10
    sampler: SamplerConfig = SamplerConfig()
    regime_cycle: bool = True
    max_ratio: float | None = None


class MaximalSuite(_Model):
    check: Literal["maximal-ratio"] = "maximal-ratio"
    trials: int = Field(default=120, ge=1)
    resolution: int = 10
    sampler: SamplerConfig = SamplerConfig()
    max_ratio: float | None = None


class BucketSuite(_Model):
    check: Literal["bucket-reconstruction"] = "bucket-reconstruction"
    trials: int = Field(default=50, ge=1)
    resolution: int = 8
    sampler: SamplerConfig = SamplerConfig()
    tolerance: float = 1e-12


class LsSuite(_Model):
    check: Literal["ls-bound"] = "ls-bound"
    trials: int = Field(default=60, ge=1)
    resolution: int = 8
    sampler: SamplerConfig = SamplerConfig()
    max_ratio: float | None = None


SuiteConfig = Annotated[
    Union[
        RescaleSuite,
        CarlesonSuite,
        PrincipalCarlesonSuite,
        TheoremSuite,
        MaximalSuite,
        BucketSuite,
        LsSuite,
    ],
    Field(discriminator="check"),
]


class ExperimentConfig(_Model):
    """A batch of check suites sharing one master seed."""

    seed: int = 1
    threads: int | None = None
    suites: list[SuiteConfig]


class ReportRow(_Model):
    """One check evaluation: measured value, bound, and verdict.

    lhs is always the measured quantity, rhs the bound it is compared to
    and ratio their quotient, so `ratio <= 1` means the check in its
    strictest form; `passed` applies the suite's own threshold.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    trial: int
    check: str
    resolution: int
    m: int | None = None
    p0: float | None = None
    gamma: float | None = None
    p: float | None = None
    p_list: list[float] | None = None
    weight_params: str | None = None
    seed: int
    lhs: float
    rhs: float
    ratio: float
    w_ainf: float | None = None
    sigma_ainf: list[float] | None = None
    avecp: float | None = None
    regime: str | None = None
    passed: bool = Field(serialization_alias="pass", validation_alias="pass")


class InstanceEvaluation(_Model):
    """One ratio measurement with every constant that entered the bound.

    lhs is the operator-side norm, rhs the constant part of the bound,
    bound = rhs * prod(norms), and ratio = lhs / bound.
    """

    target: Literal["theorem-ratio", "maximal-ratio"]
    lhs: float
    rhs: float
    norms: list[float]
    bound: float
    ratio: float
    regime: str | None = None
    avecp: float
    w_ainf: float | None = None
    sigma_ainf: list[float]


class RegimeBest(_Model):
    ratio: float
    evaluation: InstanceEvaluation
    instance: InstanceSpec


class RestartTrace(_Model):
    restart: int
    regime: str | None
    init_ratio: float
    best_ratio: float
    accepted: int


class SearchResult(_Model):
    target: str
    seed: int
    restarts: int
    steps: int
    best: RegimeBest
    by_regime: dict[str, RegimeBest]
    trace: list[RestartTrace]


REPORT_COLUMNS = [
    "trial",
    "check",
    "resolution",
    "m",
    "p0",
    "gamma",
    "p",
    "p_list",
    "weight_params",
    "seed",
    "lhs",
    "rhs",
    "ratio",
    "w_ainf",
    "sigma_ainf",
    "avecp",
    "regime",
    "pass",
]


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def parse_config(model: type[BaseModel], payload) -> BaseModel:
    try:
        return model.model_validate(payload)
    except Exception as exc:
        raise ConfigError(f"invalid {model.__name__}: {exc}") from exc

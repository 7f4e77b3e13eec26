"""HTTP service exposing the laboratory.

One endpoint per CLI subcommand; request and response bodies are the
pydantic models from schemas.py and sparseweights.config.  The CLI talks to
this app in-process by default, so the service is the single implementation
of every command.  Run it standalone with

    uvicorn sparseweights.service.app:app
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import (
    ConfigError,
    DualWeightSpec,
    ExperimentConfig,
    SearchConfig,
    SearchResult,
    build_family,
    build_function,
    build_weight,
)
from ..dyadic import StepFunction
from ..operators import SparseOperatorSpec, multi_maximal, sparse_op
from ..selftest import run_selftest
from ..stopping import (
    carleson_embedding_check,
    level_sets,
    ls_bound_check,
    principal_cubes,
)
from ..verify import extremizer_search, run_experiment
from ..weights import (
    a_infty_detail,
    a_p_detail,
    a_vec_p_detail,
    dual_weights,
    two_weight_a_p_detail,
)
from . import schemas as sm


def compute_constants(req: sm.ConstantsRequest) -> sm.ConstantsResponse:
    resolution = req.resolution
    w = build_weight(req.weight, resolution)
    sigmas = [build_weight(s, resolution) for s in req.sigmas]
    rows: list[sm.ConstantRow] = []

    def add(name: str, detail) -> None:
        rows.append(
            sm.ConstantRow(
                constant=name,
                value=detail.value,
                level=detail.cube.level,
                index=detail.cube.index,
                at_finest=detail.attained_at_finest_level(resolution),
            )
        )

    add("a_infty:w", a_infty_detail(w))
    if req.p is not None:
        add(f"a_p:w:p={req.p:g}", a_p_detail(w, req.p))
    for i, s in enumerate(sigmas, start=1):
        add(f"a_infty:sigma{i}", a_infty_detail(s))
        if req.p is not None:
            add(
                f"two_weight_a_p:sigma{i}:p={req.p:g}",
                two_weight_a_p_detail(w, s, req.p),
            )
    if req.exponents is not None:
        exps = req.exponents.build()
        if len(sigmas) != exps.m:
            raise ConfigError(
                f"a_vec_p needs {exps.m} sigmas, got {len(sigmas)}"
            )
        add("a_vec_p", a_vec_p_detail(w, sigmas, exps))
    return sm.ConstantsResponse(resolution=resolution, rows=rows)


def compute_eval(req: sm.EvalRequest) -> sm.EvalResponse:
    resolution = req.resolution
    fs = [build_function(f, resolution) for f in req.functions]
    if not fs:
        raise ConfigError("eval needs at least one function")
    if req.operator == "sparse":
        if req.family is None:
            raise ConfigError("sparse evaluation needs a family")
        family = build_family(req.family, resolution)
        spec = SparseOperatorSpec(family, req.p0, req.gamma, len(fs))
        out = sparse_op(spec, fs)
    else:
        if req.sigmas is None:
            sigmas = [StepFunction.constant(1.0, resolution) for _ in fs]
        else:
            sigmas = [build_weight(s, resolution) for s in req.sigmas]
        out = multi_maximal(fs, sigmas)
    return sm.EvalResponse(
        resolution=resolution, operator=req.operator, cells=[float(v) for v in out.cells]
    )


def compute_decompose(req: sm.DecomposeRequest) -> sm.DecomposeResponse:
    resolution = req.resolution
    exps = req.exponents.build()
    if len(req.sigmas) != exps.m or len(req.functions) != exps.m:
        raise ConfigError(f"decompose needs {exps.m} sigmas and functions")
    family = build_family(req.family, resolution)
    sigmas = [build_weight(s, resolution) for s in req.sigmas]
    if isinstance(req.weight, DualWeightSpec):
        _, w = dual_weights(sigmas, exps)
    else:
        w = build_weight(req.weight, resolution)
    fs = [build_function(f, resolution) for f in req.functions]

    deco = level_sets(family, w, sigmas, exps)
    forests = [
        principal_cubes(family, f, s) for f, s in zip(fs, sigmas)
    ]
    forest_rows = []
    for i, (forest, f, s, pi) in enumerate(zip(forests, fs, sigmas, exps.ps), start=1):
        forest_rows.append(
            sm.ForestSummary(
                slot=i,
                size=len(forest),
                depth=forest.depth(),
                cubes_text=forest.to_text(),
                carleson_ratio=carleson_embedding_check(forest, f, s, pi),
            )
        )
    buckets = []
    for a, cubes in deco.all_bucket_cubes():
        values = [deco.psi[q] for q in cubes]
        ls_ratio = None
        if a is not None and exps.m == 2:
            worst = ls_bound_check(
                cubes, forests[0], forests[1], w, sigmas, exps, a
            )
            ls_ratio = worst.ratio if worst is not None else None
        buckets.append(
            sm.BucketSummary(
                a=a,
                size=len(cubes),
                psi_min=min(values),
                psi_max=max(values),
                cubes_text="".join(f"{q.level} {q.index}\n" for q in cubes),
                ls_ratio=ls_ratio,
            )
        )
    return sm.DecomposeResponse(
        resolution=resolution,
        family_size=len(family),
        window=deco.window(),
        buckets=buckets,
        forests=forest_rows,
    )


def compute_experiment(config: ExperimentConfig) -> sm.ExperimentResponse:
    rows = run_experiment(config)
    failures = sum(1 for r in rows if not r.passed)
    return sm.ExperimentResponse(
        rows=rows, total=len(rows), failures=failures, all_pass=failures == 0
    )


def compute_selftest() -> sm.SelftestResponse:
    outcomes = run_selftest()
    checks = [
        sm.SelftestCheck(name=o.name, passed=o.passed, detail=o.detail)
        for o in outcomes
    ]
    failures = sum(1 for c in checks if not c.passed)
    return sm.SelftestResponse(
        checks=checks,
        total=len(checks),
        failures=failures,
        all_pass=failures == 0,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="sparseweights",
        version=__version__,
        description=(
            "Numerical laboratory for multilinear sparse operators and "
            "Muckenhoupt-type weight constants on the dyadic grid."
        ),
    )

    @app.exception_handler(ValueError)
    async def _value_error(_: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=sm.HealthResponse)
    def health() -> sm.HealthResponse:
        return sm.HealthResponse(status="ok", version=__version__)

    @app.post("/constants", response_model=sm.ConstantsResponse)
    def constants(req: sm.ConstantsRequest) -> sm.ConstantsResponse:
        return compute_constants(req)

    @app.post("/eval", response_model=sm.EvalResponse)
    def evaluate(req: sm.EvalRequest) -> sm.EvalResponse:
        return compute_eval(req)

    @app.post("/decompose", response_model=sm.DecomposeResponse)
    def decompose(req: sm.DecomposeRequest) -> sm.DecomposeResponse:
        return compute_decompose(req)

    @app.post("/check-theorem", response_model=sm.ExperimentResponse)
    def check_theorem(config: ExperimentConfig) -> sm.ExperimentResponse:
        return compute_experiment(config)

    @app.post("/search", response_model=SearchResult)
    def search(config: SearchConfig) -> SearchResult:
        return extremizer_search(config)

    @app.post("/selftest", response_model=sm.SelftestResponse)
    def selftest() -> sm.SelftestResponse:
        return compute_selftest()

    return app


app = create_app()

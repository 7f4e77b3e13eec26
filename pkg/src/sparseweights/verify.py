"""Norm-inequality checks, randomized experiment suites, extremizer search.

The headline check measures, for a concrete sparse operator and weight
tuple, the ratio

    ||T(f_vec)||_{L^p(w)}
    ------------------------------------------------------------------
    [w, sigma_vec]^(1/p) ( prod_i [sigma_i]^(1/p_i)
        + [w]^(1/gamma - 1/p)_+ sum_j prod_{i != j} [sigma_i]^(1/p_i) )
    * prod_i ||f_i||_{L^{p_i}(w_i)}

whose boundedness uniformly over instances is the claim under test.  The
proofs leave the uniform constant unspecified, so pass thresholds are
regression ceilings measured by a committed pilot extremizer search (see
calibration.py); everything else in this module (identities, Carleson sums,
bucket reconstructions) is checked against explicit constants.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import calibration
from .config import (
    BucketSuite,
    CarlesonSuite,
    ConfigError,
    DualWeightSpec,
    ExperimentConfig,
    ExponentSpec,
    IndicatorFunctionSpec,
    InstanceEvaluation,
    InstanceSpec,
    LsSuite,
    MaximalSuite,
    PowerWeightSpec,
    PrincipalCarlesonSuite,
    RandomFamilySpec,
    RandomWeightSpec,
    RegimeBest,
    ReportRow,
    RescaleSuite,
    RestartTrace,
    SamplerConfig,
    SearchConfig,
    SearchResult,
    TheoremSuite,
    build_family,
    build_function,
    build_weight,
    describe_spec,
)
from .dyadic import StepFunction, integral, lp_norm
from .operators import (
    SparseOperatorSpec,
    multi_maximal,
    rescale_identity_check,
    sparse_op,
    sparse_op_power,
)
from .sparse import SparseFamily, carleson_sum, random_sparse
from .stopping import (
    carleson_embedding_check,
    level_sets,
    ls_bound_check,
    principal_cubes,
)
from .weights import ExponentTuple, a_infty, a_vec_p, dual_weights, random_weight

#: Environment variable capping the worker pool for experiment suites.
THREADS_ENV = "SPARSE_WEIGHTS_THREADS"


@dataclass(frozen=True)
class TheoremInstance:
    """One fully built instance of the norm inequality."""

    family: SparseFamily
    functions: tuple[StepFunction, ...]
    sigmas: tuple[StepFunction, ...]
    weight: StepFunction
    exponents: ExponentTuple

    def __post_init__(self) -> None:
        m = self.exponents.m
        if len(self.functions) != m or len(self.sigmas) != m:
            raise ValueError(f"expected {m} functions and {m} weights")
        resolution = self.family.resolution
        for g in list(self.functions) + list(self.sigmas) + [self.weight]:
            if g.resolution != resolution:
                raise ValueError("instance pieces live at different resolutions")

    @property
    def operator_spec(self) -> SparseOperatorSpec:
        return SparseOperatorSpec.from_exponents(self.family, self.exponents)

    def dual(self) -> tuple[list[StepFunction], StepFunction]:
        """Dual weights (w_1..w_m) and the joint weight they induce."""
        return dual_weights(self.sigmas, self.exponents)


def instance_from_spec(spec: InstanceSpec) -> TheoremInstance:
    exps = spec.exponents.build()
    if len(spec.sigmas) != exps.m:
        raise ConfigError(f"instance needs {exps.m} sigmas, got {len(spec.sigmas)}")
    if len(spec.functions) != exps.m:
        raise ConfigError(
            f"instance needs {exps.m} functions, got {len(spec.functions)}"
        )
    family = build_family(spec.family, spec.resolution)
    sigmas = tuple(build_weight(s, spec.resolution) for s in spec.sigmas)
    if isinstance(spec.weight, DualWeightSpec):
        _, weight = dual_weights(sigmas, exps)
    else:
        weight = build_weight(spec.weight, spec.resolution)
    functions = tuple(build_function(f, spec.resolution) for f in spec.functions)
    return TheoremInstance(family, functions, sigmas, weight, exps)


def theorem_lhs(inst: TheoremInstance) -> float:
    """||T(f_vec)||_{L^p(w)} for the instance's own operator."""
    image = sparse_op(inst.operator_spec, inst.functions)
    return lp_norm(image, inst.weight, inst.exponents.p)


def theorem_rhs(inst: TheoremInstance) -> float:
    """Constant part of the bound (everything except the function norms)."""
    exps = inst.exponents
    avecp = a_vec_p(inst.weight, list(inst.sigmas), exps)
    sigma_ainf = [a_infty(s) for s in inst.sigmas]
    w_ainf = a_infty(inst.weight)
    inv = [1.0 / v for v in exps.ps]
    prod_all = math.prod(c ** e for c, e in zip(sigma_ainf, inv))
    leave_one = math.fsum(
        math.prod(c ** e for i, (c, e) in enumerate(zip(sigma_ainf, inv)) if i != j)
        for j in range(exps.m)
    )
    return avecp ** (1.0 / exps.p) * (
        prod_all + w_ainf ** exps.a_infty_weight_exponent * leave_one
    )


def theorem_ratio_detail(inst: TheoremInstance) -> InstanceEvaluation:
    """Measured-over-bound ratio with all the constants that entered it.

    Raises for exponents outside the covered region (needs gamma >= p0 or
    p > gamma) and for test functions with vanishing norm.
    """
    exps = inst.exponents
    if not exps.theorem_applicable:
        raise ValueError(
            "exponents outside the theorem's range: need gamma >= p0 or p > gamma"
        )
    duals, _ = inst.dual()
    norms = [
        lp_norm(f, wi, pi)
        for f, wi, pi in zip(inst.functions, duals, exps.ps)
    ]
    if any(v <= 0.0 for v in norms):
        raise ValueError("a test function vanishes in its dual-weighted norm")
    lhs = theorem_lhs(inst)
    avecp = a_vec_p(inst.weight, list(inst.sigmas), exps)
    sigma_ainf = [a_infty(s) for s in inst.sigmas]
    w_ainf = a_infty(inst.weight)
    inv = [1.0 / v for v in exps.ps]
    prod_all = math.prod(c ** e for c, e in zip(sigma_ainf, inv))
    leave_one = math.fsum(
        math.prod(c ** e for i, (c, e) in enumerate(zip(sigma_ainf, inv)) if i != j)
        for j in range(exps.m)
    )
    rhs = avecp ** (1.0 / exps.p) * (
        prod_all + w_ainf ** exps.a_infty_weight_exponent * leave_one
    )
    bound = rhs * math.prod(norms)
    return InstanceEvaluation(
        target="theorem-ratio",
        lhs=lhs,
        rhs=rhs,
        norms=norms,
        bound=bound,
        ratio=lhs / bound,
        regime=exps.regime(),
        avecp=avecp,
        w_ainf=w_ainf,
        sigma_ainf=sigma_ainf,
    )


def theorem_ratio(inst: TheoremInstance) -> float:
    return theorem_ratio_detail(inst).ratio


def maximal_ratio_detail(fs, sigmas, w, exponents: ExponentTuple) -> InstanceEvaluation:
    """Ratio for the multilinear maximal operator against

        [w, sigma_vec]_{A_Pvec}^(1/p) prod_i [sigma_i]^(1/p_i)
            prod_i ||f_i||_{L^{p_i}(sigma_i)}

    using the plain (p0 = 1) vector constant regardless of the tuple's p0.
    """
    fs = list(fs)
    sigmas = list(sigmas)
    base = exponents.with_p0(1.0)
    norms = [lp_norm(f, s, pi) for f, s, pi in zip(fs, sigmas, base.ps)]
    if any(v <= 0.0 for v in norms):
        raise ValueError("a test function vanishes in L^{p_i}(sigma_i)")
    lhs = lp_norm(multi_maximal(fs, sigmas), w, base.p)
    avecp = a_vec_p(w, sigmas, base)
    sigma_ainf = [a_infty(s) for s in sigmas]
    rhs = avecp ** (1.0 / base.p) * math.prod(
        c ** (1.0 / pi) for c, pi in zip(sigma_ainf, base.ps)
    )
    bound = rhs * math.prod(norms)
    return InstanceEvaluation(
        target="maximal-ratio",
        lhs=lhs,
        rhs=rhs,
        norms=norms,
        bound=bound,
        ratio=lhs / bound,
        regime=None,
        avecp=avecp,
        w_ainf=None,
        sigma_ainf=sigma_ainf,
    )


def maximal_ratio(fs, sigmas, w, exponents: ExponentTuple) -> float:
    return maximal_ratio_detail(fs, sigmas, w, exponents).ratio


def bucket_reconstruction_check(inst: TheoremInstance) -> float:
    """Max relative cell deviation between T**gamma and the sum of the
    bucket restrictions' T**gamma, null bucket included.  The buckets
    partition the family, so agreement is an exact identity."""
    spec = inst.operator_spec
    full = sparse_op_power(spec, inst.functions)
    deco = level_sets(inst.family, inst.weight, list(inst.sigmas), inst.exponents)
    acc = np.zeros_like(full)
    for _, cubes in deco.all_bucket_cubes():
        sub = inst.family.subfamily(cubes)
        acc += sparse_op_power(
            SparseOperatorSpec(sub, spec.p0, spec.gamma, spec.m), inst.functions
        )
    denom = np.maximum(np.abs(full), np.abs(acc))
    rel = np.where(denom > 0.0, np.abs(full - acc) / np.where(denom > 0.0, denom, 1.0), 0.0)
    return float(np.max(rel))


# ---------------------------------------------------------------------------
# instance sampling


def _sample_weight_spec(rng: np.random.Generator, s: SamplerConfig):
    kind = s.sigma_kinds[int(rng.integers(len(s.sigma_kinds)))]
    if kind == "power":
        alpha = float(rng.uniform(-1.0 + s.alpha_eps, s.alpha_max))
        return PowerWeightSpec(alpha=alpha)
    return RandomWeightSpec(seed=int(rng.integers(2**31)), logrange=s.logrange)


def _sample_function_spec(rng: np.random.Generator, s: SamplerConfig, resolution: int):
    kind = s.function_kinds[int(rng.integers(len(s.function_kinds)))]
    if kind == "power":
        beta = float(rng.uniform(s.beta_min, s.beta_max))
        return PowerWeightSpec(alpha=beta)
    if kind == "indicator":
        return IndicatorFunctionSpec(k=int(rng.integers(0, resolution + 1)))
    return RandomWeightSpec(seed=int(rng.integers(2**31)), logrange=s.logrange)


def _sample_exponent_spec(
    rng: np.random.Generator,
    s: SamplerConfig,
    p0_override: float | None = None,
    gamma_override: float | None = None,
) -> ExponentSpec:
    p0 = p0_override if p0_override is not None else float(
        s.p0_choices[int(rng.integers(len(s.p0_choices)))]
    )
    pool = [v for v in s.p_choices if v > p0]
    if not pool:
        raise ConfigError(f"no entries of p_choices exceed p0 = {p0}")
    ps = [float(pool[int(rng.integers(len(pool)))]) for _ in range(s.m)]
    gamma = gamma_override if gamma_override is not None else float(
        s.gamma_choices[int(rng.integers(len(s.gamma_choices)))]
    )
    return ExponentSpec(ps=ps, p0=p0, gamma=gamma)


def sample_instance(
    rng: np.random.Generator,
    sampler: SamplerConfig,
    resolution: int,
    target: str = "theorem-ratio",
    regime: str | None = None,
    max_attempts: int = 200,
) -> InstanceSpec:
    """Random instance spec; resamples until the exponents are admissible
    for the target (and in the requested regime, when locked)."""
    for _ in range(max_attempts):
        if target == "theorem-ratio":
            espec = _sample_exponent_spec(rng, sampler)
        elif target == "maximal-ratio":
            espec = _sample_exponent_spec(rng, sampler, p0_override=1.0)
        elif target == "ls-bound":
            espec = _sample_exponent_spec(
                rng, sampler, p0_override=1.0, gamma_override=1.0
            )
        else:
            raise ConfigError(f"unknown sampling target {target!r}")
        exps = espec.build()
        if target == "theorem-ratio":
            if not exps.theorem_applicable:
                continue
            if regime is not None and exps.regime() != regime:
                continue
        sigmas = [_sample_weight_spec(rng, sampler) for _ in range(sampler.m)]
        mode = sampler.w_modes[int(rng.integers(len(sampler.w_modes)))]
        if mode == "dual":
            weight = DualWeightSpec()
        elif mode == "power":
            weight = PowerWeightSpec(
                alpha=float(rng.uniform(-1.0 + sampler.alpha_eps, sampler.alpha_max))
            )
        else:
            weight = RandomWeightSpec(
                seed=int(rng.integers(2**31)), logrange=sampler.logrange
            )
        functions = [
            _sample_function_spec(rng, sampler, resolution)
            for _ in range(sampler.m)
        ]
        return InstanceSpec(
            resolution=resolution,
            family=RandomFamilySpec(
                seed=int(rng.integers(sampler.family_seed_pool)),
                branching=sampler.family,
            ),
            exponents=espec,
            sigmas=sigmas,
            weight=weight,
            functions=functions,
        )
    raise ValueError(
        f"failed to sample an admissible instance for target {target!r}"
        + (f" in regime {regime!r}" if regime else "")
        + f" within {max_attempts} attempts"
    )


def evaluate_instance(spec: InstanceSpec, target: str = "theorem-ratio") -> InstanceEvaluation:
    inst = instance_from_spec(spec)
    if target == "theorem-ratio":
        return theorem_ratio_detail(inst)
    if target == "maximal-ratio":
        return maximal_ratio_detail(
            inst.functions, inst.sigmas, inst.weight, inst.exponents
        )
    raise ConfigError(f"unknown evaluation target {target!r}")


# ---------------------------------------------------------------------------
# experiment suites


def resolve_threads(requested: int | None) -> int:
    """Worker count: the config's request, capped by SPARSE_WEIGHTS_THREADS."""
    env = os.environ.get(THREADS_ENV)
    cap = None
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1, got {cap}")
    n = requested if requested is not None else 1
    if n < 1:
        raise ConfigError(f"threads must be >= 1, got {n}")
    if cap is not None:
        n = min(n, cap)
    return n


def _trial_seed(master: int, suite_index: int, trial: int) -> int:
    """Single replayable integer seed for one trial."""
    seq = np.random.SeedSequence([master, suite_index, trial])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _weight_params(spec: InstanceSpec) -> str:
    parts = ["s:" + ";".join(describe_spec(s) for s in spec.sigmas)]
    parts.append("w:" + describe_spec(spec.weight))
    parts.append("f:" + ";".join(describe_spec(f) for f in spec.functions))
    return "|".join(parts)


def _run_rescale_trial(suite: RescaleSuite, trial: int, seed: int) -> ReportRow:
    rng = np.random.default_rng(seed)
    family = random_sparse(
        int(rng.integers(2**31)), suite.resolution, suite.family.to_params()
    )
    p0 = float(suite.p0_choices[int(rng.integers(len(suite.p0_choices)))])
    gamma = float(suite.gamma_choices[int(rng.integers(len(suite.gamma_choices)))])
    fs = [
        random_weight(int(rng.integers(2**31)), suite.resolution, suite.logrange)
        for _ in range(suite.m)
    ]
    spec = SparseOperatorSpec(family, p0, gamma, suite.m)
    dev = rescale_identity_check(spec, fs)
    return ReportRow(
        trial=trial,
        check=suite.check,
        resolution=suite.resolution,
        m=suite.m,
        p0=p0,
        gamma=gamma,
        seed=seed,
        lhs=dev,
        rhs=suite.tolerance,
        ratio=dev / suite.tolerance,
        passed=dev <= suite.tolerance,
    )


def _run_carleson_trial(suite: CarlesonSuite, trial: int, seed: int) -> ReportRow:
    rng = np.random.default_rng(seed)
    resolution = int(suite.resolutions[int(rng.integers(len(suite.resolutions)))])
    family = random_sparse(
        int(rng.integers(2**31)), resolution, suite.family.to_params()
    )
    sigma = random_weight(int(rng.integers(2**31)), resolution, suite.logrange)
    top = family.cubes[int(rng.integers(len(family)))]
    lhs = carleson_sum(family, sigma, top)
    ainf = a_infty(sigma)
    rhs = 2.0 * ainf * integral(sigma, top)
    return ReportRow(
        trial=trial,
        check=suite.check,
        resolution=resolution,
        seed=seed,
        lhs=lhs,
        rhs=rhs,
        ratio=lhs / rhs,
        sigma_ainf=[ainf],
        passed=lhs <= rhs,
    )


def _run_principal_trial(
    suite: PrincipalCarlesonSuite, trial: int, seed: int
) -> ReportRow:
    rng = np.random.default_rng(seed)
    resolution = int(suite.resolutions[int(rng.integers(len(suite.resolutions)))])
    family = random_sparse(
        int(rng.integers(2**31)), resolution, suite.family.to_params()
    )
    sigma = random_weight(int(rng.integers(2**31)), resolution, suite.logrange)
    f = random_weight(int(rng.integers(2**31)), resolution, suite.logrange)
    p = float(suite.p_choices[int(rng.integers(len(suite.p_choices)))])
    forest = principal_cubes(family, f, sigma)
    measured = carleson_embedding_check(forest, f, sigma, p)
    pc = p / (p - 1.0)
    bound = 2.0 * pc ** p
    return ReportRow(
        trial=trial,
        check=suite.check,
        resolution=resolution,
        p=p,
        seed=seed,
        lhs=measured,
        rhs=bound,
        ratio=measured / bound,
        passed=measured <= bound,
    )


def _run_theorem_trial(suite: TheoremSuite, trial: int, seed: int) -> ReportRow:
    rng = np.random.default_rng(seed)
    regime = None
    if suite.regime_cycle:
        labels = _regime_labels(suite.sampler.m)
        regime = labels[trial % len(labels)]
    spec = sample_instance(
        rng, suite.sampler, suite.resolution, target="theorem-ratio", regime=regime
    )
    ev = evaluate_instance(spec, "theorem-ratio")
    threshold = (
        suite.max_ratio
        if suite.max_ratio is not None
        else calibration.theorem_threshold(ev.regime)
    )
    exps = spec.exponents
    return ReportRow(
        trial=trial,
        check=suite.check,
        resolution=suite.resolution,
        m=len(exps.ps),
        p0=exps.p0,
        gamma=exps.gamma,
        p=exps.build().p,
        p_list=list(exps.ps),
        weight_params=_weight_params(spec),
        seed=seed,
        lhs=ev.lhs,
        rhs=ev.bound,
        ratio=ev.ratio,
        w_ainf=ev.w_ainf,
        sigma_ainf=ev.sigma_ainf,
        avecp=ev.avecp,
        regime=ev.regime,
        passed=ev.ratio <= threshold,
    )


def _run_maximal_trial(suite: MaximalSuite, trial: int, seed: int) -> ReportRow:
    rng = np.random.default_rng(seed)
    spec = sample_instance(rng, suite.sampler, suite.resolution, target="maximal-ratio")
    ev = evaluate_instance(spec, "maximal-ratio")
    threshold = (
        suite.max_ratio if suite.max_ratio is not None else calibration.maximal_threshold()
    )
    exps = spec.exponents
    return ReportRow(
        trial=trial,
        check=suite.check,
        resolution=suite.resolution,
        m=len(exps.ps),
        p0=exps.p0,
        gamma=exps.gamma,
        p=exps.build().p,
        p_list=list(exps.ps),
        weight_params=_weight_params(spec),
        seed=seed,
        lhs=ev.lhs,
        rhs=ev.bound,
        ratio=ev.ratio,
        sigma_ainf=ev.sigma_ainf,
        avecp=ev.avecp,
        passed=ev.ratio <= threshold,
    )


def _run_bucket_trial(suite: BucketSuite, trial: int, seed: int) -> ReportRow:
    rng = np.random.default_rng(seed)
    spec = sample_instance(rng, suite.sampler, suite.resolution, target="theorem-ratio")
    inst = instance_from_spec(spec)
    dev = bucket_reconstruction_check(inst)
    exps = spec.exponents
    return ReportRow(
        trial=trial,
        check=suite.check,
        resolution=suite.resolution,
        m=len(exps.ps),
        p0=exps.p0,
        gamma=exps.gamma,
        weight_params=_weight_params(spec),
        seed=seed,
        lhs=dev,
        rhs=suite.tolerance,
        ratio=dev / suite.tolerance,
        passed=dev <= suite.tolerance,
    )


def _run_ls_trial(suite: LsSuite, trial: int, seed: int) -> ReportRow:
    rng = np.random.default_rng(seed)
    if suite.sampler.m != 2:
        raise ConfigError("ls-bound suites require a bilinear sampler (m = 2)")
    threshold = suite.max_ratio if suite.max_ratio is not None else calibration.ls_threshold()
    for _ in range(50):
        spec = sample_instance(rng, suite.sampler, suite.resolution, target="ls-bound")
        inst = instance_from_spec(spec)
        deco = level_sets(inst.family, inst.weight, list(inst.sigmas), inst.exponents)
        if not deco.buckets:
            continue
        # deterministic choice: the fullest bucket, ties to the smaller index
        a = max(sorted(deco.buckets), key=lambda k: len(deco.buckets[k]))
        forest_f = principal_cubes(inst.family, inst.functions[0], inst.sigmas[0])
        forest_g = principal_cubes(inst.family, inst.functions[1], inst.sigmas[1])
        worst = ls_bound_check(
            deco.buckets[a],
            forest_f,
            forest_g,
            inst.weight,
            list(inst.sigmas),
            inst.exponents,
            a,
        )
        if worst is None:
            continue
        exps = spec.exponents
        return ReportRow(
            trial=trial,
            check=suite.check,
            resolution=suite.resolution,
            m=2,
            p0=exps.p0,
            gamma=exps.gamma,
            p=exps.build().p,
            p_list=list(exps.ps),
            weight_params=_weight_params(spec),
            seed=seed,
            lhs=worst.lhs,
            rhs=worst.rhs,
            ratio=worst.ratio,
            passed=worst.ratio <= threshold,
        )
    raise ValueError("could not sample a usable ls-bound instance in 50 attempts")


_SUITE_RUNNERS = {
    "rescale-identity": _run_rescale_trial,
    "carleson": _run_carleson_trial,
    "principal-carleson": _run_principal_trial,
    "theorem-ratio": _run_theorem_trial,
    "maximal-ratio": _run_maximal_trial,
    "bucket-reconstruction": _run_bucket_trial,
    "ls-bound": _run_ls_trial,
}


def run_experiment(config: ExperimentConfig) -> list[ReportRow]:
    """Run every suite; rows come back in (suite, trial) order regardless of
    the worker pool size, and each row's seed replays its trial alone."""
    threads = resolve_threads(config.threads)
    rows: list[ReportRow] = []
    for suite_index, suite in enumerate(config.suites):
        runner = _SUITE_RUNNERS[suite.check]
        seeds = [
            _trial_seed(config.seed, suite_index, trial)
            for trial in range(suite.trials)
        ]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows.extend(
                    pool.map(
                        lambda args: runner(suite, *args),
                        list(enumerate(seeds)),
                    )
                )
        else:
            rows.extend(runner(suite, trial, s) for trial, s in enumerate(seeds))
    return rows


def rows_all_pass(rows: list[ReportRow]) -> bool:
    return all(row.passed for row in rows)


# ---------------------------------------------------------------------------
# extremizer search


def _regime_labels(m: int) -> list[str]:
    return ["p<=gamma"] + [f"p{i + 1}-max" for i in range(m)] + ["qprime-max"]


def _perturb_scalar(rng, value, lo, hi):
    span = hi - lo
    scale = span * float(rng.choice([0.3, 0.1, 0.03]))
    return float(min(hi, max(lo, value + rng.normal(0.0, scale))))


def _propose(
    rng: np.random.Generator,
    spec: InstanceSpec,
    sampler: SamplerConfig,
    target: str,
) -> InstanceSpec | None:
    """One coordinate-group move; None when the chosen group has no freedom."""
    groups = ["exponents", "sigma", "weight", "function", "family"]
    group = groups[int(rng.integers(len(groups)))]
    m = sampler.m
    if group == "exponents":
        exps = spec.exponents
        slot = int(rng.integers(m + 2))
        ps, p0, gamma = list(exps.ps), exps.p0, exps.gamma
        if slot < m:
            pool = [v for v in sampler.p_choices if v > p0 and v != ps[slot]]
            if not pool:
                return None
            ps[slot] = float(pool[int(rng.integers(len(pool)))])
        elif slot == m:
            if target != "theorem-ratio":
                return None
            pool = [v for v in sampler.p0_choices if v != p0 and all(x > v for x in ps)]
            if not pool:
                return None
            p0 = float(pool[int(rng.integers(len(pool)))])
        else:
            if target == "ls-bound":
                return None
            pool = [v for v in sampler.gamma_choices if v != gamma]
            if not pool:
                return None
            gamma = float(pool[int(rng.integers(len(pool)))])
        return spec.model_copy(
            update={"exponents": ExponentSpec(ps=ps, p0=p0, gamma=gamma)}
        )
    if group == "sigma":
        slot = int(rng.integers(m))
        cur = spec.sigmas[slot]
        if isinstance(cur, PowerWeightSpec):
            alpha = _perturb_scalar(
                rng, cur.alpha, -1.0 + sampler.alpha_eps, sampler.alpha_max
            )
            new = PowerWeightSpec(alpha=alpha)
        else:
            new = RandomWeightSpec(
                seed=int(rng.integers(2**31)), logrange=sampler.logrange
            )
        sigmas = list(spec.sigmas)
        sigmas[slot] = new
        return spec.model_copy(update={"sigmas": sigmas})
    if group == "weight":
        cur = spec.weight
        if isinstance(cur, DualWeightSpec):
            return None
        if isinstance(cur, PowerWeightSpec):
            alpha = _perturb_scalar(
                rng, cur.alpha, -1.0 + sampler.alpha_eps, sampler.alpha_max
            )
            return spec.model_copy(update={"weight": PowerWeightSpec(alpha=alpha)})
        return spec.model_copy(
            update={
                "weight": RandomWeightSpec(
                    seed=int(rng.integers(2**31)), logrange=sampler.logrange
                )
            }
        )
    if group == "function":
        slot = int(rng.integers(m))
        cur = spec.functions[slot]
        if isinstance(cur, PowerWeightSpec):
            beta = _perturb_scalar(rng, cur.alpha, sampler.beta_min, sampler.beta_max)
            new = PowerWeightSpec(alpha=beta)
        elif isinstance(cur, IndicatorFunctionSpec):
            step = int(rng.choice([-2, -1, 1, 2]))
            k = min(spec.resolution, max(0, cur.k + step))
            if k == cur.k:
                return None
            new = IndicatorFunctionSpec(k=k)
        else:
            new = RandomWeightSpec(
                seed=int(rng.integers(2**31)), logrange=sampler.logrange
            )
        functions = list(spec.functions)
        functions[slot] = new
        return spec.model_copy(update={"functions": functions})
    # family seed move
    seed = int(rng.integers(sampler.family_seed_pool))
    fam = spec.family
    if isinstance(fam, RandomFamilySpec) and seed != fam.seed:
        return spec.model_copy(
            update={"family": RandomFamilySpec(seed=seed, branching=fam.branching)}
        )
    return None


def extremizer_search(config: SearchConfig) -> SearchResult:
    """Random-restart coordinate ascent on the chosen ratio.

    Each restart samples a fresh admissible instance (locked to one regime
    when `regimes` is set, cycling through the list), then takes `steps`
    single-group proposals, accepting strict improvements.  Proposals that
    leave the admissible region (or the locked regime) are rejected.  The
    whole run is a pure function of config.seed.
    """
    target = config.target
    regimes: list[str | None]
    if target == "theorem-ratio":
        regimes = list(config.regimes) if config.regimes else [None]
    else:
        if config.regimes:
            raise ConfigError("regime locking only applies to theorem-ratio searches")
        regimes = [None]
    best: RegimeBest | None = None
    by_regime: dict[str, RegimeBest] = {}
    trace: list[RestartTrace] = []

    def consider(spec: InstanceSpec, ev: InstanceEvaluation) -> None:
        nonlocal best
        entry = RegimeBest(ratio=ev.ratio, evaluation=ev, instance=spec)
        if best is None or ev.ratio > best.ratio:
            best = entry
        key = ev.regime if ev.regime is not None else target
        cur = by_regime.get(key)
        if cur is None or ev.ratio > cur.ratio:
            by_regime[key] = entry

    for restart in range(config.restarts):
        rng = np.random.default_rng([config.seed, restart])
        lock = regimes[restart % len(regimes)]
        spec = sample_instance(
            rng,
            config.sampler,
            config.resolution,
            target=target,
            regime=lock,
            max_attempts=config.max_sample_attempts,
        )
        ev = evaluate_instance(spec, target)
        consider(spec, ev)
        init_ratio = ev.ratio
        accepted = 0
        for _ in range(config.steps):
            cand = _propose(rng, spec, config.sampler, target)
            if cand is None:
                continue
            try:
                cand_ev = evaluate_instance(cand, target)
            except (ValueError, ConfigError):
                continue
            if lock is not None and cand_ev.regime != lock:
                continue
            if cand_ev.ratio > ev.ratio:
                spec, ev = cand, cand_ev
                accepted += 1
                consider(spec, ev)
        trace.append(
            RestartTrace(
                restart=restart,
                regime=lock,
                init_ratio=init_ratio,
                best_ratio=ev.ratio,
                accepted=accepted,
            )
        )
    assert best is not None
    return SearchResult(
        target=target,
        seed=config.seed,
        restarts=config.restarts,
        steps=config.steps,
        best=best,
        by_regime=by_regime,
        trace=trace,
    )

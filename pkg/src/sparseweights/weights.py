"""Weights on the dyadic grid and their characteristic constants.

A weight is a nonnegative StepFunction.  This module builds the standard
test families (power laws, seeded log-uniform noise, normalized indicators)
and computes the Muckenhoupt-type suprema: the classical and two-weight A_p
constants, the Fujii-Wilson A_infinity constant, and the multilinear vector
constant attached to an exponent tuple.

Convention: the maximal function inside the A_infinity constant is the
*dyadic* one, over the same grid the weights live on.  All suprema below
therefore range over dyadic cubes only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import Cube, StepFunction, level_sums


@dataclass(frozen=True)
class ExponentTuple:
    """Exponents (p_1..p_m), base integrability p0, and aggregation gamma.

    Requirements: 1 <= p0 < p_i < infinity for every i, and gamma > 0.
    The joint exponent p is the harmonic combination 1/p = sum_i 1/p_i.
    """

    ps: tuple[float, ...]
    p0: float = 1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        ps = tuple(float(v) for v in self.ps)
        object.__setattr__(self, "ps", ps)
        object.__setattr__(self, "p0", float(self.p0))
        object.__setattr__(self, "gamma", float(self.gamma))
        if len(ps) < 1:
            raise ValueError("need at least one exponent")
        if not (math.isfinite(self.p0) and self.p0 >= 1):
            raise ValueError(f"p0 must be finite and >= 1, got {self.p0}")
        for v in ps:
            if not (math.isfinite(v) and v > self.p0):
                raise ValueError(f"every p_i must be finite and > p0={self.p0}, got {v}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and positive, got {self.gamma}")

    @property
    def m(self) -> int:
        return len(self.ps)

    @property
    def p(self) -> float:
        """Joint exponent: 1/p = sum 1/p_i."""
        return 1.0 / math.fsum(1.0 / v for v in self.ps)

    @property
    def p_conjugates(self) -> tuple[float, ...]:
        return tuple(v / (v - 1.0) for v in self.ps)

    @property
    def q(self) -> float:
        """Aggregation ratio p / gamma."""
        return self.p / self.gamma

    @property
    def q_conjugate(self) -> float | None:
        """Conjugate of q when q > 1, else None."""
        q = self.q
        if q <= 1.0:
            return None
        return q / (q - 1.0)

    @property
    def sigma_exponents(self) -> tuple[float, ...]:
        """Per-slot powers (p/p0) (p_i - p0) / p_i in the vector constant."""
        p = self.p
        return tuple((p / self.p0) * (v - self.p0) / v for v in self.ps)

    @property
    def dual_exponents(self) -> tuple[float, ...]:
        """Powers 1 - p_i/p0 turning sigma_i into the dual weight w_i."""
        return tuple(1.0 - v / self.p0 for v in self.ps)

    @property
    def a_infty_weight_exponent(self) -> float:
        """Exponent (1/gamma - 1/p)_+ on the A_infinity constant of w."""
        return max(1.0 / self.gamma - 1.0 / self.p, 0.0)

    @property
    def theorem_applicable(self) -> bool:
        """Parameter region the norm bound covers: gamma >= p0, or p > gamma."""
        return self.gamma >= self.p0 or self.p > self.gamma

    def regime(self) -> str:
        """Label of the exponent regime driving the bound's proof route.

        "p<=gamma" when p <= gamma; otherwise the largest of
        p_1, ..., p_m, q' decides ("p1-max", ..., "qprime-max"),
        ties going to the earliest in that order.
        """
        if self.p <= self.gamma:
            return "p<=gamma"
        candidates = list(self.ps) + [self.q_conjugate]
        best = max(candidates)
        pos = candidates.index(best)
        if pos < self.m:
            return f"p{pos + 1}-max"
        return "qprime-max"

    def with_p0(self, p0: float) -> "ExponentTuple":
        return ExponentTuple(self.ps, p0, self.gamma)


def power_weight(alpha: float, resolution: int) -> StepFunction:
    """Cell averages of x**alpha for alpha > -1 (integrable at the origin).

    Each cell value is the exact mean of x**alpha over the cell, computed
    from the primitive x**(alpha+1)/(alpha+1), so coarse-cube averages of
    the step function agree with averages of the true power law.
    """
    alpha = float(alpha)
    if not alpha > -1.0:
        raise ValueError(f"power weight needs alpha > -1, got {alpha}")
    n = 1 << resolution
    edges = np.arange(n + 1, dtype=np.float64) / n
    if alpha == 0.0:
        return StepFunction(resolution, np.ones(n))
    primitive = edges ** (alpha + 1.0) / (alpha + 1.0)
    return StepFunction(resolution, np.diff(primitive) * n)


def random_weight(seed: int, resolution: int, logrange: float = 2.0) -> StepFunction:
    """Strictly positive weight with iid cells exp(U(-logrange, logrange))."""
    logrange = float(logrange)
    if logrange < 0:
        raise ValueError("logrange must be nonnegative")
    rng = np.random.default_rng(seed)
    return StepFunction(
        resolution, np.exp(rng.uniform(-logrange, logrange, size=1 << resolution))
    )


def indicator_function(k: int, resolution: int, normalized: bool = True) -> StepFunction:
    """Indicator of [0, 2**-k); normalized to unit mass when requested."""
    if not 0 <= k <= resolution:
        raise ValueError(f"k must lie in [0, {resolution}], got {k}")
    cells = np.zeros(1 << resolution)
    cells[: 1 << (resolution - k)] = float(1 << k) if normalized else 1.0
    return StepFunction(resolution, cells)


@dataclass(frozen=True)
class SupResult:
    """A supremum over dyadic cubes together with an attaining cube."""

    value: float
    cube: Cube

    def attained_at_finest_level(self, resolution: int) -> bool:
        return self.cube.level >= resolution


def _sup_over_table(values_by_level: list[np.ndarray]) -> SupResult:
    """Largest entry over a per-level table; ties go to the coarsest, then
    leftmost, cube so the attaining cube is deterministic."""
    best = -math.inf
    best_cube = Cube.root()
    for level, vals in enumerate(values_by_level):
        k = int(np.argmax(vals))
        v = float(vals[k])
        if v > best:
            best = v
            best_cube = Cube(level, k)
    return SupResult(best, best_cube)


def _averages_by_level(cells: np.ndarray) -> list[np.ndarray]:
    sums = level_sums(cells)
    resolution = len(sums) - 1
    return [s * math.ldexp(1.0, j - resolution) for j, s in enumerate(sums)]


def a_p_detail(w: StepFunction, p: float) -> SupResult:
    """Classical A_p constant sup_Q <w>_Q <w^(1-p')>_Q^(p-1), with its cube.

    Needs strictly positive cells: the dual power 1 - p' is negative, so a
    zero cell would make the constant infinite.
    """
    p = float(p)
    if not p > 1:
        raise ValueError(f"a_p needs p > 1, got {p}")
    if np.any(w.cells == 0.0):
        raise ValueError("a_p is infinite for weights with zero cells")
    pc = p / (p - 1.0)
    avg_w = _averages_by_level(w.cells)
    avg_dual = _averages_by_level(w.cells ** (1.0 - pc))
    table = [aw * ad ** (p - 1.0) for aw, ad in zip(avg_w, avg_dual)]
    return _sup_over_table(table)


def a_p_constant(w: StepFunction, p: float) -> float:
    return a_p_detail(w, p).value


def two_weight_a_p_detail(w: StepFunction, sigma: StepFunction, p: float) -> SupResult:
    """Joint constant sup_Q <w>_Q <sigma>_Q^(p-1), with its cube."""
    p = float(p)
    if not p > 1:
        raise ValueError(f"two_weight_a_p needs p > 1, got {p}")
    if w.resolution != sigma.resolution:
        raise ValueError("w and sigma live at different resolutions")
    avg_w = _averages_by_level(w.cells)
    avg_s = _averages_by_level(sigma.cells)
    table = [aw * as_ ** (p - 1.0) for aw, as_ in zip(avg_w, avg_s)]
    return _sup_over_table(table)


def two_weight_a_p(w: StepFunction, sigma: StepFunction, p: float) -> float:
    return two_weight_a_p_detail(w, sigma, p).value


def a_infty_detail(w: StepFunction) -> SupResult:
    """Fujii-Wilson constant sup_Q (1/w(Q)) ∫_Q M(w 1_Q), dyadic M.

    On a cube Q the dyadic maximal function of w 1_Q only sees subcubes of Q:
    any strictly larger cube has average <= <w>_Q, which the subcube Q itself
    already contributes.  So sweeping levels fine-to-coarse while keeping a
    running cellwise max of block averages yields M(w 1_Q) restricted to Q
    for every Q at once, in O(L 2**L).

    The supremum skips cubes with w(Q) == 0 and is always >= 1 otherwise.
    """
    resolution = w.resolution
    sums = level_sums(w.cells)
    if float(sums[0][0]) <= 0.0:
        raise ValueError("a_infty needs a weight with positive total mass")
    running = w.cells.copy()
    per_level: list[tuple[int, np.ndarray, np.ndarray]] = []
    for level in range(resolution, -1, -1):
        scale = math.ldexp(1.0, level - resolution)
        averages = sums[level] * scale
        running = np.maximum(running, np.repeat(averages, 1 << (resolution - level)))
        numer = running.reshape(1 << level, -1).sum(axis=1)
        per_level.append((level, numer, sums[level]))
    best = -math.inf
    best_cube = Cube.root()
    # Walk coarse-to-fine so ties prefer the coarsest, leftmost cube.
    for level, numer, mass in reversed(per_level):
        valid = mass > 0.0
        if not np.any(valid):
            continue
        ratios = np.where(valid, numer / np.where(valid, mass, 1.0), -math.inf)
        k = int(np.argmax(ratios))
        v = float(ratios[k])
        if v > best:
            best = v
            best_cube = Cube(level, k)
    return SupResult(best, best_cube)


def a_infty(w: StepFunction) -> float:
    return a_infty_detail(w).value


def a_vec_p_detail(
    w: StepFunction,
    sigmas: list[StepFunction] | tuple[StepFunction, ...],
    exponents: ExponentTuple,
) -> SupResult:
    """Vector constant sup_Q <w>_Q prod_i <sigma_i>_Q^((p/p0)(p_i-p0)/p_i).

    Cubes where w or any sigma_i averages to zero contribute zero to the
    supremum (every exponent is positive).
    """
    sigmas = list(sigmas)
    if len(sigmas) != exponents.m:
        raise ValueError(
            f"expected {exponents.m} companion weights, got {len(sigmas)}"
        )
    for s in sigmas:
        if s.resolution != w.resolution:
            raise ValueError("weights live at different resolutions")
    powers = exponents.sigma_exponents
    table = _averages_by_level(w.cells)
    for s, e in zip(sigmas, powers):
        avgs = _averages_by_level(s.cells)
        table = [t * a ** e for t, a in zip(table, avgs)]
    return _sup_over_table(table)


def a_vec_p(
    w: StepFunction,
    sigmas: list[StepFunction] | tuple[StepFunction, ...],
    exponents: ExponentTuple,
) -> float:
    return a_vec_p_detail(w, sigmas, exponents).value


def dual_weights(
    sigmas: list[StepFunction] | tuple[StepFunction, ...],
    exponents: ExponentTuple,
) -> tuple[list[StepFunction], StepFunction]:
    """Dual weights w_i = sigma_i^(1 - p_i/p0) and w = prod w_i^(p/p_i).

    The sigma_i must be strictly positive cellwise: the dual powers are
    negative, so zero cells have no finite dual.
    """
    sigmas = list(sigmas)
    if len(sigmas) != exponents.m:
        raise ValueError(f"expected {exponents.m} weights, got {len(sigmas)}")
    for s in sigmas:
        if np.any(s.cells == 0.0):
            raise ValueError("dual weights need strictly positive sigma cells")
    resolution = sigmas[0].resolution
    for s in sigmas[1:]:
        if s.resolution != resolution:
            raise ValueError("weights live at different resolutions")
    duals = [
        StepFunction(resolution, s.cells ** e)
        for s, e in zip(sigmas, exponents.dual_exponents)
    ]
    p = exponents.p
    joint = np.ones(1 << resolution)
    for wi, pi in zip(duals, exponents.ps):
        joint = joint * wi.cells ** (p / pi)
    return duals, StepFunction(resolution, joint)

"""Dyadic grid on [0, 1): cubes, step functions, integrals and averages.

Everything downstream works at a fixed resolution L: functions and weights
are piecewise constant on the 2**L half-open cells [k 2**-L, (k+1) 2**-L),
and "cubes" are the dyadic intervals of level 0..L.  All integrals are exact
finite sums, so there is no quadrature error anywhere; floating point
rounding is the only noise source, and block sums are always accumulated
pairwise (per level) to keep that noise small and run-to-run identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Hard cap on the grid resolution (2**20 cells in dimension one).
MAX_RESOLUTION = 20

#: Default resolution used by the command line and service layers.
DEFAULT_RESOLUTION = 10


@dataclass(frozen=True, order=True)
class Cube:
    """Dyadic interval [index * 2**-level, (index + 1) * 2**-level).

    Ordering is lexicographic in (level, index): coarse cubes sort first,
    which is the canonical order used for serialization.
    """

    level: int
    index: int

    def __post_init__(self) -> None:
        if self.level < 0 or self.level > MAX_RESOLUTION:
            raise ValueError(f"cube level must lie in [0, {MAX_RESOLUTION}], got {self.level}")
        if not 0 <= self.index < (1 << self.level):
            raise ValueError(f"cube index {self.index} out of range at level {self.level}")

    @classmethod
    def root(cls) -> "Cube":
        return cls(0, 0)

    @property
    def left(self) -> float:
        """Left endpoint; exact, both factors are powers of two times an int."""
        return math.ldexp(self.index, -self.level)

    @property
    def right(self) -> float:
        return math.ldexp(self.index + 1, -self.level)

    @property
    def measure(self) -> float:
        """Lebesgue measure 2**-level."""
        return math.ldexp(1.0, -self.level)

    def parent(self) -> "Cube":
        if self.level == 0:
            raise ValueError("the root cube has no parent")
        return Cube(self.level - 1, self.index >> 1)

    def ancestor(self, level: int) -> "Cube":
        """The unique containing cube at a coarser (or equal) level."""
        if not 0 <= level <= self.level:
            raise ValueError(f"ancestor level must lie in [0, {self.level}], got {level}")
        return Cube(level, self.index >> (self.level - level))

    def children(self) -> tuple["Cube", "Cube"]:
        return (
            Cube(self.level + 1, 2 * self.index),
            Cube(self.level + 1, 2 * self.index + 1),
        )

    def contains(self, other: "Cube") -> bool:
        """Set containment other ⊆ self (equality counts)."""
        return (
            other.level >= self.level
            and (other.index >> (other.level - self.level)) == self.index
        )

    def cell_span(self, resolution: int) -> tuple[int, int]:
        """Half-open range [a, b) of level-`resolution` cell indices inside."""
        if resolution < self.level:
            raise ValueError(
                f"cube of level {self.level} is finer than resolution {resolution}"
            )
        shift = resolution - self.level
        return self.index << shift, (self.index + 1) << shift

    def __str__(self) -> str:
        return f"{self.level} {self.index}"


def all_cubes(resolution: int) -> list[Cube]:
    """Every dyadic cube of level 0..resolution, in canonical order."""
    if not 0 <= resolution <= MAX_RESOLUTION:
        raise ValueError(f"resolution must lie in [0, {MAX_RESOLUTION}]")
    return [Cube(j, k) for j in range(resolution + 1) for k in range(1 << j)]


def level_sums(values: np.ndarray) -> list[np.ndarray]:
    """Block sums of `values` over every dyadic cube, by pairwise halving.

    out[j][k] is the sum of the cells covered by the cube (j, k).  Each level
    is obtained from the finer one by adding adjacent pairs, so the whole
    table costs O(2**L) and every block sum is a balanced binary tree sum.
    """
    n = len(values)
    resolution = n.bit_length() - 1
    if n != 1 << resolution:
        raise ValueError(f"cell count {n} is not a power of two")
    out: list[np.ndarray] = [np.asarray(values, dtype=np.float64)]
    for _ in range(resolution):
        cur = out[-1]
        out.append(cur[0::2] + cur[1::2])
    out.reverse()
    return out


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Nonnegative function on [0, 1), constant on the 2**resolution cells.

    Instances are immutable; the cell array is copied on construction and
    marked read-only.  Arithmetic helpers return new instances.
    """

    resolution: int
    cells: np.ndarray

    def __post_init__(self) -> None:
        if not 0 <= self.resolution <= MAX_RESOLUTION:
            raise ValueError(f"resolution must lie in [0, {MAX_RESOLUTION}]")
        arr = np.array(self.cells, dtype=np.float64, copy=True)
        if arr.shape != (1 << self.resolution,):
            raise ValueError(
                f"expected {1 << self.resolution} cells at resolution "
                f"{self.resolution}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("cell values must be finite")
        if np.any(arr < 0):
            raise ValueError("cell values must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @classmethod
    def constant(cls, value: float, resolution: int) -> "StepFunction":
        return cls(resolution, np.full(1 << resolution, float(value)))

    @classmethod
    def from_cells(cls, values) -> "StepFunction":
        """Build from a flat cell list whose length fixes the resolution."""
        arr = np.asarray(values, dtype=np.float64)
        resolution = len(arr).bit_length() - 1
        return cls(resolution, arr)

    def power(self, exponent: float) -> "StepFunction":
        """Cellwise power; 0**negative raises like the underlying division."""
        exponent = float(exponent)
        if exponent < 0 and np.any(self.cells == 0.0):
            raise ValueError("negative power of a function with zero cells")
        return StepFunction(self.resolution, self.cells ** exponent)

    def __mul__(self, other) -> "StepFunction":
        if isinstance(other, StepFunction):
            if other.resolution != self.resolution:
                raise ValueError("resolution mismatch in product")
            return StepFunction(self.resolution, self.cells * other.cells)
        return StepFunction(self.resolution, self.cells * float(other))

    __rmul__ = __mul__

    def level_sums(self) -> list[np.ndarray]:
        """Raw cell-block sums per cube; multiply by 2**-resolution to integrate."""
        return level_sums(self.cells)


def _require_same_resolution(*fs: StepFunction) -> int:
    resolution = fs[0].resolution
    for f in fs[1:]:
        if f.resolution != resolution:
            raise ValueError("step functions live at different resolutions")
    return resolution


def measure(cube: Cube) -> float:
    """Lebesgue measure of a dyadic cube."""
    return cube.measure


def integral(f: StepFunction, cube: Cube | None = None) -> float:
    """Exact integral of f over the cube (default: over all of [0, 1))."""
    cube = cube or Cube.root()
    a, b = cube.cell_span(f.resolution)
    return math.ldexp(float(np.sum(f.cells[a:b])), -f.resolution)


def average(f: StepFunction, cube: Cube | None = None, p0: float = 1.0) -> float:
    """p0-average  ( |Q|^-1 ∫_Q f^p0 )^(1/p0);  plain mean when p0 == 1."""
    cube = cube or Cube.root()
    p0 = float(p0)
    if p0 < 1:
        raise ValueError(f"averaging exponent must satisfy p0 >= 1, got {p0}")
    a, b = cube.cell_span(f.resolution)
    block = f.cells[a:b]
    if p0 == 1.0:
        return float(np.sum(block)) / (b - a)
    return (float(np.sum(block ** p0)) / (b - a)) ** (1.0 / p0)


def weighted_average(f: StepFunction, sigma: StepFunction, cube: Cube | None = None) -> float:
    """sigma-average of f over the cube: ∫_Q f sigma / sigma(Q); 0 if sigma(Q) == 0."""
    cube = cube or Cube.root()
    _require_same_resolution(f, sigma)
    a, b = cube.cell_span(f.resolution)
    den = float(np.sum(sigma.cells[a:b]))
    if den <= 0.0:
        return 0.0
    num = float(np.sum(f.cells[a:b] * sigma.cells[a:b]))
    return num / den


def lp_norm(f: StepFunction, weight: StepFunction, p: float) -> float:
    """Weighted norm ( ∫ f^p w )^(1/p) for p > 0."""
    p = float(p)
    if not p > 0:
        raise ValueError(f"lp_norm needs p > 0, got {p}")
    _require_same_resolution(f, weight)
    total = math.ldexp(float(np.sum(f.cells ** p * weight.cells)), -f.resolution)
    return total ** (1.0 / p)

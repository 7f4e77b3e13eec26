"""Reference implementations by direct enumeration.

Everything here recomputes the package's quantities from their definitions
with plain Python loops and compensated sums, sharing no code with the fast
paths (no block-sum tables, no tree sweeps).  Intended for cross-checking at
small resolutions; costs are O(4**L) and worse.
"""

from __future__ import annotations

import math

from .dyadic import Cube, StepFunction, all_cubes
from .sparse import SparseFamily
from .weights import ExponentTuple


def bf_integral(f: StepFunction, cube: Cube | None = None) -> float:
    cube = cube or Cube.root()
    a, b = cube.cell_span(f.resolution)
    width = 0.5 ** f.resolution
    return math.fsum(float(f.cells[i]) * width for i in range(a, b))


def bf_average(f: StepFunction, cube: Cube, p0: float = 1.0) -> float:
    a, b = cube.cell_span(f.resolution)
    mean = math.fsum(float(f.cells[i]) ** p0 for i in range(a, b)) / (b - a)
    return mean ** (1.0 / p0)


def bf_lp_norm(f: StepFunction, w: StepFunction, p: float) -> float:
    width = 0.5 ** f.resolution
    total = math.fsum(
        float(f.cells[i]) ** p * float(w.cells[i]) * width
        for i in range(len(f.cells))
    )
    return total ** (1.0 / p)


def bf_sparse_op(
    family: SparseFamily, fs, p0: float, gamma: float
) -> StepFunction:
    """Per-cell sum over all members containing the cell, from scratch."""
    fs = list(fs)
    resolution = family.resolution
    n = 1 << resolution
    out = []
    for cell in range(n):
        terms = []
        for cube in family.cubes:
            a, b = cube.cell_span(resolution)
            if not a <= cell < b:
                continue
            prod = 1.0
            for f in fs:
                prod *= bf_average(f, cube, p0)
            terms.append(prod ** gamma)
        out.append(math.fsum(terms) ** (1.0 / gamma))
    return StepFunction(resolution, out)


def bf_a_p(w: StepFunction, p: float) -> float:
    pc = p / (p - 1.0)
    best = 0.0
    for cube in all_cubes(w.resolution):
        a, b = cube.cell_span(w.resolution)
        avg_w = math.fsum(float(w.cells[i]) for i in range(a, b)) / (b - a)
        avg_d = math.fsum(float(w.cells[i]) ** (1.0 - pc) for i in range(a, b)) / (b - a)
        best = max(best, avg_w * avg_d ** (p - 1.0))
    return best


def bf_two_weight_a_p(w: StepFunction, sigma: StepFunction, p: float) -> float:
    best = 0.0
    for cube in all_cubes(w.resolution):
        a, b = cube.cell_span(w.resolution)
        avg_w = math.fsum(float(w.cells[i]) for i in range(a, b)) / (b - a)
        avg_s = math.fsum(float(sigma.cells[i]) for i in range(a, b)) / (b - a)
        best = max(best, avg_w * avg_s ** (p - 1.0))
    return best


def bf_a_infty(w: StepFunction) -> float:
    """Fujii-Wilson constant with the dyadic maximal function spelled out."""
    resolution = w.resolution
    width = 0.5 ** resolution
    cubes = all_cubes(resolution)
    best = 0.0
    for top in cubes:
        a, b = top.cell_span(resolution)
        mass = math.fsum(float(w.cells[i]) * width for i in range(a, b))
        if mass <= 0.0:
            continue
        total_terms = []
        for cell in range(a, b):
            m_val = 0.0
            for cand in cubes:
                ca, cb = cand.cell_span(resolution)
                if not ca <= cell < cb:
                    continue
                # average of w 1_top over cand
                overlap_lo, overlap_hi = max(ca, a), min(cb, b)
                avg = math.fsum(
                    float(w.cells[i]) for i in range(overlap_lo, overlap_hi)
                ) / (cb - ca)
                m_val = max(m_val, avg)
            total_terms.append(m_val * width)
        best = max(best, math.fsum(total_terms) / mass)
    return best


def bf_a_vec_p(w: StepFunction, sigmas, exponents: ExponentTuple) -> float:
    sigmas = list(sigmas)
    best = 0.0
    for cube in all_cubes(w.resolution):
        a, b = cube.cell_span(w.resolution)
        value = math.fsum(float(w.cells[i]) for i in range(a, b)) / (b - a)
        for s, e in zip(sigmas, exponents.sigma_exponents):
            avg = math.fsum(float(s.cells[i]) for i in range(a, b)) / (b - a)
            value *= avg ** e
        best = max(best, value)
    return best


def bf_multi_maximal(fs, sigmas) -> StepFunction:
    fs = list(fs)
    sigmas = list(sigmas)
    resolution = fs[0].resolution
    n = 1 << resolution
    cubes = all_cubes(resolution)
    out = []
    for cell in range(n):
        best = 0.0
        for cube in cubes:
            a, b = cube.cell_span(resolution)
            if not a <= cell < b:
                continue
            prod = 1.0
            for f, s in zip(fs, sigmas):
                prod *= math.fsum(
                    float(f.cells[i]) * float(s.cells[i]) for i in range(a, b)
                ) / (b - a)
            best = max(best, prod)
        out.append(best)
    return StepFunction(resolution, out)

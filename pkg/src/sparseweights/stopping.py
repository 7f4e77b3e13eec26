"""Stopping-time machinery: level-set buckets and principal cubes.

Two decompositions drive all the norm estimates here:

* bucketing a sparse family by the size of the per-cube functional
  Psi(Q) = <w>_Q prod_i <sigma_i>_Q^e_i (the local version of the vector
  A_p constant), into generations 2**a < Psi <= 2**(a+1);

* principal cubes of a pair (f, sigma): iterated stopping cubes where the
  sigma-average of f more than doubles, giving a forest whose averages
  dominate and whose sigma-masses are summable.

Both pieces feed the fiberwise norm bound used to control the sparse
operator one bucket at a time.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dyadic import Cube, StepFunction, integral, lp_norm, weighted_average
from .operators import accumulate_indicators
from .sparse import SparseFamily, _family_children, _nearest_ancestors
from .weights import ExponentTuple


def bucket_index(psi: float) -> int:
    """The integer a with 2**a < psi <= 2**(a+1).

    Exact powers of two land in the lower bucket (psi = 2**t gives a = t-1).
    The log2 guess is corrected by exact comparisons, so no epsilon enters.
    """
    psi = float(psi)
    if not (math.isfinite(psi) and psi > 0):
        raise ValueError(f"bucket_index needs a finite positive value, got {psi}")
    a = math.ceil(math.log2(psi)) - 1
    while math.ldexp(1.0, a) >= psi:
        a -= 1
    while math.ldexp(1.0, a + 1) < psi:
        a += 1
    return a


@dataclass
class LevelSetDecomposition:
    """Buckets S_a = {Q in S : 2**a < Psi(Q) <= 2**(a+1)}, plus the cubes
    with Psi(Q) = 0 kept apart in `null_bucket`."""

    family: SparseFamily
    psi: dict[Cube, float]
    buckets: dict[int, tuple[Cube, ...]]
    null_bucket: tuple[Cube, ...]

    def window(self) -> tuple[int, int] | None:
        """Smallest and largest occupied bucket index, None if all null."""
        if not self.buckets:
            return None
        keys = sorted(self.buckets)
        return keys[0], keys[-1]

    def bucket_family(self, a: int) -> SparseFamily:
        """The bucket as a family of its own (subsets stay sparse)."""
        return self.family.subfamily(self.buckets[a])

    def all_bucket_cubes(self) -> list[tuple[int | None, tuple[Cube, ...]]]:
        """(index, cubes) pairs in increasing index order, null bucket last."""
        out: list[tuple[int | None, tuple[Cube, ...]]] = [
            (a, self.buckets[a]) for a in sorted(self.buckets)
        ]
        if self.null_bucket:
            out.append((None, self.null_bucket))
        return out


def level_sets(
    family: SparseFamily,
    w: StepFunction,
    sigmas: list[StepFunction] | tuple[StepFunction, ...],
    exponents: ExponentTuple,
) -> LevelSetDecomposition:
    """Bucket the family by the local vector-A_p functional Psi."""
    sigmas = list(sigmas)
    if len(sigmas) != exponents.m:
        raise ValueError(f"expected {exponents.m} companion weights, got {len(sigmas)}")
    resolution = family.resolution
    for g in [w] + sigmas:
        if g.resolution != resolution:
            raise ValueError("weights live at a different resolution than the family")
    w_sums = w.level_sums()
    s_sums = [s.level_sums() for s in sigmas]
    powers = exponents.sigma_exponents
    psi: dict[Cube, float] = {}
    buckets: dict[int, list[Cube]] = {}
    null_bucket: list[Cube] = []
    for cube in family.cubes:
        scale = math.ldexp(1.0, cube.level - resolution)
        value = float(w_sums[cube.level][cube.index]) * scale
        for table, e in zip(s_sums, powers):
            value *= (float(table[cube.level][cube.index]) * scale) ** e
        psi[cube] = value
        if value == 0.0:
            null_bucket.append(cube)
        else:
            buckets.setdefault(bucket_index(value), []).append(cube)
    ordered = {a: tuple(buckets[a]) for a in sorted(buckets)}
    return LevelSetDecomposition(family, psi, ordered, tuple(null_bucket))


class PrincipalForest:
    """Principal cubes of (f, sigma) over a base cube set.

    Generation zero holds the maximal cubes of the base; the children of a
    principal cube F are the maximal base cubes strictly inside F whose
    sigma-average of f exceeds twice that of F.  pi(Q) maps a base cube to
    the minimal principal cube containing it.
    """

    __slots__ = ("base", "generations", "parent", "averages", "_members")

    def __init__(
        self,
        base: tuple[Cube, ...],
        generations: tuple[tuple[Cube, ...], ...],
        parent: dict[Cube, Cube | None],
        averages: dict[Cube, float],
    ) -> None:
        self.base = base
        self.generations = generations
        self.parent = parent
        self.averages = averages
        self._members = frozenset(c for gen in generations for c in gen)

    def cubes(self) -> tuple[Cube, ...]:
        """All principal cubes in canonical order."""
        return tuple(sorted(self._members))

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, cube: Cube) -> bool:
        return cube in self._members

    def depth(self) -> int:
        return len(self.generations)

    def average(self, cube: Cube) -> float:
        """Stored sigma-average of f over a base cube."""
        return self.averages[cube]

    def pi(self, cube: Cube) -> Cube:
        """Minimal principal cube containing `cube` (possibly itself)."""
        for level in range(cube.level, -1, -1):
            cand = cube.ancestor(level)
            if cand in self._members:
                return cand
        raise ValueError(f"no principal cube contains {cube}")

    def to_text(self) -> str:
        return "".join(f"{c.level} {c.index}\n" for c in self.cubes())


def principal_cubes(
    base: Iterable[Cube] | SparseFamily,
    f: StepFunction,
    sigma: StepFunction,
) -> PrincipalForest:
    """Build the principal-cube forest of (f, sigma) over a cube set.

    Averages use the convention sigma(Q) = 0 -> average 0.  The forest is
    finite: once an average is positive, it doubles along any chain of
    descendants and f is bounded.
    """
    members = tuple(base.cubes) if isinstance(base, SparseFamily) else tuple(sorted(set(base)))
    if not members:
        raise ValueError("principal cubes need a nonempty base")
    if f.resolution != sigma.resolution:
        raise ValueError("f and sigma live at different resolutions")
    if members[-1].level > f.resolution:
        raise ValueError("base contains cubes finer than the function resolution")

    num_sums = (f * sigma).level_sums()
    den_sums = sigma.level_sums()

    def wavg(cube: Cube) -> float:
        den = float(den_sums[cube.level][cube.index])
        if den <= 0.0:
            return 0.0
        return float(num_sums[cube.level][cube.index]) / den

    averages = {cube: wavg(cube) for cube in members}
    tree_parent = _nearest_ancestors(list(members))
    tree_children = _family_children(tree_parent)

    roots = tuple(c for c in members if tree_parent[c] is None)
    parent: dict[Cube, Cube | None] = {c: None for c in roots}
    generations: list[tuple[Cube, ...]] = [roots]
    frontier = roots
    while frontier:
        next_gen: list[Cube] = []
        for head in frontier:
            threshold = 2.0 * averages[head]
            stack = deque(tree_children[head])
            while stack:
                cand = stack.popleft()
                if averages[cand] > threshold:
                    next_gen.append(cand)
                    parent[cand] = head
                else:
                    stack.extend(tree_children[cand])
        if not next_gen:
            break
        next_gen.sort()
        generations.append(tuple(next_gen))
        frontier = tuple(next_gen)
    return PrincipalForest(members, tuple(generations), parent, averages)


def carleson_embedding_check(
    forest: PrincipalForest,
    f: StepFunction,
    sigma: StepFunction,
    p: float,
) -> float:
    """Ratio  sum_F (<f>^sigma_F)^p sigma(F)  /  ||f||_{L^p(sigma)}^p
    over the principal cubes; the stopping construction keeps it <= 2 (p')^p.
    """
    p = float(p)
    if not p > 1:
        raise ValueError(f"carleson_embedding_check needs p > 1, got {p}")
    norm = lp_norm(f, sigma, p) ** p
    if norm <= 0.0:
        raise ValueError("f vanishes in L^p(sigma); the ratio is undefined")
    total = math.fsum(
        weighted_average(f, sigma, cube) ** p * integral(sigma, cube)
        for cube in forest.cubes()
    )
    return total / norm


@dataclass(frozen=True)
class LsBoundResult:
    """Worst fiber of a bucketed bilinear norm comparison: the measured
    norm `lhs`, the product bound `rhs`, their quotient `ratio`, and the
    number of nondegenerate fibers inspected."""

    lhs: float
    rhs: float
    ratio: float
    fibers: int


def ls_bound_check(
    bucket: Iterable[Cube],
    forest_f: PrincipalForest,
    forest_g: PrincipalForest,
    w: StepFunction,
    sigmas: list[StepFunction] | tuple[StepFunction, ...],
    exponents: ExponentTuple,
    a: int,
) -> LsBoundResult | None:
    """Fiberwise norm ratio for one bucket of a bilinear decomposition.

    The bucket's cubes are grouped by the pair (pi_f(Q), pi_g(Q)) of minimal
    principal cubes.  For each fiber the measured quantity is

        || sum_Q <sigma_1>_Q <sigma_2>_Q 1_Q ||_{L^p(w)}

    against 2**(a/p) (sum_Q sigma_1(Q))^{1/p_1} (sum_Q sigma_2(Q))^{1/p_2}.
    Returns the worst fiber as an LsBoundResult, or None when every fiber
    degenerates (both sides zero).
    """
    sigmas = list(sigmas)
    if exponents.m != 2 or len(sigmas) != 2:
        raise ValueError("ls_bound_check is specific to the bilinear case m=2")
    cubes = sorted(set(bucket))
    if not cubes:
        return None
    resolution = w.resolution
    for s in sigmas:
        if s.resolution != resolution:
            raise ValueError("weights live at different resolutions")
    s1_sums = sigmas[0].level_sums()
    s2_sums = sigmas[1].level_sums()

    fibers: dict[tuple[Cube, Cube], list[Cube]] = {}
    for cube in cubes:
        key = (forest_f.pi(cube), forest_g.pi(cube))
        fibers.setdefault(key, []).append(cube)

    p = exponents.p
    p1, p2 = exponents.ps
    worst: LsBoundResult | None = None
    checked = 0
    for key in sorted(fibers):
        fiber = fibers[key]
        coeff_by_level: dict[int, tuple[list[int], list[float]]] = {}
        mass1 = []
        mass2 = []
        for cube in fiber:
            scale = math.ldexp(1.0, cube.level - resolution)
            raw1 = float(s1_sums[cube.level][cube.index])
            raw2 = float(s2_sums[cube.level][cube.index])
            avg = (raw1 * scale) * (raw2 * scale)
            ks, cs = coeff_by_level.setdefault(cube.level, ([], []))
            ks.append(cube.index)
            cs.append(avg)
            mass1.append(math.ldexp(raw1, -resolution))
            mass2.append(math.ldexp(raw2, -resolution))
        arrays = {
            lev: (np.asarray(ks, dtype=np.int64), np.asarray(cs, dtype=np.float64))
            for lev, (ks, cs) in coeff_by_level.items()
        }
        cells = accumulate_indicators(arrays, resolution)
        lhs = lp_norm(StepFunction(resolution, cells), w, p)
        rhs = (
            2.0 ** (a / p)
            * math.fsum(mass1) ** (1.0 / p1)
            * math.fsum(mass2) ** (1.0 / p2)
        )
        if rhs <= 0.0:
            continue
        checked += 1
        ratio = lhs / rhs
        if worst is None or ratio > worst.ratio:
            worst = LsBoundResult(lhs=lhs, rhs=rhs, ratio=ratio, fibers=0)
    if worst is None:
        return None
    return LsBoundResult(worst.lhs, worst.rhs, worst.ratio, checked)

"""Half-sparse families of dyadic cubes.

A finite family S is (1/2)-sparse when, for every Q in S, the cubes of S
strictly contained in Q cover at most half of Q.  Equivalently the
exceptional sets E_Q = Q minus that union are pairwise disjoint with
|E_Q| >= |Q|/2.  Because every measure here is an integer multiple of
2**-MAX_RESOLUTION, all the sparsity arithmetic below is exact in floating
point and the verifier needs no tolerance.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .dyadic import MAX_RESOLUTION, Cube, StepFunction


@dataclass(frozen=True)
class SparsityReport:
    """Outcome of a sparsity check: the worst covered fraction and where."""

    is_sparse: bool
    worst_fraction: float
    worst_cube: Cube | None


def _nearest_ancestors(cubes: list[Cube]) -> dict[Cube, Cube | None]:
    """Map each cube to its minimal strict ancestor inside the family.

    `cubes` must be sorted and duplicate-free.  Cost O(n * max level): each
    cube walks up through its ancestor levels until it hits a family member.
    """
    present = set(cubes)
    parent: dict[Cube, Cube | None] = {}
    for cube in cubes:
        found = None
        for lev in range(cube.level - 1, -1, -1):
            cand = cube.ancestor(lev)
            if cand in present:
                found = cand
                break
        parent[cube] = found
    return parent


def _family_children(parent: dict[Cube, Cube | None]) -> dict[Cube, list[Cube]]:
    children: dict[Cube, list[Cube]] = {cube: [] for cube in parent}
    for cube, anc in parent.items():
        if anc is not None:
            children[anc].append(cube)
    for lst in children.values():
        lst.sort()
    return children


def verify_sparse(cubes: Iterable[Cube]) -> SparsityReport:
    """Check the covered-fraction condition for every cube of the family.

    The union of the strict subcubes of Q inside S is the disjoint union of
    the maximal ones, i.e. of the family children of Q, so its measure is a
    plain sum of children measures.  All quantities are exact dyadics.
    """
    members = sorted(set(cubes))
    if not members:
        return SparsityReport(True, 0.0, None)
    parent = _nearest_ancestors(members)
    children = _family_children(parent)
    worst = 0.0
    worst_cube: Cube | None = None
    for cube in members:
        covered = math.fsum(ch.measure for ch in children[cube])
        fraction = covered / cube.measure
        if fraction > worst:
            worst = fraction
            worst_cube = cube
    return SparsityReport(worst <= 0.5, worst, worst_cube)


class SparseFamily:
    """Immutable sorted family of dyadic cubes, checked for half-sparsity.

    `resolution` is the grid the family lives on; every member must have
    level <= resolution.  Construction with require_sparse=True (the
    default) raises on a sparsity violation, reporting the offending cube.
    """

    __slots__ = ("resolution", "cubes", "_parent", "_children", "_cube_set")

    def __init__(
        self,
        cubes: Iterable[Cube],
        resolution: int,
        *,
        require_sparse: bool = True,
    ) -> None:
        if not 0 <= resolution <= MAX_RESOLUTION:
            raise ValueError(f"resolution must lie in [0, {MAX_RESOLUTION}]")
        members = sorted(set(cubes))
        if not members:
            raise ValueError("a sparse family must contain at least one cube")
        if members[-1].level > resolution:
            raise ValueError(
                f"family contains a cube of level {members[-1].level} "
                f"finer than resolution {resolution}"
            )
        self.resolution = resolution
        self.cubes: tuple[Cube, ...] = tuple(members)
        self._cube_set = frozenset(members)
        self._parent = _nearest_ancestors(members)
        self._children = _family_children(self._parent)
        if require_sparse:
            report = self.sparsity_report()
            if not report.is_sparse:
                raise ValueError(
                    f"family is not 1/2-sparse: cube {report.worst_cube} has "
                    f"covered fraction {report.worst_fraction}"
                )

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self) -> Iterator[Cube]:
        return iter(self.cubes)

    def __contains__(self, cube: Cube) -> bool:
        return cube in self._cube_set

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseFamily)
            and self.resolution == other.resolution
            and self.cubes == other.cubes
        )

    def __repr__(self) -> str:
        return f"SparseFamily({len(self.cubes)} cubes, resolution={self.resolution})"

    def family_parent(self, cube: Cube) -> Cube | None:
        """Minimal strict ancestor of `cube` within the family, if any."""
        return self._parent[cube]

    def family_children(self, cube: Cube) -> tuple[Cube, ...]:
        """Maximal members strictly contained in `cube`."""
        return tuple(self._children[cube])

    def maximal_cubes(self) -> tuple[Cube, ...]:
        """Members not strictly contained in any other member."""
        return tuple(c for c in self.cubes if self._parent[c] is None)

    def covered_measure(self, cube: Cube) -> float:
        """Measure of the union of the strict subcubes of `cube` in the family.

        The maximal such subcubes are disjoint, so the union measure is their
        plain (exact) sum.
        """
        if cube not in self._cube_set:
            raise ValueError(f"cube {cube} is not a member of the family")
        return math.fsum(ch.measure for ch in self._children[cube])

    def sparsity_report(self) -> SparsityReport:
        worst = 0.0
        worst_cube: Cube | None = None
        for cube in self.cubes:
            fraction = self.covered_measure(cube) / cube.measure
            if fraction > worst:
                worst = fraction
                worst_cube = cube
        return SparsityReport(worst <= 0.5, worst, worst_cube)

    def subfamily(self, cubes: Iterable[Cube]) -> "SparseFamily":
        """Restriction to a subset of members; sparsity is hereditary.

        Dropping cubes only shrinks each union of strict subcubes, so the
        covered fractions cannot increase and no re-check is needed.
        """
        sel = sorted(set(cubes))
        for cube in sel:
            if cube not in self._cube_set:
                raise ValueError(f"cube {cube} is not a member of the family")
        return SparseFamily(sel, self.resolution, require_sparse=False)

    def exceptional_sets(self) -> dict[Cube, float]:
        """Measure of E_Q = Q minus the union of strict subcubes, per member."""
        return {
            cube: cube.measure - self.covered_measure(cube) for cube in self.cubes
        }

    def cell_owner(self) -> np.ndarray:
        """For each resolution cell, the member index owning it via E_Q.

        A cell belongs to E_Q exactly when Q is the deepest member containing
        it, so painting spans in coarse-to-fine order leaves the owner id in
        each cell.  Cells outside every member get -1.
        """
        owner = np.full(1 << self.resolution, -1, dtype=np.int64)
        for i, cube in enumerate(self.cubes):
            a, b = cube.cell_span(self.resolution)
            owner[a:b] = i
        return owner

    def to_text(self) -> str:
        """One member per line as 'level index', sorted, newline-terminated."""
        return "".join(f"{c.level} {c.index}\n" for c in self.cubes)

    @classmethod
    def from_text(cls, text: str, resolution: int) -> "SparseFamily":
        """Parse the to_text format; blank lines and '#' comments are skipped."""
        cubes = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'level index', got {raw!r}")
            try:
                level, index = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: non-integer cube coordinates") from exc
            cubes.append(Cube(level, index))
        return cls(cubes, resolution)


def carleson_sum(family: SparseFamily, sigma: StepFunction, top: Cube) -> float:
    """Sum of sigma(Q) over family members Q contained in `top`.

    Each sigma(Q) is a pairwise block sum; the outer sum over members uses
    compensated summation so the result is the correctly rounded total.
    """
    if sigma.resolution != family.resolution:
        raise ValueError("sigma lives at a different resolution than the family")
    sums = sigma.level_sums()
    terms = [
        math.ldexp(float(sums[cube.level][cube.index]), -family.resolution)
        for cube in family.cubes
        if top.contains(cube)
    ]
    return math.fsum(terms)


@dataclass(frozen=True)
class BranchingParams:
    """Knobs for the random family generator.

    Children of a cube Q are drawn at level Q.level + delta with delta
    uniform in [delta_min, delta_max] (clamped so children stay within the
    resolution).  At most 2**(delta-1) children are allowed, which caps the
    covered fraction of Q at one half, so the output is sparse by
    construction.  max_children further restricts that budget and
    max_cubes bounds the family size.
    """

    delta_min: int = 1
    delta_max: int = 3
    min_children: int = 0
    max_children: int | None = None
    max_cubes: int = 512

    def __post_init__(self) -> None:
        if self.delta_min < 1:
            raise ValueError("delta_min must be >= 1")
        if self.delta_max < self.delta_min:
            raise ValueError("delta_max must be >= delta_min")
        if self.min_children < 0:
            raise ValueError("min_children must be >= 0")
        if self.max_children is not None and self.max_children < 0:
            raise ValueError("max_children must be >= 0 when given")
        if self.max_cubes < 1:
            raise ValueError("max_cubes must be >= 1")


def random_sparse(
    seed: int,
    resolution: int,
    branching: BranchingParams | None = None,
) -> SparseFamily:
    """Seeded random half-sparse family containing the root cube.

    Breadth-first from the root: each dequeued cube picks a level gap, a
    child count within the half budget, and distinct child positions.  The
    draw order is fixed, so the family is a pure function of the seed.
    """
    params = branching or BranchingParams()
    rng = np.random.default_rng(seed)
    cubes: list[Cube] = [Cube.root()]
    queue: deque[Cube] = deque(cubes)
    while queue and len(cubes) < params.max_cubes:
        cube = queue.popleft()
        room = resolution - cube.level
        if room < params.delta_min:
            continue
        delta = int(rng.integers(params.delta_min, min(params.delta_max, room) + 1))
        budget = 1 << (delta - 1)
        hi = budget if params.max_children is None else min(params.max_children, budget)
        lo = min(params.min_children, hi)
        count = int(rng.integers(lo, hi + 1))
        count = min(count, params.max_cubes - len(cubes))
        if count <= 0:
            continue
        offsets = np.sort(rng.choice(1 << delta, size=count, replace=False))
        for off in offsets:
            child = Cube(cube.level + delta, (cube.index << delta) + int(off))
            cubes.append(child)
            queue.append(child)
    return SparseFamily(cubes, resolution, require_sparse=False)

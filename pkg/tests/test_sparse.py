"""Half-sparse families: verification, structure queries, serialization."""

import math

import numpy as np
import pytest

from sparseweights.dyadic import Cube, StepFunction, integral, measure
from sparseweights.sparse import (
    BranchingParams,
    SparseFamily,
    carleson_sum,
    random_sparse,
    verify_sparse,
)
from sparseweights.weights import random_weight


def chain_family(depth: int) -> SparseFamily:
    # one child per level covers exactly half the parent: fraction 1/2 is legal
    cubes = [Cube(level, 0) for level in range(depth + 1)]
    return SparseFamily(cubes, depth)


def test_verify_sparse_accepts_boundary_chain():
    report = verify_sparse(chain_family(6).cubes)
    assert report.is_sparse
    assert report.worst_fraction == 0.5  # exact dyadic arithmetic, no tolerance
    assert report.worst_cube is not None


def test_verify_sparse_flags_violation():
    root = Cube.root()
    report = verify_sparse([root, *root.children()])
    assert not report.is_sparse
    assert report.worst_fraction == 1.0
    assert report.worst_cube == root


def test_verify_sparse_counts_nearest_ancestors_only():
    # the two level-3 cubes sit inside Cube(1,0), so they charge its budget
    # and not the root's: both fractions are exactly 1/2
    cubes = [Cube(0, 0), Cube(1, 0), Cube(3, 0), Cube(3, 2)]
    report = verify_sparse(cubes)
    assert report.is_sparse
    assert report.worst_fraction == 0.5
    # a right-half cube has no intermediate member and charges the root
    report = verify_sparse(cubes + [Cube(3, 4)])
    assert not report.is_sparse
    assert report.worst_cube == Cube.root()
    assert report.worst_fraction == 0.625


def test_family_requires_sparsity_by_default():
    root = Cube.root()
    with pytest.raises(ValueError):
        SparseFamily([root, *root.children()], 3)
    loose = SparseFamily([root, *root.children()], 3, require_sparse=False)
    assert not loose.sparsity_report().is_sparse


def test_family_relations_on_handcrafted_example():
    fam = SparseFamily([Cube(0, 0), Cube(2, 0), Cube(2, 3), Cube(3, 1)], 4)
    assert fam.maximal_cubes() == (Cube(0, 0),)
    assert fam.family_parent(Cube(0, 0)) is None
    assert fam.family_parent(Cube(2, 0)) == Cube(0, 0)
    assert fam.family_parent(Cube(3, 1)) == Cube(2, 0)
    assert fam.family_children(Cube(0, 0)) == (Cube(2, 0), Cube(2, 3))
    assert fam.family_children(Cube(2, 0)) == (Cube(3, 1),)
    assert fam.covered_measure(Cube(0, 0)) == 0.5
    assert fam.covered_measure(Cube(2, 0)) == 0.125
    assert fam.covered_measure(Cube(3, 1)) == 0.0


def test_family_dedupes_and_sorts():
    fam = SparseFamily([Cube(1, 1), Cube(0, 0), Cube(1, 1)], 3)
    assert fam.cubes == (Cube(0, 0), Cube(1, 1))
    assert len(fam) == 2


def test_exceptional_sets_partition_members():
    rng = np.random.default_rng(201)
    for _ in range(20):
        fam = random_sparse(int(rng.integers(2**31)), 7)
        exc = fam.exceptional_sets()
        assert set(exc) == set(fam.cubes)
        for cube in fam.cubes:
            children = fam.family_children(cube)
            expected = measure(cube) - math.fsum(measure(c) for c in children)
            assert math.isclose(exc[cube], expected, rel_tol=1e-14, abs_tol=1e-18)
            # half-sparseness is exactly the lower bound on the leftover part
            assert exc[cube] >= measure(cube) / 2.0


def test_cell_owner_is_deepest_member():
    rng = np.random.default_rng(202)
    for _ in range(20):
        fam = random_sparse(int(rng.integers(2**31)), 6)
        owner = fam.cell_owner()
        for cell in range(1 << 6):
            containing = [
                i
                for i, cube in enumerate(fam.cubes)
                if cube.cell_span(6)[0] <= cell < cube.cell_span(6)[1]
            ]
            expected = max(containing, key=lambda i: fam.cubes[i].level, default=-1)
            assert owner[cell] == expected


def test_subfamily_stays_sparse():
    rng = np.random.default_rng(203)
    for _ in range(20):
        fam = random_sparse(int(rng.integers(2**31)), 7)
        keep = [fam.cubes[0]] + [c for c in fam.cubes[1:] if rng.random() < 0.6]
        sub = fam.subfamily(keep)
        assert sub.sparsity_report().is_sparse
        assert set(sub.cubes) == set(keep)
    members = set(fam.cubes)
    outsider = next(Cube(7, i) for i in range(1 << 7) if Cube(7, i) not in members)
    with pytest.raises(ValueError):
        fam.subfamily([outsider])


def test_serialization_roundtrip():
    rng = np.random.default_rng(204)
    for _ in range(10):
        fam = random_sparse(int(rng.integers(2**31)), 8)
        text = fam.to_text()
        back = SparseFamily.from_text(text, 8)
        assert back.cubes == fam.cubes
        assert back.to_text() == text
    # '#' comments and blank lines are ignored
    parsed = SparseFamily.from_text("# heading\n\n0 0  # root\n2 1\n", 4)
    assert parsed.cubes == (Cube(0, 0), Cube(2, 1))


def test_serialization_rejects_malformed_lines():
    for text in ("0\n", "a b\n", "0 0 0\n", "1 2\n"):
        with pytest.raises(ValueError):
            SparseFamily.from_text(text, 4)


def test_random_sparse_deterministic():
    a = random_sparse(99, 8)
    b = random_sparse(99, 8)
    assert a.cubes == b.cubes
    assert random_sparse(100, 8).cubes != a.cubes


def test_random_sparse_always_verifies():
    rng = np.random.default_rng(205)
    for _ in range(50):
        seed = int(rng.integers(2**31))
        resolution = int(rng.integers(2, 10))
        fam = random_sparse(seed, resolution)
        assert fam.sparsity_report().is_sparse
        assert Cube.root() in fam.cubes
        assert all(c.level <= resolution for c in fam.cubes)


def test_random_sparse_honors_cap_and_params():
    params = BranchingParams(max_cubes=5)
    fam = random_sparse(7, 10, params)
    assert len(fam) <= 5
    wide = random_sparse(7, 10, BranchingParams(delta_min=2, delta_max=2))
    assert all(
        c.level % 2 == 0 for c in wide.cubes
    )  # every generation jumps exactly two levels from the root
    with pytest.raises(ValueError):
        BranchingParams(delta_min=0)
    with pytest.raises(ValueError):
        BranchingParams(delta_min=3, delta_max=2)
    with pytest.raises(ValueError):
        BranchingParams(max_cubes=0)


def test_carleson_sum_matches_oracle():
    # frozen from the plain-loop oracle below at seeds (7, 41)
    fam = random_sparse(7, 4)
    sigma = random_weight(41, 4)
    assert math.isclose(
        carleson_sum(fam, sigma, Cube.root()), 3.1306587250408127, rel_tol=1e-12
    )
    rng = np.random.default_rng(206)
    for _ in range(20):
        fam = random_sparse(int(rng.integers(2**31)), 6)
        sigma = random_weight(int(rng.integers(2**31)), 6)
        for top in fam.cubes:
            oracle = math.fsum(
                integral(sigma, q) for q in fam.cubes if top.contains(q)
            )
            assert math.isclose(
                carleson_sum(fam, sigma, top), oracle, rel_tol=1e-12, abs_tol=1e-300
            )


def test_carleson_sum_requires_matching_resolution():
    fam = random_sparse(7, 4)
    with pytest.raises(ValueError):
        carleson_sum(fam, random_weight(1, 5), Cube.root())

"""Dyadic grid primitives: cube geometry, step functions, exact integrals."""

import math

import numpy as np
import pytest

from sparseweights.bruteforce import bf_average, bf_integral, bf_lp_norm
from sparseweights.dyadic import (
    DEFAULT_RESOLUTION,
    MAX_RESOLUTION,
    Cube,
    StepFunction,
    all_cubes,
    average,
    integral,
    level_sums,
    lp_norm,
    measure,
    weighted_average,
)


def test_cube_root_children_parent():
    root = Cube.root()
    assert (root.level, root.index) == (0, 0)
    left, right = root.children()
    assert (left.level, left.index) == (1, 0)
    assert (right.level, right.index) == (1, 1)
    assert left.parent() == root
    assert right.parent() == root
    with pytest.raises(ValueError):
        root.parent()


def test_cube_measure_exact():
    assert measure(Cube.root()) == 1.0
    for level in range(12):
        cube = Cube(level, (1 << level) - 1)
        assert measure(cube) == math.ldexp(1.0, -level)


def test_cube_ancestor_and_containment():
    cube = Cube(5, 19)
    chain = [cube.ancestor(level) for level in range(6)]
    # ancestor indices are bit-shifted prefixes of the index
    assert [c.index for c in chain] == [19 >> (5 - l) for l in range(6)]
    for anc in chain:
        assert anc.contains(cube)
    assert not cube.contains(Cube.root())
    assert cube.contains(cube)
    sibling = Cube(5, 18)
    assert not sibling.contains(cube)
    with pytest.raises(ValueError):
        cube.ancestor(6)


def test_cube_cell_span():
    cube = Cube(2, 3)
    assert cube.cell_span(5) == (24, 32)
    assert Cube.root().cell_span(4) == (0, 16)
    left, right = cube.children()
    a, b = cube.cell_span(5)
    la, lb = left.cell_span(5)
    ra, rb = right.cell_span(5)
    assert (la, rb) == (a, b) and lb == ra  # children tile the parent
    with pytest.raises(ValueError):
        cube.cell_span(1)  # finer than the grid


def test_cube_ordering_and_str():
    cubes = [Cube(2, 1), Cube(1, 1), Cube(2, 0), Cube(0, 0)]
    assert sorted(cubes) == [Cube(0, 0), Cube(1, 1), Cube(2, 0), Cube(2, 1)]
    assert str(Cube(3, 5)) == "3 5"


def test_cube_validation():
    with pytest.raises(ValueError):
        Cube(-1, 0)
    with pytest.raises(ValueError):
        Cube(2, 4)  # index out of range at level 2
    with pytest.raises(ValueError):
        Cube(MAX_RESOLUTION + 1, 0)


def test_all_cubes_count_and_order():
    for resolution in range(7):
        cubes = all_cubes(resolution)
        assert len(cubes) == (1 << (resolution + 1)) - 1
        assert cubes == sorted(cubes)
        assert cubes[0] == Cube.root()


def test_default_resolution_in_range():
    assert 0 < DEFAULT_RESOLUTION <= MAX_RESOLUTION


def test_step_function_validation():
    with pytest.raises(ValueError):
        StepFunction(2, [1.0, 2.0, 3.0])  # wrong cell count
    with pytest.raises(ValueError):
        StepFunction(1, [1.0, -0.5])
    with pytest.raises(ValueError):
        StepFunction(1, [1.0, math.nan])
    with pytest.raises(ValueError):
        StepFunction(1, [1.0, math.inf])


def test_step_function_cells_read_only_and_copied():
    source = np.array([1.0, 2.0, 3.0, 4.0])
    f = StepFunction(2, source)
    source[0] = 99.0
    assert f.cells[0] == 1.0  # constructor must copy
    with pytest.raises(ValueError):
        f.cells[0] = 5.0


def test_step_function_constructors_and_algebra():
    c = StepFunction.constant(2.5, 3)
    assert integral(c) == 2.5
    f = StepFunction(2, [1.0, 4.0, 9.0, 16.0])
    assert np.array_equal(f.power(0.5).cells, [1.0, 2.0, 3.0, 4.0])
    g = f * f
    assert np.array_equal(g.cells, [1.0, 16.0, 81.0, 256.0])
    with pytest.raises(ValueError):
        f * StepFunction.constant(1.0, 3)  # resolution mismatch


def test_level_sums_additivity_is_exact():
    # each table entry is one float add of its two children, so the halving
    # recurrence holds exactly in floating point
    rng = np.random.default_rng(101)
    for _ in range(20):
        resolution = int(rng.integers(1, 9))
        f = StepFunction(resolution, rng.uniform(0.0, 3.0, 1 << resolution))
        table = f.level_sums()
        for level in range(resolution):
            row, finer = table[level], table[level + 1]
            assert np.array_equal(row, finer[0::2] + finer[1::2])


def test_integral_additivity():
    rng = np.random.default_rng(108)
    for _ in range(20):
        resolution = int(rng.integers(1, 9))
        f = StepFunction(resolution, rng.uniform(0.0, 3.0, 1 << resolution))
        for cube in all_cubes(resolution - 1):
            left, right = cube.children()
            total = integral(f, left) + integral(f, right)
            assert math.isclose(integral(f, cube), total, rel_tol=1e-13, abs_tol=1e-300)


def test_integral_matches_bruteforce():
    rng = np.random.default_rng(102)
    for _ in range(25):
        resolution = int(rng.integers(0, 8))
        f = StepFunction(resolution, rng.uniform(0.0, 5.0, 1 << resolution))
        cubes = all_cubes(resolution)
        cube = cubes[int(rng.integers(len(cubes)))]
        assert math.isclose(
            integral(f, cube), bf_integral(f, cube), rel_tol=1e-12, abs_tol=1e-300
        )


def test_level_sums_table_shape_and_root():
    rng = np.random.default_rng(103)
    values = rng.uniform(0.0, 1.0, 64)
    table = level_sums(values)
    assert len(table) == 7
    for level, row in enumerate(table):
        assert row.shape == (1 << level,)
    assert np.array_equal(table[6], values)
    assert math.isclose(float(table[0][0]), math.fsum(values), rel_tol=1e-13)


def test_average_powers():
    f = StepFunction(1, [1.0, 3.0])
    assert average(f) == 2.0
    # p0 = 2 averages the square first: ((1 + 9) / 2) ** (1/2)
    assert math.isclose(average(f, None, 2.0), math.sqrt(5.0), rel_tol=1e-15)
    rng = np.random.default_rng(104)
    for _ in range(25):
        resolution = int(rng.integers(0, 7))
        f = StepFunction(resolution, rng.uniform(0.0, 4.0, 1 << resolution))
        cubes = all_cubes(resolution)
        cube = cubes[int(rng.integers(len(cubes)))]
        p0 = float(rng.uniform(1.0, 4.0))
        assert math.isclose(
            average(f, cube, p0), bf_average(f, cube, p0), rel_tol=1e-12
        )
    with pytest.raises(ValueError):
        average(f, None, 0.5)


def test_weighted_average_zero_mass_and_oracle():
    f = StepFunction(2, [1.0, 2.0, 3.0, 4.0])
    dead = StepFunction(2, [0.0, 0.0, 1.0, 1.0])
    assert weighted_average(f, dead, Cube(1, 0)) == 0.0  # sigma(Q) = 0 gives 0
    rng = np.random.default_rng(105)
    for _ in range(25):
        resolution = int(rng.integers(0, 7))
        n = 1 << resolution
        f = StepFunction(resolution, rng.uniform(0.0, 4.0, n))
        s = StepFunction(resolution, rng.uniform(0.1, 4.0, n))
        cubes = all_cubes(resolution)
        cube = cubes[int(rng.integers(len(cubes)))]
        a, b = cube.cell_span(resolution)
        num = math.fsum(float(f.cells[i]) * float(s.cells[i]) for i in range(a, b))
        den = math.fsum(float(s.cells[i]) for i in range(a, b))
        assert math.isclose(weighted_average(f, s, cube), num / den, rel_tol=1e-12)


def test_lp_norm_against_bruteforce():
    rng = np.random.default_rng(106)
    for _ in range(25):
        resolution = int(rng.integers(0, 7))
        n = 1 << resolution
        f = StepFunction(resolution, rng.uniform(0.0, 4.0, n))
        w = StepFunction(resolution, rng.uniform(0.0, 4.0, n))
        p = float(rng.uniform(0.5, 6.0))
        assert math.isclose(
            lp_norm(f, w, p), bf_lp_norm(f, w, p), rel_tol=1e-12, abs_tol=1e-300
        )
    with pytest.raises(ValueError):
        lp_norm(f, w, 0.0)


def test_lp_norm_monotone_in_p_for_probability_weight():
    # Lebesgue measure on [0,1) is a probability measure, so the L^p norm
    # is nondecreasing in p
    rng = np.random.default_rng(107)
    one = StepFunction.constant(1.0, 6)
    for _ in range(20):
        f = StepFunction(6, rng.uniform(0.0, 5.0, 64))
        ps = sorted(rng.uniform(0.5, 8.0, 4))
        norms = [lp_norm(f, one, p) for p in ps]
        for lo, hi in zip(norms, norms[1:]):
            assert lo <= hi * (1.0 + 1e-12)

"""Built-in correctness battery behind the `selftest` subcommand.

Each check is a named function asserting a handful of facts: exact small
examples worked out by hand, frozen values produced once by the brute-force
oracles in bruteforce.py, and seeded randomized invariants.  The battery is
deterministic and fast (a few seconds); it is the same set of checks the
acceptance tests replay through the CLI.

Checks call into the library through module namespaces (W.a_infty, not a
bound import), so a monkeypatched module is exercised faithfully.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bruteforce as BF
from . import calibration
from . import dyadic as D
from . import operators as O
from . import sparse as S
from . import stopping as ST
from . import verify as V
from . import weights as W
from .config import (
    CarlesonSuite,
    ExperimentConfig,
    LsSuite,
    MaximalSuite,
    PrincipalCarlesonSuite,
    RescaleSuite,
    SearchConfig,
    TheoremSuite,
)
from .dyadic import Cube, StepFunction
from .weights import ExponentTuple

#: a_p_constant(power_weight(1, resolution=8), p=2), frozen from the
#: brute-force oracle bf_a_p (direct per-cube enumeration with fsum).
A_P_POWER1_L8 = 3.7543440531410828


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ""


def _close(a: float, b: float, tol: float = 1e-12) -> bool:
    scale = max(abs(a), abs(b), 1.0)
    return abs(a - b) <= tol * scale


def _raises(fn: Callable[[], object]) -> bool:
    try:
        fn()
    except (ValueError, TypeError):
        return True
    return False


# ---------------------------------------------------------------------------
# dyadic grid


def check_cube_geometry() -> None:
    q = Cube(3, 5)
    assert q.measure == 0.125 and q.left == 0.625 and q.right == 0.75
    assert q.parent() == Cube(2, 2) and q.ancestor(0) == Cube.root()
    assert Cube(2, 1).cell_span(4) == (4, 8)
    assert Cube(1, 0).contains(Cube(3, 3)) and not Cube(1, 1).contains(Cube(3, 3))
    left, right = Cube(1, 1).children()
    assert (left, right) == (Cube(2, 2), Cube(2, 3))
    assert _raises(lambda: Cube(2, 4)) and _raises(lambda: Cube(-1, 0))


def check_step_function_integrals() -> None:
    f = StepFunction.from_cells([1.0, 3.0])
    assert D.integral(f) == 2.0
    assert D.integral(f, Cube(1, 0)) == 0.5
    assert D.average(f, Cube(1, 1)) == 3.0
    assert _close(D.average(f, None, 2.0), math.sqrt(5.0))
    w = StepFunction.from_cells([2.0, 0.0])
    assert D.lp_norm(f, w, 2.0) == 1.0
    assert _raises(lambda: StepFunction.from_cells([1.0, -1.0]))


def check_weighted_average_zero_mass() -> None:
    f = StepFunction.from_cells([7.0, 2.0])
    sigma = StepFunction.from_cells([0.0, 1.0])
    assert D.weighted_average(f, sigma, Cube(1, 0)) == 0.0
    assert D.weighted_average(f, sigma, Cube.root()) == 2.0


# ---------------------------------------------------------------------------
# sparse families


def check_sparsity_verifier() -> None:
    chain = [Cube(j, 0) for j in range(4)]
    assert S.verify_sparse(chain).is_sparse
    crowded = [Cube(0, 0), Cube(1, 0), Cube(1, 1)]
    report = S.verify_sparse(crowded)
    assert not report.is_sparse and report.worst_cube == Cube.root()
    assert report.worst_fraction == 1.0
    assert _raises(lambda: S.SparseFamily(crowded, 3))


def check_exceptional_sets() -> None:
    chain = [Cube(j, 0) for j in range(4)]
    fam = S.SparseFamily(chain, 3)
    exc = fam.exceptional_sets()
    assert exc[Cube(0, 0)] == 0.5 and exc[Cube(1, 0)] == 0.25
    assert exc[Cube(2, 0)] == 0.125 and exc[Cube(3, 0)] == 0.125
    owner = fam.cell_owner()
    assert list(owner) == [3, 2, 1, 1, 0, 0, 0, 0]
    assert math.fsum(exc.values()) == 1.0


def check_family_serialization() -> None:
    fam = S.random_sparse(7, 6)
    text = fam.to_text()
    again = S.SparseFamily.from_text(text, 6)
    assert again == fam and again.to_text() == text
    lines = text.strip().splitlines()
    assert lines == sorted(lines, key=lambda s: tuple(map(int, s.split())))
    assert _raises(lambda: S.SparseFamily.from_text("0 0\nbogus\n", 6))


def check_random_sparse_postconditions() -> None:
    for seed in range(20):
        fam = S.random_sparse(seed, 8)
        assert Cube.root() in fam
        assert fam.sparsity_report().is_sparse
        assert len(fam) <= S.BranchingParams().max_cubes
    assert S.random_sparse(5, 8) == S.random_sparse(5, 8)
    forced_root = S.random_sparse(3, 8, S.BranchingParams(max_children=0))
    assert len(forced_root) == 1


def check_carleson_sum_chain() -> None:
    k = 5
    fam = S.SparseFamily([Cube(j, 0) for j in range(k + 1)], k)
    ones = StepFunction.constant(1.0, k)
    assert S.carleson_sum(fam, ones, Cube.root()) == 2.0 - 0.5**k
    fam2 = S.SparseFamily([Cube(0, 0), Cube(1, 0)], 1)
    sigma = StepFunction.from_cells([1.0, 3.0])
    assert S.carleson_sum(fam2, sigma, Cube.root()) == 2.5


# ---------------------------------------------------------------------------
# weights and characteristic constants


def check_a_p_basics() -> None:
    ones = StepFunction.constant(1.0, 3)
    assert _close(W.a_p_constant(ones, 2.0), 1.0)
    w = W.power_weight(1.0, 4)
    assert _close(W.a_p_constant(w, 2.0), BF.bf_a_p(w, 2.0))
    with_zero = StepFunction.from_cells([0.0, 1.0])
    assert _raises(lambda: W.a_p_constant(with_zero, 2.0))
    assert _raises(lambda: W.a_p_constant(ones, 1.0))


def check_a_p_frozen_power_law() -> None:
    w = W.power_weight(1.0, 8)
    assert _close(W.a_p_constant(w, 2.0), A_P_POWER1_L8)


def check_power_weight_cells() -> None:
    w = W.power_weight(1.0, 1)
    assert _close(w.cells[0], 0.25) and _close(w.cells[1], 0.75)
    v = W.power_weight(-0.5, 1)
    assert _close(v.cells[0], 2.0 * math.sqrt(2.0))
    assert _close(v.cells[1], 4.0 - 2.0 * math.sqrt(2.0))
    assert _close(D.integral(W.power_weight(0.7, 6)), 1.0 / 1.7)
    assert _raises(lambda: W.power_weight(-1.0, 3))


def check_a_infty_examples() -> None:
    w = StepFunction.from_cells([1.0, 0.0])
    assert _close(W.a_infty(w), 1.5)
    v = StepFunction.from_cells([1.0, 3.0])
    assert _close(W.a_infty(v), 1.25)
    detail = W.a_infty_detail(v)
    assert detail.cube == Cube.root()
    for seed in range(10):
        u = W.random_weight(seed, 6)
        assert W.a_infty(u) >= 1.0
    small = W.random_weight(42, 3)
    assert _close(W.a_infty(small), BF.bf_a_infty(small))


def check_a_vec_p_example() -> None:
    w = StepFunction.from_cells([1.0, 3.0])
    ones = StepFunction.constant(1.0, 1)
    exps = ExponentTuple((2.0, 2.0), 1.0, 1.0)
    assert _close(W.a_vec_p(w, [ones, ones], exps), 3.0)
    # one-slot reduction agrees with the independent two-weight path
    ww = W.random_weight(11, 5)
    ss = W.random_weight(12, 5)
    one_slot = ExponentTuple((2.5,), 1.0, 1.0)
    assert _close(W.a_vec_p(ww, [ss], one_slot), W.two_weight_a_p(ww, ss, 2.5))
    assert _close(W.two_weight_a_p(ww, ss, 2.5), BF.bf_two_weight_a_p(ww, ss, 2.5))


def check_dual_weights() -> None:
    sigma = StepFunction.from_cells([4.0, 1.0])
    exps = ExponentTuple((2.0, 2.0), 1.0, 1.0)
    duals, joint = W.dual_weights([sigma, sigma], exps)
    assert np.allclose(duals[0].cells, [0.25, 1.0])
    assert np.allclose(joint.cells, [0.25, 1.0])
    with_zero = StepFunction.from_cells([0.0, 1.0])
    assert _raises(lambda: W.dual_weights([with_zero, sigma], exps))


def check_exponent_tuple() -> None:
    exps = ExponentTuple((4.0, 4.0), 1.0, 1.0)
    assert _close(exps.p, 2.0) and exps.m == 2
    assert _close(exps.q, 2.0) and _close(exps.q_conjugate, 2.0)
    assert exps.sigma_exponents == (1.5, 1.5)
    assert ExponentTuple((2.0, 2.0), 1.0, 1.5).regime() == "p<=gamma"
    assert ExponentTuple((6.0, 1.5), 1.0, 0.75).regime() == "p1-max"
    assert ExponentTuple((1.5, 6.0), 1.0, 0.75).regime() == "p2-max"
    assert ExponentTuple((1.25, 1.25), 1.0, 0.5).regime() == "qprime-max"
    assert not ExponentTuple((1.2, 1.2, 1.2), 1.0, 0.5).theorem_applicable
    assert _raises(lambda: ExponentTuple((1.0,), 1.0, 1.0))
    assert _raises(lambda: ExponentTuple((2.0,), 1.0, 0.0))


# ---------------------------------------------------------------------------
# operators


def check_sparse_op_small() -> None:
    fam = S.SparseFamily([Cube.root()], 1)
    f = StepFunction.from_cells([1.0, 3.0])
    spec = O.SparseOperatorSpec(fam, 1.0, 2.0, 1)
    assert np.allclose(O.sparse_op(spec, [f]).cells, [2.0, 2.0])
    g = StepFunction.from_cells([2.0, 2.0])
    spec2 = O.SparseOperatorSpec(fam, 1.0, 1.0, 2)
    assert np.allclose(O.sparse_op(spec2, [f, g]).cells, [4.0, 4.0])


def check_sparse_op_vs_bruteforce() -> None:
    fam = S.random_sparse(3, 4)
    f1 = W.random_weight(21, 4)
    f2 = W.random_weight(22, 4)
    fast = O.sparse_op(O.SparseOperatorSpec(fam, 1.5, 0.75, 2), [f1, f2])
    slow = BF.bf_sparse_op(fam, [f1, f2], 1.5, 0.75)
    assert float(np.max(np.abs(fast.cells - slow.cells) / slow.cells)) < 1e-12


def check_rescale_identity() -> None:
    for seed, (p0, gamma) in enumerate([(2.0, 1.0), (3.0, 4.0), (1.5, 2.0)]):
        fam = S.random_sparse(seed, 8)
        fs = [W.random_weight(100 + seed, 8), W.random_weight(200 + seed, 8)]
        spec = O.SparseOperatorSpec(fam, p0, gamma, 2)
        assert O.rescale_identity_check(spec, fs) <= 1e-9


def check_multi_maximal() -> None:
    ones = StepFunction.constant(1.0, 1)
    f = StepFunction.from_cells([1.0, 3.0])
    assert np.allclose(O.multi_maximal([f], [ones]).cells, [2.0, 3.0])
    g = StepFunction.from_cells([3.0, 1.0])
    assert np.allclose(O.multi_maximal([f, g], [ones, ones]).cells, [4.0, 4.0])
    h1, h2 = W.random_weight(31, 3), W.random_weight(32, 3)
    s1, s2 = W.random_weight(33, 3), W.random_weight(34, 3)
    fast = O.multi_maximal([h1, h2], [s1, s2])
    slow = BF.bf_multi_maximal([h1, h2], [s1, s2])
    assert float(np.max(np.abs(fast.cells - slow.cells) / slow.cells)) < 1e-12


# ---------------------------------------------------------------------------
# stopping-time machinery


def check_bucket_index() -> None:
    assert ST.bucket_index(3.0) == 1
    assert ST.bucket_index(4.0) == 1
    assert ST.bucket_index(1.0) == -1
    assert ST.bucket_index(0.75) == -1
    for k in range(-20, 21):
        assert ST.bucket_index(2.0**k) == k - 1
    assert _raises(lambda: ST.bucket_index(0.0))


def check_level_sets_partition() -> None:
    fam = S.random_sparse(9, 7)
    w = W.random_weight(91, 7)
    sigmas = [W.random_weight(92, 7), W.random_weight(93, 7)]
    exps = ExponentTuple((2.0, 3.0), 1.0, 1.0)
    deco = ST.level_sets(fam, w, sigmas, exps)
    seen = list(deco.null_bucket)
    for a, cubes in deco.buckets.items():
        for q in cubes:
            psi = deco.psi[q]
            assert math.ldexp(1.0, a) < psi <= math.ldexp(1.0, a + 1)
        seen.extend(cubes)
    assert sorted(seen) == list(fam.cubes)


def check_principal_cubes_example() -> None:
    base = [Cube(0, 0), Cube(1, 0), Cube(2, 0)]
    f = StepFunction.from_cells([16.0, 1.0, 1.0, 1.0])
    ones = StepFunction.constant(1.0, 2)
    forest = ST.principal_cubes(base, f, ones)
    assert forest.cubes() == (Cube(0, 0), Cube(2, 0))
    assert forest.pi(Cube(1, 0)) == Cube(0, 0)
    assert forest.pi(Cube(2, 0)) == Cube(2, 0)
    assert forest.parent[Cube(2, 0)] == Cube(0, 0)


def check_principal_carleson_random() -> None:
    for seed in range(5):
        fam = S.random_sparse(seed, 6)
        f = W.random_weight(300 + seed, 6, 3.0)
        sigma = W.random_weight(400 + seed, 6, 3.0)
        forest = ST.principal_cubes(fam, f, sigma)
        for p in (1.5, 2.0, 4.0):
            ratio = ST.carleson_embedding_check(forest, f, sigma, p)
            bound = 2.0 * (p / (p - 1.0)) ** p
            assert ratio <= bound


def check_sigma_halving() -> None:
    for seed in range(5):
        fam = S.random_sparse(seed, 6)
        f = W.random_weight(500 + seed, 6, 3.0)
        sigma = W.random_weight(600 + seed, 6, 3.0)
        forest = ST.principal_cubes(fam, f, sigma)
        kids: dict[Cube, list[Cube]] = {}
        for child, head in forest.parent.items():
            if head is not None:
                kids.setdefault(head, []).append(child)
        for head, members in kids.items():
            total = math.fsum(D.integral(sigma, c) for c in members)
            assert total <= 0.5 * D.integral(sigma, head) * (1.0 + 1e-12)


def check_pi_map_minimality() -> None:
    fam = S.random_sparse(13, 5)
    f = W.random_weight(131, 5, 3.0)
    sigma = W.random_weight(132, 5, 3.0)
    forest = ST.principal_cubes(fam, f, sigma)
    members = set(forest.cubes())
    for q in fam.cubes:
        head = forest.pi(q)
        assert head.contains(q)
        for other in members:
            if other != head and other.contains(q):
                assert other.contains(head) and other != head


def check_ls_single_cube() -> None:
    fam = S.SparseFamily([Cube.root()], 4)
    w = W.random_weight(71, 4)
    sigmas = [W.random_weight(72, 4), W.random_weight(73, 4)]
    exps = ExponentTuple((2.0, 3.0), 1.0, 1.0)
    deco = ST.level_sets(fam, w, sigmas, exps)
    (a, cubes), = deco.all_bucket_cubes()
    f = W.random_weight(74, 4)
    g = W.random_weight(75, 4)
    forest_f = ST.principal_cubes(fam, f, sigmas[0])
    forest_g = ST.principal_cubes(fam, g, sigmas[1])
    worst = ST.ls_bound_check(cubes, forest_f, forest_g, w, sigmas, exps, a)
    assert worst is not None and worst.fibers == 1
    psi = deco.psi[Cube.root()]
    expected = (psi / math.ldexp(1.0, a)) ** (1.0 / exps.p)
    assert _close(worst.ratio, expected)
    assert _close(worst.lhs / worst.rhs, worst.ratio)
    assert 1.0 < worst.ratio <= 2.0 ** (1.0 / exps.p) * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# theorem-level checks


def check_theorem_rhs_all_ones() -> None:
    fam = S.SparseFamily([Cube.root()], 2)
    ones = StepFunction.constant(1.0, 2)
    exps = ExponentTuple((2.0, 2.0), 1.0, 1.0)
    inst = V.TheoremInstance(fam, (ones, ones), (ones, ones), ones, exps)
    assert _close(V.theorem_rhs(inst), 3.0)
    assert _close(V.theorem_ratio(inst), 1.0 / 3.0)


def check_theorem_rhs_dual_route() -> None:
    fam = S.random_sparse(17, 3)
    sigmas = (W.random_weight(171, 3), W.random_weight(172, 3))
    w = W.random_weight(173, 3)
    ones = StepFunction.constant(1.0, 3)
    exps = ExponentTuple((2.0, 3.0), 1.0, 2.0)
    inst = V.TheoremInstance(fam, (ones, ones), sigmas, w, exps)
    fast = V.theorem_rhs(inst)
    ainfs = [BF.bf_a_infty(s) for s in sigmas]
    w_ainf = BF.bf_a_infty(w)
    avecp = BF.bf_a_vec_p(w, list(sigmas), exps)
    inv = [1.0 / v for v in exps.ps]
    prod_all = math.prod(c**e for c, e in zip(ainfs, inv))
    leave = math.fsum(
        math.prod(c**e for i, (c, e) in enumerate(zip(ainfs, inv)) if i != j)
        for j in range(2)
    )
    slow = avecp ** (1.0 / exps.p) * (
        prod_all + w_ainf**exps.a_infty_weight_exponent * leave
    )
    assert _close(fast, slow)


def check_theorem_inapplicable_raises() -> None:
    fam = S.SparseFamily([Cube.root()], 2)
    ones = StepFunction.constant(1.0, 2)
    exps = ExponentTuple((1.2, 1.2, 1.2), 1.0, 0.5)
    inst = V.TheoremInstance(fam, (ones,) * 3, (ones,) * 3, ones, exps)
    assert _raises(lambda: V.theorem_ratio(inst))


def check_bucket_reconstruction_random() -> None:
    rng = np.random.default_rng(88)
    for _ in range(3):
        spec = V.sample_instance(rng, TheoremSuite().sampler, 6)
        inst = V.instance_from_spec(spec)
        assert V.bucket_reconstruction_check(inst) <= 1e-12


def check_experiment_rows_replayable() -> None:
    cfg = ExperimentConfig(seed=5, suites=[CarlesonSuite(trials=3, resolutions=[5])])
    rows1 = V.run_experiment(cfg)
    rows2 = V.run_experiment(cfg)
    assert [r.model_dump() for r in rows1] == [r.model_dump() for r in rows2]
    replay = V._run_carleson_trial(cfg.suites[0], rows1[1].trial, rows1[1].seed)
    assert replay.model_dump() == rows1[1].model_dump()


def check_randomized_suites_pass() -> None:
    cfg = ExperimentConfig(
        seed=20260815,
        suites=[
            RescaleSuite(trials=15, resolution=7),
            CarlesonSuite(trials=30, resolutions=[5, 6, 7]),
            PrincipalCarlesonSuite(trials=30, resolutions=[5, 6]),
            TheoremSuite(trials=24, resolution=7),
            MaximalSuite(trials=12, resolution=7),
            LsSuite(trials=8, resolution=7),
        ],
    )
    rows = V.run_experiment(cfg)
    bad = [r for r in rows if not r.passed]
    assert not bad, f"{len(bad)} rows failed, first: {bad[0] if bad else None}"


def check_search_deterministic() -> None:
    cfg = SearchConfig(resolution=6, restarts=2, steps=6, seed=11)
    res1 = V.extremizer_search(cfg)
    res2 = V.extremizer_search(cfg)
    assert res1.model_dump() == res2.model_dump()
    assert res1.best.ratio > 0.0


def check_calibration_committed() -> None:
    for regime in ("p<=gamma", "p1-max", "p2-max", "qprime-max"):
        ceiling = calibration.THEOREM_CEILING[regime]
        assert math.isfinite(ceiling) and ceiling > 0.0
        assert _close(calibration.theorem_threshold(regime), ceiling * 1.05)
    assert calibration.MAXIMAL_CEILING > 0.0 and calibration.LS_CEILING > 0.0
    assert calibration.REGRESSION_MARGIN == 1.05


CHECKS: list[tuple[str, Callable[[], None]]] = [
    ("dyadic.cube-geometry", check_cube_geometry),
    ("dyadic.step-function-integrals", check_step_function_integrals),
    ("dyadic.weighted-average-zero-mass", check_weighted_average_zero_mass),
    ("sparse.sparsity-verifier", check_sparsity_verifier),
    ("sparse.exceptional-sets", check_exceptional_sets),
    ("sparse.serialization-roundtrip", check_family_serialization),
    ("sparse.random-family-postconditions", check_random_sparse_postconditions),
    ("sparse.carleson-sum-chain", check_carleson_sum_chain),
    ("weights.a-p-basics", check_a_p_basics),
    ("weights.a-p-frozen-power-law", check_a_p_frozen_power_law),
    ("weights.power-weight-cells", check_power_weight_cells),
    ("weights.a-infty-examples", check_a_infty_examples),
    ("weights.a-vec-p-example", check_a_vec_p_example),
    ("weights.dual-weights", check_dual_weights),
    ("weights.exponent-tuple", check_exponent_tuple),
    ("operators.sparse-op-small", check_sparse_op_small),
    ("operators.sparse-op-vs-bruteforce", check_sparse_op_vs_bruteforce),
    ("operators.rescale-identity", check_rescale_identity),
    ("operators.multi-maximal", check_multi_maximal),
    ("stopping.bucket-index", check_bucket_index),
    ("stopping.level-sets-partition", check_level_sets_partition),
    ("stopping.principal-cubes-example", check_principal_cubes_example),
    ("stopping.principal-carleson-random", check_principal_carleson_random),
    ("stopping.sigma-halving", check_sigma_halving),
    ("stopping.pi-map-minimality", check_pi_map_minimality),
    ("stopping.ls-single-cube", check_ls_single_cube),
    ("verify.theorem-rhs-all-ones", check_theorem_rhs_all_ones),
    ("verify.theorem-rhs-dual-route", check_theorem_rhs_dual_route),
    ("verify.inapplicable-exponents-raise", check_theorem_inapplicable_raises),
    ("verify.bucket-reconstruction-random", check_bucket_reconstruction_random),
    ("verify.experiment-rows-replayable", check_experiment_rows_replayable),
    ("verify.randomized-suites-pass", check_randomized_suites_pass),
    ("verify.search-deterministic", check_search_deterministic),
    ("verify.calibration-committed", check_calibration_committed),
]


def run_selftest() -> list[CheckOutcome]:
    outcomes = []
    for name, fn in CHECKS:
        try:
            fn()
        except AssertionError as exc:
            outcomes.append(CheckOutcome(name, False, str(exc) or "assertion failed"))
        except Exception as exc:  # a crash is a failure, not an abort
            outcomes.append(CheckOutcome(name, False, f"{type(exc).__name__}: {exc}"))
        else:
            outcomes.append(CheckOutcome(name, True))
    return outcomes

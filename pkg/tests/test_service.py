"""HTTP service endpoints: payload round trips and error mapping."""

import math
import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from sparseweights.operators import SparseOperatorSpec, multi_maximal, sparse_op
from sparseweights.selftest import CHECKS
from sparseweights.service.app import create_app
from sparseweights.sparse import random_sparse
from sparseweights.weights import (
    ExponentTuple,
    a_infty,
    a_p_constant,
    a_vec_p,
    power_weight,
    random_weight,
)


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"


def test_constants_matches_direct_calls(client):
    payload = {
        "resolution": 6,
        "weight": {"kind": "power", "alpha": 1.0},
        "p": 2.0,
        "sigmas": [{"kind": "random", "seed": 3}, {"kind": "random", "seed": 4}],
        "exponents": {"ps": [2.0, 3.0], "p0": 1.0, "gamma": 1.0},
    }
    resp = client.post("/constants", json=payload)
    assert resp.status_code == 200
    body = resp.json()
    assert body["resolution"] == 6
    rows = {r["constant"]: r for r in body["rows"]}
    w = power_weight(1.0, 6)
    sigmas = [random_weight(3, 6), random_weight(4, 6)]
    assert math.isclose(rows["a_infty:w"]["value"], a_infty(w), rel_tol=1e-15)
    assert math.isclose(rows["a_p:w:p=2"]["value"], a_p_constant(w, 2.0), rel_tol=1e-15)
    assert math.isclose(
        rows["a_infty:sigma1"]["value"], a_infty(sigmas[0]), rel_tol=1e-15
    )
    assert "two_weight_a_p:sigma2:p=2" in rows
    expected = a_vec_p(w, sigmas, ExponentTuple((2.0, 3.0), 1.0, 1.0))
    assert math.isclose(rows["a_vec_p"]["value"], expected, rel_tol=1e-15)
    for row in body["rows"]:
        assert 0 <= row["level"] <= 6
        assert isinstance(row["at_finest"], bool)


def test_constants_slot_mismatch_is_400(client):
    payload = {
        "weight": {"kind": "power", "alpha": 1.0},
        "sigmas": [{"kind": "random", "seed": 3}],
        "exponents": {"ps": [2.0, 3.0]},
    }
    resp = client.post("/constants", json=payload)
    assert resp.status_code == 400
    assert "sigmas" in resp.json()["detail"]


def test_eval_sparse_matches_direct(client):
    payload = {
        "resolution": 5,
        "operator": "sparse",
        "family": {"kind": "random", "seed": 9},
        "p0": 2.0,
        "gamma": 0.5,
        "functions": [
            {"kind": "random", "seed": 11},
            {"kind": "indicator", "k": 1},
        ],
    }
    resp = client.post("/eval", json=payload)
    assert resp.status_code == 200
    body = resp.json()
    assert body["operator"] == "sparse" and len(body["cells"]) == 32
    from sparseweights.weights import indicator_function

    fam = random_sparse(9, 5)
    fs = [random_weight(11, 5), indicator_function(1, 5)]
    direct = sparse_op(SparseOperatorSpec(fam, 2.0, 0.5, 2), fs)
    assert np.allclose(body["cells"], direct.cells, rtol=1e-15)


def test_eval_maximal_defaults_to_lebesgue(client):
    payload = {
        "resolution": 4,
        "operator": "maximal",
        "functions": [{"kind": "random", "seed": 13}],
    }
    resp = client.post("/eval", json=payload)
    assert resp.status_code == 200
    from sparseweights.dyadic import StepFunction

    direct = multi_maximal(
        [random_weight(13, 4)], [StepFunction.constant(1.0, 4)]
    )
    assert np.allclose(resp.json()["cells"], direct.cells, rtol=1e-15)


def test_eval_sparse_without_family_is_400(client):
    resp = client.post(
        "/eval",
        json={"operator": "sparse", "functions": [{"kind": "random", "seed": 1}]},
    )
    assert resp.status_code == 400


def test_decompose_shapes(client):
    payload = {
        "resolution": 6,
        "family": {"kind": "random", "seed": 17},
        "exponents": {"ps": [2.0, 3.0], "p0": 1.0, "gamma": 1.0},
        "sigmas": [{"kind": "random", "seed": 21}, {"kind": "random", "seed": 22}],
        "functions": [{"kind": "random", "seed": 23}, {"kind": "random", "seed": 24}],
    }
    resp = client.post("/decompose", json=payload)
    assert resp.status_code == 200
    body = resp.json()
    fam = random_sparse(17, 6)
    assert body["family_size"] == len(fam)
    assert len(body["forests"]) == 2
    bucket_sizes = sum(b["size"] for b in body["buckets"])
    assert bucket_sizes == body["family_size"]
    for b in body["buckets"]:
        if b["a"] is not None:
            assert b["psi_min"] > 0.0
            assert b["ls_ratio"] is None or b["ls_ratio"] > 0.0
        for line in b["cubes_text"].strip().splitlines():
            level, index = map(int, line.split())
            assert 0 <= level <= 6 and 0 <= index < (1 << level)
    for f in body["forests"]:
        assert f["size"] >= 1 and f["depth"] >= 1
        assert f["carleson_ratio"] > 0.0


def test_check_theorem_small_config(client):
    payload = {
        "seed": 5,
        "suites": [
            {"check": "rescale-identity", "trials": 4, "resolution": 5},
            {"check": "bucket-reconstruction", "trials": 4, "resolution": 5},
        ],
    }
    resp = client.post("/check-theorem", json=payload)
    assert resp.status_code == 200
    body = resp.json()
    assert body["total"] == 8 and len(body["rows"]) == 8
    assert body["failures"] == 0 and body["all_pass"] is True
    assert [r["trial"] for r in body["rows"]] == [0, 1, 2, 3, 0, 1, 2, 3]
    assert all(r["pass"] is True for r in body["rows"])


def test_check_theorem_reports_failures(client):
    payload = {
        "seed": 5,
        "suites": [
            {"check": "theorem-ratio", "trials": 3, "resolution": 4, "max_ratio": 1e-9}
        ],
    }
    resp = client.post("/check-theorem", json=payload)
    assert resp.status_code == 200
    body = resp.json()
    assert body["failures"] == 3 and body["all_pass"] is False


def test_search_deterministic(client):
    payload = {"resolution": 4, "restarts": 2, "steps": 3, "seed": 8}
    first = client.post("/search", json=payload)
    second = client.post("/search", json=payload)
    assert first.status_code == 200
    assert first.json() == second.json()
    body = first.json()
    assert body["best"]["ratio"] > 0.0
    assert len(body["trace"]) == 2


def test_selftest_endpoint(client):
    resp = client.post("/selftest", json={})
    assert resp.status_code == 200
    body = resp.json()
    assert body["total"] == len(CHECKS)
    assert body["failures"] == 0 and body["all_pass"] is True
    names = [c["name"] for c in body["checks"]]
    assert names == [name for name, _ in CHECKS]


def test_validation_errors_are_422(client):
    # unknown field (extra = forbid)
    resp = client.post(
        "/constants",
        json={"weight": {"kind": "power", "alpha": 1.0}, "nonsense": 1},
    )
    assert resp.status_code == 422
    # malformed spec discriminator
    resp = client.post("/constants", json={"weight": {"kind": "mystery"}})
    assert resp.status_code == 422
    # resolution beyond the supported grid
    resp = client.post(
        "/constants", json={"resolution": 99, "weight": {"kind": "power", "alpha": 1.0}}
    )
    assert resp.status_code == 422


def test_domain_errors_are_400(client):
    # alpha <= -1 passes schema but fails to build a weight
    resp = client.post(
        "/constants", json={"weight": {"kind": "power", "alpha": -1.5}}
    )
    assert resp.status_code in (400, 422)
    resp = client.post(
        "/eval",
        json={
            "resolution": 3,
            "operator": "sparse",
            "family": {"kind": "cubes", "cubes": [[0, 0], [1, 0], [1, 1]]},
            "functions": [{"kind": "random", "seed": 1}],
        },
    )
    assert resp.status_code == 400  # family is not half-sparse

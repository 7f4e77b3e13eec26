"""Command line client: exit codes, output formats, determinism, overrides."""

import json

import httpx
import pytest

import sparseweights.cli as cli
from sparseweights.selftest import CHECKS


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def constants_config(tmp_path):
    path = tmp_path / "constants.json"
    path.write_text(
        json.dumps(
            {
                "resolution": 5,
                "weight": {"kind": "power", "alpha": 1.0},
                "p": 2.0,
                "sigmas": [{"kind": "random", "seed": 3}],
            }
        )
    )
    return str(path)


@pytest.fixture
def experiment_config(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(
        json.dumps(
            {
                "seed": 5,
                "suites": [
                    {"check": "rescale-identity", "trials": 4, "resolution": 5},
                    {"check": "carleson", "trials": 4, "resolutions": [4, 5]},
                ],
            }
        )
    )
    return str(path)


def test_constants_csv_deterministic(capsys, constants_config):
    code1, out1, err1 = run_cli(capsys, "constants", "--config", constants_config)
    code2, out2, _ = run_cli(capsys, "constants", "--config", constants_config)
    assert code1 == code2 == 0
    assert err1 == ""
    assert out1 == out2  # byte-identical reruns
    lines = out1.strip().splitlines()
    assert lines[0] == "constant,value,level,index,at_finest"
    assert len(lines) == 1 + 4  # a_infty:w, a_p, a_infty:sigma1, two_weight
    # floats carry up to 17 significant digits; at least one constant here
    # is not exactly representable and needs them
    def digits(value: str) -> int:
        return len(value.replace("-", "").replace(".", "").split("e")[0].lstrip("0"))

    assert max(digits(line.split(",")[1]) for line in lines[1:]) >= 16


def test_constants_json_format(capsys, constants_config):
    code, out, _ = run_cli(
        capsys, "constants", "--config", constants_config, "--format", "json"
    )
    assert code == 0
    body = json.loads(out)
    assert body["resolution"] == 5
    assert {r["constant"] for r in body["rows"]} >= {"a_infty:w", "a_infty:sigma1"}


def test_output_file_matches_stdout(capsys, tmp_path, constants_config):
    code, out, _ = run_cli(capsys, "constants", "--config", constants_config)
    target = tmp_path / "rows.csv"
    code2, out2, _ = run_cli(
        capsys, "constants", "--config", constants_config, "--output", str(target)
    )
    assert code == code2 == 0
    assert out2 == ""  # --output suppresses stdout
    assert target.read_text() == out


def test_constants_resolution_override(capsys, constants_config):
    code, out, _ = run_cli(
        capsys,
        "constants",
        "--config",
        constants_config,
        "--resolution",
        "3",
        "--format",
        "json",
    )
    assert code == 0
    assert json.loads(out)["resolution"] == 3


def test_eval_csv(capsys, tmp_path):
    cfg = tmp_path / "eval.json"
    cfg.write_text(
        json.dumps(
            {
                "resolution": 3,
                "operator": "sparse",
                "family": {"kind": "random", "seed": 5},
                "functions": [{"kind": "random", "seed": 31}],
            }
        )
    )
    code, out, _ = run_cli(capsys, "eval", "--config", str(cfg))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "cell,value"
    assert len(lines) == 1 + 8
    assert lines[1].startswith("0,")


def test_check_theorem_passes_and_is_deterministic(capsys, experiment_config):
    code1, out1, _ = run_cli(capsys, "check-theorem", "--config", experiment_config)
    code2, out2, _ = run_cli(capsys, "check-theorem", "--config", experiment_config)
    assert code1 == code2 == 0
    assert out1 == out2
    lines = out1.strip().splitlines()
    assert lines[0].startswith("trial,check,resolution")
    assert len(lines) == 1 + 8
    assert all(line.endswith(",true") for line in lines[1:])


def test_check_theorem_failure_exit_code(capsys, tmp_path):
    cfg = tmp_path / "failing.json"
    cfg.write_text(
        json.dumps(
            {
                "seed": 5,
                "suites": [
                    {
                        "check": "theorem-ratio",
                        "trials": 2,
                        "resolution": 4,
                        "max_ratio": 1e-9,
                    }
                ],
            }
        )
    )
    code, out, _ = run_cli(capsys, "check-theorem", "--config", str(cfg))
    assert code == 1
    assert ",false" in out


def test_check_theorem_seed_override_changes_rows(capsys, experiment_config):
    _, base, _ = run_cli(capsys, "check-theorem", "--config", experiment_config)
    code, shifted, _ = run_cli(
        capsys, "check-theorem", "--config", experiment_config, "--seed", "6"
    )
    assert code == 0
    assert shifted != base


def test_check_theorem_resolution_override(capsys, experiment_config):
    code, out, _ = run_cli(
        capsys,
        "check-theorem",
        "--config",
        experiment_config,
        "--resolution",
        "4",
        "--format",
        "json",
    )
    assert code == 0
    rows = json.loads(out)["rows"]
    assert {r["resolution"] for r in rows} == {4}


def test_search_csv_shape(capsys, tmp_path):
    cfg = tmp_path / "search.json"
    cfg.write_text(
        json.dumps({"resolution": 4, "restarts": 2, "steps": 3, "seed": 8})
    )
    code, out, _ = run_cli(capsys, "search", "--config", str(cfg))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "scope,regime,ratio"
    assert lines[1].startswith("best,")
    assert all(line.count(",") == 2 for line in lines)


def test_search_seed_override(capsys, tmp_path):
    cfg = tmp_path / "search.json"
    cfg.write_text(json.dumps({"resolution": 4, "restarts": 2, "steps": 3, "seed": 8}))
    _, base, _ = run_cli(capsys, "search", "--config", str(cfg))
    code, shifted, _ = run_cli(
        capsys, "search", "--config", str(cfg), "--seed", "9"
    )
    assert code == 0
    assert shifted != base


def test_selftest_cli(capsys):
    code, out, err = run_cli(capsys, "selftest")
    assert code == 0
    assert err == ""
    lines = out.strip().splitlines()
    assert lines[0] == "name,passed,detail"
    assert len(lines) == 1 + len(CHECKS)
    # sanitized detail column: exactly two commas per line
    assert all(line.count(",") == 2 for line in lines)


def test_selftest_rejects_overrides(capsys):
    code, _, err = run_cli(capsys, "selftest", "--resolution", "5")
    assert code == 2
    assert "selftest" in err


def test_usage_errors_exit_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, "constants")  # --config is required
    assert code == 2 and "config" in err
    code, _, err = run_cli(capsys, "constants", "--config", str(tmp_path / "none.json"))
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run_cli(capsys, "constants", "--config", str(bad))
    assert code == 2
    scalar = tmp_path / "scalar.json"
    scalar.write_text("42")
    code, _, err = run_cli(capsys, "constants", "--config", str(scalar))
    assert code == 2
    code, _, err = run_cli(capsys, "search", "--resolution", "4", "--seed", "1")
    assert code == 0  # search accepts overrides without a config


def test_seed_override_rejected_for_constants(capsys, constants_config):
    code, _, err = run_cli(
        capsys, "constants", "--config", constants_config, "--seed", "1"
    )
    assert code == 2
    assert "--seed" in err


def test_invalid_payload_exits_2(capsys, tmp_path):
    cfg = tmp_path / "weird.json"
    cfg.write_text(json.dumps({"weight": {"kind": "mystery"}}))
    code, _, err = run_cli(capsys, "constants", "--config", str(cfg))
    assert code == 2
    assert "rejected" in err


def test_argparse_errors_use_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["constants", "--format", "xml"])
    assert exc.value.code == 2


def test_thread_env_invalid_value_exits_2(capsys, monkeypatch, experiment_config):
    monkeypatch.setenv("SPARSE_WEIGHTS_THREADS", "many")
    code, _, err = run_cli(capsys, "check-theorem", "--config", experiment_config)
    assert code == 2
    assert "SPARSE_WEIGHTS_THREADS" in err


def test_thread_env_cap_keeps_output_identical(capsys, monkeypatch, experiment_config):
    _, base, _ = run_cli(capsys, "check-theorem", "--config", experiment_config)
    monkeypatch.setenv("SPARSE_WEIGHTS_THREADS", "2")
    code, capped, _ = run_cli(capsys, "check-theorem", "--config", experiment_config)
    assert code == 0
    assert capped == base


def test_server_flag_uses_remote_transport(capsys, monkeypatch, constants_config):
    # route the remote client through the in-process ASGI app: the --server
    # code path must produce byte-identical output to the default path
    import warnings

    from sparseweights.service.app import app

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    def fake_client(*, base_url, timeout):
        assert base_url == "http://fake:9"
        assert timeout > 0
        return TestClient(app)

    monkeypatch.setattr(cli.httpx, "Client", fake_client)
    code, remote, _ = run_cli(
        capsys, "constants", "--config", constants_config, "--server", "http://fake:9"
    )
    monkeypatch.undo()
    code2, local, _ = run_cli(capsys, "constants", "--config", constants_config)
    assert code == code2 == 0
    assert remote == local


def test_server_flag_connection_failure_exits_2(capsys, constants_config):
    code, _, err = run_cli(
        capsys,
        "constants",
        "--config",
        constants_config,
        "--server",
        "http://127.0.0.1:1",
    )
    assert code == 2
    assert "failed" in err


def test_default_battery_shape(capsys):
    # the built-in battery covers every suite kind and must pass
    code, out, _ = run_cli(capsys, "check-theorem", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert body["all_pass"] is True
    checks = {r["check"] for r in body["rows"]}
    assert checks == {
        "rescale-identity",
        "carleson",
        "principal-carleson",
        "theorem-ratio",
        "maximal-ratio",
        "bucket-reconstruction",
        "ls-bound",
    }

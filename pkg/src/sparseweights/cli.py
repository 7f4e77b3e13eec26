"""Command line client for the sparseweights service.

The CLI never computes anything itself: each subcommand posts a request to
the HTTP service and renders the response.  By default the service runs
in-process (no network, same results everywhere); pass --server URL to use
a remote instance started with `uvicorn sparseweights.service.app:app`.

Exit codes: 0 success / all checks passed, 1 at least one check failed,
2 usage or configuration error.  Output is byte-identical across runs for
the same config and seed.
"""

from __future__ import annotations

import argparse
import copy
import sys
from typing import Callable

import httpx

from .config import ConfigError, ReportRow, load_json
from .report import fmt_value, rows_to_csv, to_json

#: Default experiment battery for `check-theorem` without --config.
DEFAULT_EXPERIMENT = {
    "seed": 1,
    "suites": [
        {"check": "rescale-identity"},
        {"check": "carleson"},
        {"check": "principal-carleson"},
        {"check": "theorem-ratio"},
        {"check": "maximal-ratio"},
        {"check": "bucket-reconstruction"},
        {"check": "ls-bound"},
    ],
}


class ServiceClient:
    """Thin JSON-over-HTTP client; in-process app unless --server is given."""

    def __init__(self, server: str | None) -> None:
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path: str, payload) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise ConfigError(f"request to {path} failed: {exc}") from exc
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ConfigError(f"{path} rejected ({response.status_code}): {detail}")
        return response.json()

    def close(self) -> None:
        self._client.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparseweights",
        description="Sparse-operator and weight-constant laboratory (thin client).",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    specs = {
        "constants": "characteristic constants of a weight (A_p, A_infty, vector A_p)",
        "eval": "evaluate a sparse or maximal operator on test functions",
        "check-theorem": "run randomized check suites and report pass/fail rows",
        "decompose": "level-set buckets and principal forests for an instance",
        "search": "random-restart coordinate ascent for extremal ratio instances",
        "selftest": "run the built-in deterministic check battery",
    }
    for name, help_text in specs.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="JSON config / request body")
        cmd.add_argument(
            "--resolution",
            type=int,
            help="override the config's grid resolution",
        )
        cmd.add_argument("--seed", type=int, help="override the config's seed")
        cmd.add_argument("--output", help="write the result to this file")
        cmd.add_argument(
            "--format",
            choices=["csv", "json"],
            default="csv",
            help="output format (default csv)",
        )
        cmd.add_argument(
            "--server",
            help="base URL of a running service; default runs in-process",
        )
    return parser


def _apply_overrides(command: str, args, payload):
    if args.resolution is not None:
        if command in ("constants", "eval", "decompose", "search"):
            payload["resolution"] = args.resolution
        elif command == "check-theorem":
            for suite in payload.get("suites", []):
                if suite.get("check") in ("carleson", "principal-carleson"):
                    suite["resolutions"] = [args.resolution]
                else:
                    suite["resolution"] = args.resolution
        else:
            raise ConfigError(f"--resolution does not apply to {command}")
    if args.seed is not None:
        if command in ("check-theorem", "search"):
            payload["seed"] = args.seed
        else:
            raise ConfigError(f"--seed does not apply to {command}")
    return payload


def _csv_constants(resp: dict) -> str:
    lines = ["constant,value,level,index,at_finest"]
    for row in resp["rows"]:
        lines.append(
            ",".join(
                fmt_value(row[k])
                for k in ("constant", "value", "level", "index", "at_finest")
            )
        )
    return "\n".join(lines) + "\n"


def _csv_eval(resp: dict) -> str:
    lines = ["cell,value"]
    for i, v in enumerate(resp["cells"]):
        lines.append(f"{i},{fmt_value(float(v))}")
    return "\n".join(lines) + "\n"


def _csv_experiment(resp: dict) -> str:
    rows = [ReportRow.model_validate(r) for r in resp["rows"]]
    return rows_to_csv(rows)


def _csv_decompose(resp: dict) -> str:
    cols = "kind,label,size,depth,psi_min,psi_max,carleson_ratio,ls_ratio"
    lines = [cols]
    for b in resp["buckets"]:
        label = "null" if b["a"] is None else str(b["a"])
        lines.append(
            ",".join(
                [
                    "bucket",
                    label,
                    str(b["size"]),
                    "",
                    fmt_value(float(b["psi_min"])),
                    fmt_value(float(b["psi_max"])),
                    "",
                    fmt_value(b["ls_ratio"]),
                ]
            )
        )
    for f in resp["forests"]:
        lines.append(
            ",".join(
                [
                    "forest",
                    f"slot{f['slot']}",
                    str(f["size"]),
                    str(f["depth"]),
                    "",
                    "",
                    fmt_value(float(f["carleson_ratio"])),
                    "",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _csv_search(resp: dict) -> str:
    lines = ["scope,regime,ratio"]
    best = resp["best"]
    lines.append(
        ",".join(
            [
                "best",
                fmt_value(best["evaluation"]["regime"]),
                fmt_value(float(best["ratio"])),
            ]
        )
    )
    for key in sorted(resp["by_regime"]):
        lines.append(
            ",".join(["regime", key, fmt_value(float(resp["by_regime"][key]["ratio"]))])
        )
    return "\n".join(lines) + "\n"


def _csv_selftest(resp: dict) -> str:
    lines = ["name,passed,detail"]
    for c in resp["checks"]:
        detail = c.get("detail", "").replace(",", ";").replace("\n", " ")
        lines.append(",".join([c["name"], fmt_value(c["passed"]), detail]))
    return "\n".join(lines) + "\n"


_COMMANDS: dict[str, tuple[str, bool, dict | None, Callable[[dict], str]]] = {
    # name: (endpoint, config required, default payload, csv renderer)
    "constants": ("/constants", True, None, _csv_constants),
    "eval": ("/eval", True, None, _csv_eval),
    "check-theorem": ("/check-theorem", False, DEFAULT_EXPERIMENT, _csv_experiment),
    "decompose": ("/decompose", True, None, _csv_decompose),
    "search": ("/search", False, {}, _csv_search),
    "selftest": ("/selftest", False, {}, _csv_selftest),
}


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    endpoint, config_required, default_payload, to_csv = _COMMANDS[command]
    try:
        if args.config is not None:
            payload = load_json(args.config)
            if not isinstance(payload, dict):
                raise ConfigError(f"config {args.config} must hold a JSON object")
        elif config_required:
            raise ConfigError(f"{command} requires --config")
        else:
            # deep copy: overrides must not leak into the shared default
            payload = copy.deepcopy(default_payload or {})
        if command == "selftest" and (
            args.config is not None
            or args.seed is not None
            or args.resolution is not None
        ):
            raise ConfigError("selftest takes no config or overrides")
        payload = _apply_overrides(command, args, payload)
        client = ServiceClient(args.server)
        try:
            resp = client.post(endpoint, payload)
        finally:
            client.close()
        text = to_json(resp) if args.format == "json" else to_csv(resp)
        _emit(text, args.output)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if command in ("check-theorem", "selftest") and not resp.get("all_pass", True):
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

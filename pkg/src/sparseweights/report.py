"""Deterministic text rendering for results (CSV and JSON).

Floats print with 17 significant digits ('.' decimal point), which is
enough to round-trip doubles, so re-running a command with the same config
and seed produces byte-identical output.  List-valued fields join with ';'
and booleans print as 'true'/'false'; no field ever contains a comma, so
the CSV needs no quoting.
"""

from __future__ import annotations

import json
from typing import Sequence

from pydantic import BaseModel

from .config import REPORT_COLUMNS, ReportRow


def fmt_float(x: float) -> str:
    return f"{float(x):.17g}"


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, (list, tuple)):
        return ";".join(fmt_value(x) for x in v)
    return str(v)


def models_to_csv(rows: Sequence[BaseModel], columns: Sequence[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        data = row.model_dump(by_alias=True)
        lines.append(",".join(fmt_value(data.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def rows_to_csv(rows: Sequence[ReportRow]) -> str:
    return models_to_csv(rows, REPORT_COLUMNS)


def to_json(payload) -> str:
    """Canonical JSON: pydantic dump when given a model, 2-space indent."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(by_alias=True)
    return json.dumps(payload, indent=2) + "\n"

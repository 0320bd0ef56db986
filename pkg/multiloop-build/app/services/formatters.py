"""
Report rendering: canonical JSON for machines, aligned tables for people.
Both renderings are deterministic; timing never enters them.
"""

import hashlib
import json
from typing import Any, Dict, Iterable, List, Tuple

import pandas as pd

from app.models.schemas import CheckResult, Report


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def inputs_digest(documents: Iterable[Any]) -> str:
    """SHA-256 over the canonical JSON of every input document, in order."""
    h = hashlib.sha256()
    for doc in documents:
        h.update(canonical_json(doc).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def report_json(report: Report) -> str:
    payload = report.model_dump(by_alias=True, mode="json")
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def flatten(results: Any, prefix: str = "") -> List[Tuple[str, str]]:
    """Nested dicts and lists as (dotted key, value) rows; short scalar lists stay inline."""
    rows: List[Tuple[str, str]] = []
    if isinstance(results, dict):
        if not results and prefix:
            rows.append((prefix, "{}"))
        for key in sorted(results):
            rows.extend(flatten(results[key], f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(results, list):
        if all(not isinstance(v, (dict, list)) for v in results) and len(results) <= 8:
            rows.append((prefix, "[" + ", ".join(str(v) for v in results) + "]"))
        else:
            for i, value in enumerate(results):
                rows.extend(flatten(value, f"{prefix}[{i}]"))
    else:
        rows.append((prefix, str(results)))
    return rows


def checks_table(checks: Iterable[CheckResult]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [
            {
                "check": c.name,
                "status": "pass" if c.passed else "FAIL",
                "detail": c.detail,
                "witness": canonical_json(c.witness) if c.witness else "",
            }
            for c in checks
        ],
        columns=["check", "status", "detail", "witness"],
    )
    return frame


def _find_checks(results: Dict[str, Any]) -> List[CheckResult]:
    found: List[CheckResult] = []
    for key in sorted(results):
        value = results[key]
        if isinstance(value, dict) and {"name", "passed"} <= set(value):
            found.append(CheckResult.model_validate(value))
        elif isinstance(value, dict):
            found.extend(_find_checks(value))
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, dict) and {"name", "passed"} <= set(item):
                    found.append(CheckResult.model_validate(item))
    return found


def render_text(report: Report) -> str:
    """Header, a pass/fail table of every check found in the results, then all values."""
    payload = report.model_dump(by_alias=True, mode="json")
    lines = [
        f"command: {report.command}",
        f"status:  {'PASS' if report.passed else 'FAIL'}",
        f"inputs:  {report.inputs_digest[:16]}",
        "parameters: " + ", ".join(f"{k}={v}" for k, v in sorted(payload["parameters"].items())),
        "",
    ]
    checks = _find_checks(payload["results"])
    if checks:
        lines.append(checks_table(checks).to_string(index=False))
        lines.append("")
    rows = flatten(payload["results"])
    if rows:
        table = pd.DataFrame(rows, columns=["key", "value"])
        lines.append(table.to_string(index=False, max_colwidth=96))
    return "\n".join(lines) + "\n"

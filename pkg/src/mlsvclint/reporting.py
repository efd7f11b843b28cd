"""Report rendering (table, structured JSON, SARIF) and exit-code mapping."""

from __future__ import annotations

import json

from .findings import ALL_MISUSES, Finding, Report

FORMATS = ("table", "structured", "interchange")

TOOL_NAME = "mlsvclint"
TOOL_VERSION = "0.1.0"

_RULE_DESCRIPTIONS = {
    "batch_api_not_used": "A batch-capable service API is called once per item inside a loop.",
    "training_checkpoints_missing": "Cloud training runs without saving (or without restoring) checkpoints.",
    "early_stopping_unspecified": "Training or tuning runs without a configured early-stopping criterion.",
    "schema_mismatch_ignored": "Train and test dataset schemas are never compared.",
    "output_misinterpreted": "Only a subset of jointly-required service output fields is read.",
    "api_limits_mishandled": "Service calls are made without any rate-limit handling.",
    "drift_monitoring_ignored": "No data-drift monitoring accompanies the service integration.",
}


def render(report: Report, fmt: str = "table", include_timings: bool = False) -> str:
    """Render a report; timing values are opt-in so output stays reproducible."""
    if fmt == "table":
        return _render_table(report)
    if fmt == "structured":
        return _render_structured(report, include_timings)
    if fmt == "interchange":
        return _render_sarif(report)
    raise ValueError(f"unknown output format: {fmt!r} (expected one of {FORMATS})")


def _render_table(report: Report) -> str:
    counts = report.counts
    locations: dict[str, list[str]] = {code: [] for code in counts}
    for finding in report.findings:
        if finding.file is not None and len(locations[finding.misuse.code]) < 3:
            where = finding.file if finding.line is None else f"{finding.file}:{finding.line}"
            locations[finding.misuse.code].append(where)

    rows = [("misuse", "count", "first locations")]
    for misuse in ALL_MISUSES:
        rows.append(
            (misuse.code, str(counts[misuse.code]), ", ".join(locations[misuse.code]) or "-")
        )
    widths = [max(len(row[col]) for row in rows) for col in range(3)]
    lines = [f"{report.repo_name}  (catalog {report.kb_version})"]
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[col]) for col, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[col] for col in range(3)))
    lines.append(f"total findings: {report.total_findings}")
    return "\n".join(lines) + "\n"


def _render_structured(report: Report, include_timings: bool) -> str:
    doc = {
        "repo": report.repo_name,
        "kb_version": report.kb_version,
        "counts": report.counts,
        "findings": [f.as_dict() for f in report.findings],
        "timings": {k: round(v, 6) for k, v in sorted(report.timings.items())}
        if include_timings
        else {},
        "diagnostics": [d.as_dict() for d in report.diagnostics],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_structured(text: str) -> dict:
    """Inverse of the structured rendering (modulo timing values)."""
    return json.loads(text)


def _sarif_result(finding: Finding) -> dict:
    result = {
        "ruleId": finding.misuse.code,
        "level": "warning",
        "message": {"text": finding.evidence},
    }
    if finding.file is not None:
        region = {"startLine": finding.line} if finding.line is not None else {}
        location = {"physicalLocation": {"artifactLocation": {"uri": finding.file}}}
        if region:
            location["physicalLocation"]["region"] = region
        result["locations"] = [location]
    return result


def _render_sarif(report: Report) -> str:
    doc = {
        "$schema": "https://json.schemastore.org/sarif-2.1.0.json",
        "version": "2.1.0",
        "runs": [
            {
                "tool": {
                    "driver": {
                        "name": TOOL_NAME,
                        "version": TOOL_VERSION,
                        "informationUri": "https://example.invalid/mlsvclint",
                        "rules": [
                            {
                                "id": misuse.code,
                                "name": misuse.code,
                                "shortDescription": {"text": _RULE_DESCRIPTIONS[misuse.code]},
                            }
                            for misuse in ALL_MISUSES
                        ],
                    }
                },
                "results": [_sarif_result(f) for f in report.findings],
            }
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def exit_code(report: Report) -> int:
    """0 for a clean report, 1 when there is at least one finding."""
    return 1 if report.total_findings else 0

"""Shared result vocabulary: misuse identifiers, findings, diagnostics, reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping


class MisuseId(str, Enum):
    """The seven supported misuse types, with stable string codes for reports."""

    BATCH_API_NOT_USED = "batch_api_not_used"
    TRAINING_CHECKPOINTS_MISSING = "training_checkpoints_missing"
    EARLY_STOPPING_UNSPECIFIED = "early_stopping_unspecified"
    SCHEMA_MISMATCH_IGNORED = "schema_mismatch_ignored"
    OUTPUT_MISINTERPRETED = "output_misinterpreted"
    API_LIMITS_MISHANDLED = "api_limits_mishandled"
    DRIFT_MONITORING_IGNORED = "drift_monitoring_ignored"

    @property
    def code(self) -> str:
        return self.value

    @classmethod
    def from_code(cls, code: str) -> "MisuseId":
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"unknown misuse code: {code!r}") from None


ALL_MISUSES: tuple[MisuseId, ...] = tuple(sorted(MisuseId, key=lambda m: m.code))

SCOPE_CALL_SITE = "call_site"
SCOPE_PROJECT = "project"


@dataclass(frozen=True)
class Diagnostic:
    """One skipped file or line, with the pipeline stage that skipped it."""

    path: str
    stage: str
    reason: str
    line: int | None = None

    def as_dict(self) -> dict:
        return {"path": self.path, "stage": self.stage, "reason": self.reason, "line": self.line}


@dataclass(frozen=True)
class Finding:
    """One detected misuse occurrence.

    Call-site findings carry a file and an original line number; project-scope
    findings describe an absence and carry neither line nor (usually) file.
    """

    misuse: MisuseId
    file: str | None
    line: int | None
    evidence: str
    scope: str = SCOPE_CALL_SITE

    def __post_init__(self) -> None:
        if self.scope not in (SCOPE_CALL_SITE, SCOPE_PROJECT):
            raise ValueError(f"invalid finding scope: {self.scope!r}")
        if self.scope == SCOPE_CALL_SITE and (self.file is None or self.line is None):
            raise ValueError("call_site findings require both file and line")
        if self.scope == SCOPE_PROJECT and self.line is not None:
            raise ValueError("project findings must not carry a line")

    def sort_key(self) -> tuple:
        return (self.misuse.code, self.file or "", self.line or 0, self.evidence)

    def as_dict(self) -> dict:
        return {
            "misuse": self.misuse.code,
            "file": self.file,
            "line": self.line,
            "evidence": self.evidence,
            "scope": self.scope,
        }


def project_finding(misuse: MisuseId, evidence: str, file: str | None = None) -> Finding:
    return Finding(misuse=misuse, file=file, line=None, evidence=evidence, scope=SCOPE_PROJECT)


@dataclass
class Report:
    """Per-project aggregation of findings, with counts, timings, and diagnostics."""

    repo_name: str
    kb_version: str
    findings: tuple[Finding, ...] = ()
    timings: Mapping[str, float] = field(default_factory=dict)
    diagnostics: tuple[Diagnostic, ...] = ()

    def __post_init__(self) -> None:
        self.findings = tuple(sorted(self.findings, key=Finding.sort_key))
        self.diagnostics = tuple(self.diagnostics)

    @property
    def counts(self) -> dict[str, int]:
        counts = {m.code: 0 for m in ALL_MISUSES}
        for finding in self.findings:
            counts[finding.misuse.code] += 1
        return counts

    @property
    def total_findings(self) -> int:
        return len(self.findings)

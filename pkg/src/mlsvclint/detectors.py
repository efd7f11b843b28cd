"""The seven misuse detectors, as pure functions over the project model.

Every detector is total: anomalies never raise, they just fail to match.
Absence-style rules (checkpoints, early stopping, schema validation, rate
limits, drift) emit at most one project-scope finding; per-call rules (batch
use, output interpretation, save-without-restore) emit one finding per
distinct line. All detectors except output interpretation are gated on a
recognized provider, so non-ML projects produce no noise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import AmbiguousPattern
from .findings import (
    ALL_MISUSES,
    Finding,
    MisuseId,
    Report,
    SCOPE_CALL_SITE,
    project_finding,
)
from .knowledge_base import (
    KnowledgeBase,
    PatternEntry,
    entries_for_providers,
    lookup_batch_api,
    pattern_matches,
    segment_match,
)
from .model import (
    CallFact,
    CallGraph,
    DEFAULT_MAX_LOOP_DEPTH,
    ProjectModel,
    is_sleep_call,
    loop_reachable,
)


@dataclass(frozen=True)
class DetectorContext:
    """Everything a detector may read. The model and catalog are immutable."""

    model: ProjectModel
    kb: KnowledgeBase
    max_loop_depth: int = DEFAULT_MAX_LOOP_DEPTH


def _entries(ctx: DetectorContext, category: str) -> list[PatternEntry]:
    return entries_for_providers(ctx.kb, category, ctx.model.providers.providers)


def _matching_calls(
    calls: Sequence[CallFact], entries: Sequence[PatternEntry]
) -> list[tuple[CallFact, PatternEntry]]:
    """Call sites matched by name or by a keyword-argument pattern."""
    hits: list[tuple[CallFact, PatternEntry]] = []
    for call in calls:
        for entry in entries:
            if entry.match_kind == "dotted_call_name" or entry.match_kind == "import_prefix":
                if pattern_matches(entry, call.resolved_name):
                    hits.append((call, entry))
                    break
            elif entry.match_kind == "parameter_name":
                if any(pattern_matches(entry, name) for name in call.argument_names):
                    hits.append((call, entry))
                    break
    return hits


def _matching_imports(ctx: DetectorContext, category: str) -> list:
    entries = _entries(ctx, category)
    return [
        imp
        for imp in ctx.model.imports
        if any(
            pattern_matches(entry, candidate)
            for entry in entries
            for candidate in imp.dotted_candidates()
        )
    ]


def _site_sort_key(call: CallFact) -> tuple[str, int]:
    return (call.file, call.line)


# ---------------------------------------------------------------------------
# 1. batch API not used


def detect_batch_misuse(ctx: DetectorContext) -> list[Finding]:
    """Per-item service calls that execute inside a loop, per call site."""
    model = ctx.model
    if not model.providers:
        return []
    entries = _entries(ctx, "batch_single_item_api")
    findings: list[Finding] = []
    seen: set[tuple[str, int]] = set()
    for call in model.calls:
        entry = next((e for e in entries if pattern_matches(e, call.resolved_name)), None)
        if entry is None:
            continue
        if not loop_reachable(model.call_graph, call, ctx.max_loop_depth):
            continue
        key = (call.file, call.line)
        if key in seen:
            continue
        seen.add(key)
        try:
            batch = lookup_batch_api(ctx.kb, call.resolved_name, entry.provider)
        except AmbiguousPattern:
            batch = None
        if batch is not None:
            evidence = (
                f"'{call.last_segment}' is called per item inside a loop; "
                f"batch form: '{batch.batch_equivalent}'"
            )
        else:
            evidence = f"'{call.last_segment}' is called per item inside a loop"
        findings.append(
            Finding(
                misuse=MisuseId.BATCH_API_NOT_USED,
                file=call.file,
                line=call.line,
                evidence=evidence,
                scope=SCOPE_CALL_SITE,
            )
        )
    return sorted(findings, key=Finding.sort_key)


# ---------------------------------------------------------------------------
# 2. training checkpoints missing


def detect_missing_checkpoints(ctx: DetectorContext) -> list[Finding]:
    """Training without checkpoint persistence, or saves that are never restored."""
    model = ctx.model
    if not model.providers or not model.datasets.train_calls:
        return []
    saves = _matching_calls(model.calls, _entries(ctx, "checkpoint_save"))
    if not saves:
        return [
            project_finding(
                MisuseId.TRAINING_CHECKPOINTS_MISSING,
                "training calls are present but no checkpoint save call or "
                "checkpoint configuration was found",
            )
        ]
    restores = _matching_calls(model.calls, _entries(ctx, "checkpoint_restore"))
    if not restores:
        first = min((call for call, _ in saves), key=_site_sort_key)
        return [
            Finding(
                misuse=MisuseId.TRAINING_CHECKPOINTS_MISSING,
                file=first.file,
                line=first.line,
                evidence="checkpoints are saved but never restored",
                scope=SCOPE_CALL_SITE,
            )
        ]
    return []


# ---------------------------------------------------------------------------
# 3. early stopping unspecified


def detect_missing_early_stopping(ctx: DetectorContext) -> list[Finding]:
    """Training jobs with no early-stopping library or no configured criterion."""
    model = ctx.model
    if not model.providers or not model.datasets.train_calls:
        return []
    library_imports = _matching_imports(ctx, "early_stopping_library")
    if not library_imports:
        return [
            project_finding(
                MisuseId.EARLY_STOPPING_UNSPECIFIED,
                "training calls are present but no early-stopping library is imported",
            )
        ]

    parameter_entries = [
        e for e in _entries(ctx, "early_stopping_parameter") if e.match_kind == "parameter_name"
    ]
    policy_entries = [
        e for e in _entries(ctx, "early_stopping_parameter") if e.match_kind == "dotted_call_name"
    ]
    library_entries = _entries(ctx, "early_stopping_library")

    # "Training or tuning call": training entry points plus any call into an
    # early-stopping-capable library namespace.
    candidates = list(model.datasets.train_calls) + [
        c
        for c in model.calls
        if any(pattern_matches(e, c.resolved_name) for e in library_entries)
    ]
    configured = any(
        pattern_matches(entry, name)
        for call in candidates
        for name in call.argument_names
        for entry in parameter_entries
    ) or any(
        pattern_matches(entry, call.resolved_name)
        for call in model.calls
        for entry in policy_entries
    )
    if not configured:
        return [
            project_finding(
                MisuseId.EARLY_STOPPING_UNSPECIFIED,
                "an early-stopping library is imported but no stopping criterion "
                "is configured on any training or tuning call",
            )
        ]
    return []


# ---------------------------------------------------------------------------
# 4. schema mismatch ignored


def detect_schema_mismatch_ignored(ctx: DetectorContext) -> list[Finding]:
    """Train/test dataset usage without any schema-consistency check."""
    model = ctx.model
    if not model.providers or model.datasets.is_empty:
        return []

    if not _matching_imports(ctx, "schema_validation_library"):
        return [
            project_finding(
                MisuseId.SCHEMA_MISMATCH_IGNORED,
                "datasets are used but no schema-validation library is imported",
            )
        ]
    validation_sites = [
        call for call, _ in _matching_calls(model.calls, _entries(ctx, "schema_validation_call"))
    ]
    if not validation_sites:
        return [
            project_finding(
                MisuseId.SCHEMA_MISMATCH_IGNORED,
                "a schema-validation library is imported but never called",
            )
        ]

    train = model.datasets.train_symbols
    test = model.datasets.test_symbols
    for site in validation_sites:
        referenced = set(site.arg_names_all)
        if train & referenced and test & referenced:
            return []
        # Without resolvable split symbols, accept any two distinct datasets
        # handed to one validation call.
        if len(set(site.arg_names_top)) >= 2:
            return []
    return [
        project_finding(
            MisuseId.SCHEMA_MISMATCH_IGNORED,
            "schema validation is called but no call site compares a training "
            "dataset with a test dataset",
        )
    ]


# ---------------------------------------------------------------------------
# 5. output misinterpreted


def detect_output_misinterpretation(ctx: DetectorContext) -> list[Finding]:
    """Response fields that must be read together but are only partially read."""
    model = ctx.model
    findings: list[Finding] = []
    seen: set[tuple[str, int]] = set()
    for group in ctx.kb.output_groups:
        context_called = any(
            segment_match(group.api_context, call.resolved_name) for call in model.calls
        )
        if not context_called:
            continue
        accesses = [
            fact
            for fact in model.attribute_accesses
            if fact.attribute in group.required_fields
        ]
        accessed_fields = {fact.attribute for fact in accesses}
        if not accessed_fields:
            # No output accessor is used at all: nothing to misinterpret.
            continue
        missing = group.required_fields - accessed_fields
        if not missing:
            continue
        first = min(accesses, key=lambda fact: (fact.file, fact.line))
        key = (first.file, first.line)
        if key in seen:
            continue
        seen.add(key)
        findings.append(
            Finding(
                misuse=MisuseId.OUTPUT_MISINTERPRETED,
                file=first.file,
                line=first.line,
                evidence=(
                    f"only {sorted(accessed_fields)} of the output group "
                    f"{sorted(group.required_fields)} for '{group.api_context}' "
                    f"is read; never read: {sorted(missing)}"
                ),
                scope=SCOPE_CALL_SITE,
            )
        )
    return sorted(findings, key=Finding.sort_key)


# ---------------------------------------------------------------------------
# 6. API limits mishandled


def _ml_service_calls(ctx: DetectorContext) -> list[CallFact]:
    signatures = [
        e
        for e in ctx.kb.entries
        if e.category == "provider_signature" and e.provider in ctx.model.providers.providers
    ]
    return [
        c
        for c in ctx.model.calls
        if any(pattern_matches(e, c.resolved_name) for e in signatures)
    ]


def detect_api_limit_mishandling(ctx: DetectorContext) -> list[Finding]:
    """ML service calls with no rate-limit handling of any recognized shape."""
    model = ctx.model
    if not model.providers:
        return []
    ml_calls = _ml_service_calls(ctx)
    if not ml_calls and not model.http_calls:
        return []

    handling_entries = _entries(ctx, "rate_limit_handling_call")

    # (a) a rate-limit library is imported and actually used
    if _matching_imports(ctx, "rate_limit_library"):
        if any(
            pattern_matches(entry, call.resolved_name)
            for call in model.calls
            for entry in handling_entries
        ):
            return []

    # (b) a rate-limit exception is handled
    if any(
        pattern_matches(entry, handled.name)
        for handled in model.handled_exceptions
        for entry in handling_entries
    ):
        return []

    # (c) limit headers or parameters are inspected on HTTP requests
    header_entries = _entries(ctx, "rate_limit_header")
    for http in model.http_calls:
        keys = http.header_keys | http.param_keys
        if any(pattern_matches(entry, key) for entry in header_entries for key in keys):
            return []

    # (d) a retry construct encloses the service call
    if any(http.wrapped_in_retry for http in model.http_calls):
        return []
    sleep_loops: set[tuple[str, int]] = set()
    for call in model.calls:
        if is_sleep_call(call):
            sleep_loops.update((call.file, line) for line in call.loop_lines)
    retry_decorated = {
        fn.node_id
        for fn in model.functions
        if any(pattern_matches(e, dec) for e in handling_entries for dec in fn.decorators)
    }
    for call in ml_calls:
        if any((call.file, line) in sleep_loops for line in call.loop_lines):
            return []
        if CallGraph.site_node_id(call) in retry_decorated:
            return []

    return [
        project_finding(
            MisuseId.API_LIMITS_MISHANDLED,
            "ML service calls have no rate-limit handling (no retry/backoff "
            "library usage, rate-limit exception handling, limit headers, or "
            "retry loop)",
        )
    ]


# ---------------------------------------------------------------------------
# 7. drift monitoring ignored


def detect_drift_monitoring_ignored(ctx: DetectorContext) -> list[Finding]:
    """Provider usage without any data-drift monitoring."""
    model = ctx.model
    if not model.providers:
        return []
    if not _matching_imports(ctx, "drift_monitoring_library"):
        return [
            project_finding(
                MisuseId.DRIFT_MONITORING_IGNORED,
                "no data-drift monitoring library is imported",
            )
        ]
    drift_calls = _matching_calls(model.calls, _entries(ctx, "drift_monitoring_call"))
    if not drift_calls:
        return [
            project_finding(
                MisuseId.DRIFT_MONITORING_IGNORED,
                "a drift-monitoring library is imported but no monitor is "
                "instantiated or run",
            )
        ]
    return []


# ---------------------------------------------------------------------------
# orchestration

DETECTORS: Mapping[MisuseId, Callable[[DetectorContext], list[Finding]]] = {
    MisuseId.BATCH_API_NOT_USED: detect_batch_misuse,
    MisuseId.TRAINING_CHECKPOINTS_MISSING: detect_missing_checkpoints,
    MisuseId.EARLY_STOPPING_UNSPECIFIED: detect_missing_early_stopping,
    MisuseId.SCHEMA_MISMATCH_IGNORED: detect_schema_mismatch_ignored,
    MisuseId.OUTPUT_MISINTERPRETED: detect_output_misinterpretation,
    MisuseId.API_LIMITS_MISHANDLED: detect_api_limit_mishandling,
    MisuseId.DRIFT_MONITORING_IGNORED: detect_drift_monitoring_ignored,
}


def run_all(
    ctx: DetectorContext,
    selection: Iterable[MisuseId] | None = None,
    base_timings: Mapping[str, float] | None = None,
) -> Report:
    """Run the selected detectors and aggregate their findings into a report."""
    selected = tuple(sorted(set(selection if selection is not None else ALL_MISUSES),
                            key=lambda m: m.code))
    timings: dict[str, float] = dict(base_timings or {})
    findings: list[Finding] = []
    for misuse in selected:
        start = time.perf_counter()
        findings.extend(DETECTORS[misuse](ctx))
        timings[f"detect:{misuse.code}"] = time.perf_counter() - start
    timings["total"] = sum(timings.values()) if timings else 0.0
    return Report(
        repo_name=ctx.model.workspace.repo_name,
        kb_version=ctx.kb.version,
        findings=tuple(findings),
        timings=timings,
        diagnostics=ctx.model.skipped,
    )

"""File-backed catalog of ML cloud provider API patterns.

Every detector consults this catalog rather than hard-coding provider names,
so supporting a new service is an edit to a data file. The catalog is loaded
once, validated, and immutable afterwards; any number of detector runs may
read it concurrently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import yaml

from .errors import AmbiguousPattern, MalformedCatalog

CATEGORIES = frozenset(
    {
        "provider_signature",
        "batch_single_item_api",
        "training_call",
        "checkpoint_save",
        "checkpoint_restore",
        "early_stopping_library",
        "early_stopping_parameter",
        "schema_validation_library",
        "schema_validation_call",
        "drift_monitoring_library",
        "drift_monitoring_call",
        "rate_limit_library",
        "rate_limit_handling_call",
        "rate_limit_header",
        "ml_http_endpoint",
        "output_accessor",
    }
)

PROVIDERS = frozenset({"aws", "azure", "gcp", "any"})
CONCRETE_PROVIDERS = ("aws", "azure", "gcp")

MATCH_KINDS = frozenset(
    {
        "import_prefix",
        "dotted_call_name",
        "attribute_name",
        "parameter_name",
        "header_name",
        "url_substring",
    }
)

_DEFAULT_CATALOG_RESOURCE = "default_catalog.yaml"


@dataclass(frozen=True)
class PatternEntry:
    """One curated API pattern: what it is, whose it is, and how it matches."""

    category: str
    provider: str
    match_kind: str
    pattern: str
    is_regex: bool = False
    notes: str = ""


@dataclass(frozen=True)
class BatchApiEntry:
    """A per-item call together with the batch form named in fix hints."""

    provider: str
    single_item_call: str
    batch_equivalent: str
    notes: str = ""


@dataclass(frozen=True)
class OutputGroup:
    """Response fields that must be interpreted together for one API context."""

    provider: str
    api_context: str
    required_fields: frozenset[str]
    notes: str = ""


@dataclass(frozen=True)
class KnowledgeBase:
    version: str
    entries: tuple[PatternEntry, ...]
    batch_apis: tuple[BatchApiEntry, ...]
    output_groups: tuple[OutputGroup, ...]


# ---------------------------------------------------------------------------
# pattern matching


@lru_cache(maxsize=2048)
def _compiled(pattern: str) -> re.Pattern[str]:
    return re.compile(pattern)


def segment_match(pattern: str, candidate: str) -> bool:
    """Whole-segment match of a dotted pattern against a dotted name.

    ``detect_sentiment`` matches ``boto3.client.detect_sentiment`` but not
    ``comprehend.batch_detect_sentiment``: segments must align exactly.
    """
    if candidate == pattern:
        return True
    return (
        candidate.startswith(pattern + ".")
        or candidate.endswith("." + pattern)
        or ("." + pattern + ".") in candidate
    )


def pattern_matches(entry: PatternEntry, candidate: str) -> bool:
    """Apply one catalog entry to a candidate string per its match semantics."""
    if entry.is_regex:
        return _compiled(entry.pattern).fullmatch(candidate) is not None
    if entry.match_kind == "import_prefix":
        return candidate == entry.pattern or candidate.startswith(entry.pattern + ".")
    if entry.match_kind == "dotted_call_name":
        return segment_match(entry.pattern, candidate)
    if entry.match_kind == "header_name":
        return candidate.lower() == entry.pattern.lower()
    if entry.match_kind == "url_substring":
        return entry.pattern in candidate
    # attribute_name, parameter_name: exact
    return candidate == entry.pattern


# ---------------------------------------------------------------------------
# loading and validation


def default_catalog_text() -> str:
    """Raw text of the catalog embedded in the package (for --dump-kb)."""
    return resources.files("mlsvclint.data").joinpath(_DEFAULT_CATALOG_RESOURCE).read_text("utf-8")


def load_kb(path: str | Path | None = None) -> KnowledgeBase:
    """Load and validate a catalog file; ``None`` loads the embedded default."""
    if path is None:
        return _parse_catalog(default_catalog_text(), "<default catalog>")
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise MalformedCatalog(f"cannot read catalog: {exc}", path=str(path)) from exc
    return _parse_catalog(text, str(path))


def _parse_catalog(text: str, source: str) -> KnowledgeBase:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise MalformedCatalog(f"catalog does not parse: {exc}", path=source, line=line) from exc

    if not isinstance(data, dict):
        raise MalformedCatalog("catalog must be a mapping at the top level", path=source)
    unknown = set(data) - {"version", "entries", "batch_apis", "output_groups"}
    if unknown:
        raise MalformedCatalog(f"unknown top-level keys: {sorted(unknown)}", path=source)

    lines = _entry_lines(text)
    version = data.get("version")
    if not isinstance(version, str) or not version:
        raise MalformedCatalog("catalog must carry a non-empty string 'version'", path=source)

    entries = _parse_entries(data.get("entries") or [], lines.get("entries", []), source)
    batch_apis = _parse_batch_apis(data.get("batch_apis") or [], lines.get("batch_apis", []), source)
    output_groups = _parse_output_groups(
        data.get("output_groups") or [], lines.get("output_groups", []), source
    )

    kb = KnowledgeBase(
        version=version,
        entries=tuple(entries),
        batch_apis=tuple(batch_apis),
        output_groups=tuple(output_groups),
    )
    _validate_cross_references(kb, source)
    return kb


def _entry_lines(text: str) -> dict[str, list[int]]:
    """1-based line numbers of the items in each top-level sequence."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    result: dict[str, list[int]] = {}
    if not isinstance(root, yaml.MappingNode):
        return result
    for key_node, value_node in root.value:
        if isinstance(value_node, yaml.SequenceNode):
            result[key_node.value] = [item.start_mark.line + 1 for item in value_node.value]
    return result


def _item_line(lines: Sequence[int], index: int) -> int | None:
    return lines[index] if index < len(lines) else None


def _require_fields(raw: dict, required: dict[str, type], source: str, line: int | None, what: str) -> None:
    for name, typ in required.items():
        if name not in raw:
            raise MalformedCatalog(f"{what} is missing field {name!r}", path=source, line=line)
        if not isinstance(raw[name], typ):
            raise MalformedCatalog(
                f"{what} field {name!r} must be {typ.__name__}", path=source, line=line
            )


def _parse_entries(raw_entries: list, lines: Sequence[int], source: str) -> list[PatternEntry]:
    entries: list[PatternEntry] = []
    seen: dict[tuple[str, str, str], int | None] = {}
    for i, raw in enumerate(raw_entries):
        line = _item_line(lines, i)
        if not isinstance(raw, dict):
            raise MalformedCatalog("entry must be a mapping", path=source, line=line)
        _require_fields(
            raw,
            {"category": str, "provider": str, "match_kind": str, "pattern": str},
            source,
            line,
            "entry",
        )
        entry = PatternEntry(
            category=raw["category"],
            provider=raw["provider"],
            match_kind=raw["match_kind"],
            pattern=raw["pattern"],
            is_regex=bool(raw.get("is_regex", False)),
            notes=str(raw.get("notes", "")),
        )
        if entry.category not in CATEGORIES:
            raise MalformedCatalog(f"unknown category {entry.category!r}", path=source, line=line)
        if entry.provider not in PROVIDERS:
            raise MalformedCatalog(f"unknown provider {entry.provider!r}", path=source, line=line)
        if entry.match_kind not in MATCH_KINDS:
            raise MalformedCatalog(f"unknown match_kind {entry.match_kind!r}", path=source, line=line)
        if not entry.pattern:
            raise MalformedCatalog("entry pattern must be non-empty", path=source, line=line)
        if entry.category == "provider_signature" and entry.provider == "any":
            raise MalformedCatalog(
                "provider_signature entries must name a concrete provider", path=source, line=line
            )
        if entry.is_regex:
            try:
                _compiled(entry.pattern)
            except re.error as exc:
                raise MalformedCatalog(
                    f"pattern {entry.pattern!r} does not compile: {exc}", path=source, line=line
                ) from exc
        key = (entry.category, entry.provider, entry.pattern)
        if key in seen:
            raise MalformedCatalog(
                f"duplicate (category, provider, pattern) triple {key!r}", path=source, line=line
            )
        seen[key] = line
        entries.append(entry)

    if not any(e.category == "provider_signature" for e in entries):
        raise MalformedCatalog(
            "a catalog must define at least one provider_signature entry", path=source
        )
    return entries


def _parse_batch_apis(raw_items: list, lines: Sequence[int], source: str) -> list[BatchApiEntry]:
    items: list[BatchApiEntry] = []
    seen: set[tuple[str, str]] = set()
    for i, raw in enumerate(raw_items):
        line = _item_line(lines, i)
        if not isinstance(raw, dict):
            raise MalformedCatalog("batch_apis item must be a mapping", path=source, line=line)
        _require_fields(
            raw,
            {"provider": str, "single_item_call": str, "batch_equivalent": str},
            source,
            line,
            "batch_apis item",
        )
        item = BatchApiEntry(
            provider=raw["provider"],
            single_item_call=raw["single_item_call"],
            batch_equivalent=raw["batch_equivalent"],
            notes=str(raw.get("notes", "")),
        )
        if item.provider not in PROVIDERS:
            raise MalformedCatalog(f"unknown provider {item.provider!r}", path=source, line=line)
        if not item.single_item_call or not item.batch_equivalent:
            raise MalformedCatalog(
                "single_item_call and batch_equivalent must be non-empty", path=source, line=line
            )
        key = (item.provider, item.single_item_call)
        if key in seen:
            raise MalformedCatalog(f"duplicate batch API {key!r}", path=source, line=line)
        seen.add(key)
        items.append(item)
    return items


def _parse_output_groups(raw_items: list, lines: Sequence[int], source: str) -> list[OutputGroup]:
    groups: list[OutputGroup] = []
    for i, raw in enumerate(raw_items):
        line = _item_line(lines, i)
        if not isinstance(raw, dict):
            raise MalformedCatalog("output_groups item must be a mapping", path=source, line=line)
        _require_fields(
            raw, {"provider": str, "api_context": str, "required_fields": list}, source, line,
            "output_groups item",
        )
        fields = frozenset(str(f) for f in raw["required_fields"])
        group = OutputGroup(
            provider=raw["provider"],
            api_context=raw["api_context"],
            required_fields=fields,
            notes=str(raw.get("notes", "")),
        )
        if group.provider not in PROVIDERS:
            raise MalformedCatalog(f"unknown provider {group.provider!r}", path=source, line=line)
        if not group.api_context:
            raise MalformedCatalog("api_context must be non-empty", path=source, line=line)
        if len(group.required_fields) < 2:
            # A one-field group can never be violated by "using a subset".
            raise MalformedCatalog(
                f"output group for {group.api_context!r} needs at least two required fields",
                path=source,
                line=line,
            )
        groups.append(group)
    return groups


def _validate_cross_references(kb: KnowledgeBase, source: str) -> None:
    signature_providers = {
        e.provider for e in kb.entries if e.category == "provider_signature"
    }
    referenced = {b.provider for b in kb.batch_apis} | {g.provider for g in kb.output_groups}
    missing = {p for p in referenced if p != "any"} - signature_providers
    if missing:
        raise MalformedCatalog(
            f"providers {sorted(missing)} are referenced by batch_apis/output_groups "
            "but have no provider_signature entry",
            path=source,
        )


# ---------------------------------------------------------------------------
# queries


def patterns_for(kb: KnowledgeBase, category: str, provider: str) -> list[PatternEntry]:
    """All entries of ``category`` visible to ``provider``, in catalog order.

    A concrete provider sees its own entries plus ``any`` entries; querying
    with ``provider="any"`` returns every entry of the category.
    """
    if category not in CATEGORIES:
        raise ValueError(f"unknown category: {category!r}")
    if provider not in PROVIDERS:
        raise ValueError(f"unknown provider: {provider!r}")
    return [
        e
        for e in kb.entries
        if e.category == category
        and (provider == "any" or e.provider in (provider, "any"))
    ]


def lookup_batch_api(kb: KnowledgeBase, dotted_call: str, provider: str) -> BatchApiEntry | None:
    """The batch counterpart of a resolved call name, or ``None``.

    Matching is textual (whole-segment aligned), never fuzzy. Two matches in
    one lookup indicate a catalog bug and raise :class:`AmbiguousPattern`.
    """
    if provider not in PROVIDERS:
        raise ValueError(f"unknown provider: {provider!r}")
    matches = [
        b
        for b in kb.batch_apis
        if (provider == "any" or b.provider in (provider, "any"))
        and segment_match(b.single_item_call, dotted_call)
    ]
    if len(matches) > 1:
        raise AmbiguousPattern(
            f"{dotted_call!r} matches several batch API entries: "
            + ", ".join(f"{b.provider}:{b.single_item_call}" for b in matches)
        )
    return matches[0] if matches else None


def entries_for_providers(
    kb: KnowledgeBase, category: str, providers: Iterable[str]
) -> list[PatternEntry]:
    """Entries of ``category`` for any of the given providers, deduplicated."""
    wanted = set(providers)
    return [
        e
        for e in kb.entries
        if e.category == category and (e.provider == "any" or e.provider in wanted)
    ]

from __future__ import annotations

import pytest

from mlsvclint.errors import AmbiguousPattern, MalformedCatalog
from mlsvclint.knowledge_base import (
    CATEGORIES,
    PatternEntry,
    load_kb,
    lookup_batch_api,
    pattern_matches,
    patterns_for,
    segment_match,
)

MINIMAL = """\
version: "1"
entries:
  - {category: provider_signature, provider: azure, match_kind: import_prefix, pattern: azureml}
"""


def write_catalog(tmp_path, text):
    path = tmp_path / "catalog.yaml"
    path.write_text(text, "utf-8")
    return path


class TestDefaultCatalog:
    def test_loads_and_has_paper_named_provider_prefixes(self, kb):
        signatures = [e.pattern for e in kb.entries if e.category == "provider_signature"]
        for prefix in ("boto3", "azureml", "vertexai"):
            assert prefix in signatures

    def test_deterministic_load(self):
        assert load_kb() == load_kb()

    def test_every_category_is_known(self, kb):
        assert {e.category for e in kb.entries} <= CATEGORIES

    def test_checkpoint_save_patterns_exist_for_aws(self, kb):
        assert patterns_for(kb, "checkpoint_save", "aws")

    def test_any_provider_query_is_union_over_providers(self, kb):
        for category in sorted(CATEGORIES):
            everything = patterns_for(kb, category, "any")
            union: set = set()
            for provider in ("aws", "azure", "gcp"):
                union.update(patterns_for(kb, category, provider))
            assert union == set(everything)
            # catalog file order is preserved
            positions = [kb.entries.index(e) for e in everything]
            assert positions == sorted(positions)

    def test_provider_scoped_query_includes_any_entries(self, kb):
        drift_any = [e for e in patterns_for(kb, "drift_monitoring_library", "gcp")
                     if e.provider == "any"]
        assert drift_any


class TestLoadValidation:
    def test_empty_catalog_rejected(self, tmp_path):
        path = write_catalog(tmp_path, 'version: "1"\nentries: []\n')
        with pytest.raises(MalformedCatalog, match="provider_signature"):
            load_kb(path)

    def test_duplicate_triple_rejected_with_line(self, tmp_path):
        text = MINIMAL + (
            "  - {category: provider_signature, provider: azure, "
            "match_kind: import_prefix, pattern: azureml}\n"
        )
        path = write_catalog(tmp_path, text)
        with pytest.raises(MalformedCatalog, match="duplicate") as err:
            load_kb(path)
        assert err.value.line == 4

    def test_bad_regex_rejected(self, tmp_path):
        text = MINIMAL + (
            "  - {category: training_call, provider: any, match_kind: dotted_call_name, "
            "pattern: '([unclosed', is_regex: true}\n"
        )
        path = write_catalog(tmp_path, text)
        with pytest.raises(MalformedCatalog, match="compile"):
            load_kb(path)

    def test_empty_pattern_rejected(self, tmp_path):
        text = MINIMAL + (
            "  - {category: training_call, provider: any, match_kind: dotted_call_name, "
            "pattern: ''}\n"
        )
        path = write_catalog(tmp_path, text)
        with pytest.raises(MalformedCatalog, match="non-empty"):
            load_kb(path)

    def test_single_field_output_group_rejected(self, tmp_path):
        text = MINIMAL + (
            "output_groups:\n"
            "  - {provider: azure, api_context: analyze_sentiment, required_fields: [sentiment]}\n"
        )
        path = write_catalog(tmp_path, text)
        with pytest.raises(MalformedCatalog, match="two required fields"):
            load_kb(path)

    def test_batch_provider_without_signature_rejected(self, tmp_path):
        text = MINIMAL + (
            "batch_apis:\n"
            "  - {provider: gcp, single_item_call: predict, batch_equivalent: batch_predict}\n"
        )
        path = write_catalog(tmp_path, text)
        with pytest.raises(MalformedCatalog, match="gcp"):
            load_kb(path)

    def test_yaml_syntax_error_carries_line(self, tmp_path):
        path = write_catalog(tmp_path, 'version: "1"\nentries:\n  - {category: [unclosed\n')
        with pytest.raises(MalformedCatalog) as err:
            load_kb(path)
        assert err.value.line is not None

    def test_unknown_category_rejected(self, tmp_path):
        text = MINIMAL + (
            "  - {category: not_a_category, provider: any, match_kind: dotted_call_name, "
            "pattern: x}\n"
        )
        path = write_catalog(tmp_path, text)
        with pytest.raises(MalformedCatalog, match="unknown category"):
            load_kb(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(MalformedCatalog, match="cannot read"):
            load_kb(tmp_path / "absent.yaml")


class TestQueries:
    def test_patterns_for_empty_when_category_unpopulated(self, tmp_path):
        path = write_catalog(tmp_path, MINIMAL)
        small = load_kb(path)
        assert patterns_for(small, "drift_monitoring_library", "gcp") == []

    def test_patterns_for_rejects_unknown_category(self, kb):
        with pytest.raises(ValueError):
            patterns_for(kb, "no_such_category", "aws")

    def test_lookup_batch_api_azure_language_detection(self, kb):
        entry = lookup_batch_api(
            kb, "azure.ai.textanalytics.TextAnalyticsClient.detect_language", "azure"
        )
        assert entry is not None
        assert "detect_language" in entry.batch_equivalent

    def test_lookup_batch_api_non_ml_call(self, kb):
        assert lookup_batch_api(kb, "print", "azure") is None

    def test_lookup_batch_api_provider_scoping(self, kb):
        assert lookup_batch_api(kb, "client.Endpoint.predict", "gcp") is not None
        assert lookup_batch_api(kb, "client.Endpoint.predict", "aws") is None

    def test_lookup_batch_api_is_textual_not_fuzzy(self, kb):
        for name in ("detect_languages", "redetect_language", "batch_detect_sentiment",
                     "comprehend.detect_sentiments"):
            assert lookup_batch_api(kb, name, "any") is None

    def test_lookup_batch_api_ambiguity_is_reported(self, tmp_path):
        text = MINIMAL + (
            "batch_apis:\n"
            "  - {provider: azure, single_item_call: detect_language, batch_equivalent: a}\n"
            "  - {provider: azure, single_item_call: client.detect_language, batch_equivalent: b}\n"
        )
        path = write_catalog(tmp_path, text)
        small = load_kb(path)
        with pytest.raises(AmbiguousPattern):
            lookup_batch_api(small, "cog.client.detect_language", "azure")


class TestMatching:
    def test_segment_alignment(self):
        assert segment_match("detect_sentiment", "boto3.client.detect_sentiment")
        assert segment_match("Endpoint.predict", "aiplatform.Endpoint.predict")
        assert not segment_match("detect_sentiment", "c.batch_detect_sentiment")
        assert not segment_match("predict", "c.batch_predict")

    def test_import_prefix_literal(self):
        entry = PatternEntry("provider_signature", "azure", "import_prefix", "azure.ai")
        assert pattern_matches(entry, "azure.ai")
        assert pattern_matches(entry, "azure.ai.textanalytics")
        assert not pattern_matches(entry, "azure.aiml")

    def test_header_matching_is_case_insensitive(self):
        entry = PatternEntry("rate_limit_header", "any", "header_name", "Retry-After")
        assert pattern_matches(entry, "retry-after")

    def test_regex_is_anchored(self):
        entry = PatternEntry(
            "provider_signature", "gcp", "import_prefix", r"google\.cloud\.language(_v\d+)?(\..*)?",
            is_regex=True,
        )
        assert pattern_matches(entry, "google.cloud.language_v1")
        assert pattern_matches(entry, "google.cloud.language_v1.LanguageServiceClient")
        assert not pattern_matches(entry, "mygoogle.cloud.language_v1")

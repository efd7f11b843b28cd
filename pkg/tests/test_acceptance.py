"""Acceptance suite: one test per shipping criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion lines.
"""

from __future__ import annotations

import shutil
import time
from contextlib import contextmanager

from _generators import generate_call_graph_spec, generate_program
from conftest import LISTINGS, MANIFEST, write_project
from mlsvclint.evaluation import (
    CorpusProject,
    GroundTruth,
    GroundTruthRecord,
    generate_scaling_project,
    linear_fit,
    load_corpus_ground_truth,
    load_manifest,
    scan_project,
    score,
    time_pipeline,
)
from mlsvclint.findings import ALL_MISUSES, Finding, MisuseId, Report
from mlsvclint.model import loop_reachable
from mlsvclint.reporting import render
from test_model import graph_from_spec, oracle_reachable, probe_site


@contextmanager
def criterion(label: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] {label}: FAIL")
        raise
    print(f"[acceptance] {label}: PASS")


def test_c1_listing_fixtures(kb):
    with criterion("C1 listing fixtures"):
        started = time.perf_counter()

        listing1 = scan_project(LISTINGS / "listing1", kb=kb)
        batch = [f for f in listing1.findings if f.misuse is MisuseId.BATCH_API_NOT_USED]
        assert len(batch) == 1
        source = (LISTINGS / "listing1" / "text_analysis.py").read_text()
        expected_line = next(
            i for i, line in enumerate(source.split("\n"), start=1) if "detect_language" in line
        )
        assert batch[0].file == "text_analysis.py"
        assert batch[0].line == expected_line

        listing2 = scan_project(LISTINGS / "listing2_fix", kb=kb)
        assert listing2.counts["batch_api_not_used"] == 0

        listing3 = scan_project(LISTINGS / "listing3", kb=kb)
        assert listing3.counts["api_limits_mishandled"] == 1

        listing4 = scan_project(LISTINGS / "listing4_fix", kb=kb)
        assert listing4.counts["api_limits_mishandled"] == 0

        assert time.perf_counter() - started < 5.0


def test_c2_oracle_equivalence_on_synthetic_corpus(kb):
    with criterion("C2 corpus oracle equivalence"):
        started = time.perf_counter()
        projects = load_manifest(MANIFEST)
        assert len(projects) >= 21
        gt = load_corpus_ground_truth(projects)
        reports = [scan_project(p.path, kb=kb) for p in projects]
        metrics = score(reports, gt)
        for code, stats in metrics.per_misuse.items():
            assert stats.precision == 1.0, (code, stats)
            assert stats.recall == 1.0, (code, stats)
        assert time.perf_counter() - started < 30.0


def test_c3_provider_gate_on_generated_non_ml_programs(kb, tmp_path):
    with criterion("C3 provider gate on 100 generated programs"):
        for seed in range(100):
            project = write_project(
                tmp_path / f"gen{seed}", {"main.py": generate_program(seed)}
            )
            report = scan_project(project, kb=kb)
            assert report.total_findings == 0, (seed, report.findings)


def test_c4_loop_reachability_matches_enumeration():
    with criterion("C4 loop reachability vs exhaustive enumeration"):
        started = time.perf_counter()
        for seed in range(60):
            node_count, edges = generate_call_graph_spec(seed)
            _, _, graph = graph_from_spec((node_count, edges))
            for depth in range(5):
                for node in range(node_count):
                    expected = oracle_reachable(edges, f"fn{node}", depth)
                    assert loop_reachable(graph, probe_site(node), depth) is expected, (
                        seed,
                        depth,
                        node,
                    )
        assert time.perf_counter() - started < 10.0


def test_c5_sanitization_robustness(kb, tmp_path):
    with criterion("C5 sanitization robustness"):
        origin = MANIFEST.parent / "synthetic" / "schema_pos"
        clean = tmp_path / "clean"
        shutil.copytree(origin, clean)
        baseline = scan_project(clean, kb=kb)

        broken = tmp_path / "broken"
        shutil.copytree(origin, broken)
        (broken / "extra.py").write_text(
            "alpha = 1\n)\nbeta = 2\ngamma = (\ndelta = 3\n", "utf-8"
        )
        report = scan_project(broken, kb=kb)

        skipped_lines = {
            (d.path, d.line) for d in report.diagnostics if d.stage == "sanitize"
        }
        assert ("extra.py", 2) in skipped_lines
        assert ("extra.py", 4) in skipped_lines
        assert report.findings == baseline.findings


def test_c6_determinism_byte_identical_reports(kb):
    with criterion("C6 byte-identical structured reports"):
        projects = load_manifest(MANIFEST)

        def full_run() -> bytes:
            chunks = []
            for project in projects:
                report = scan_project(project.path, kb=kb)
                chunks.append(render(report, "structured"))
            return "\n".join(chunks).encode("utf-8")

        assert full_run() == full_run()


def test_c7_scaling_is_linear_and_fast(kb, tmp_path):
    with criterion("C7 linear scaling up to 20k LOC"):
        sizes = (100, 500, 1_000, 2_500, 5_000, 10_000, 20_000)
        projects = []
        for size in sizes:
            dest = tmp_path / f"scale_{size}"
            generate_scaling_project(dest, size, seed=size)
            projects.append(CorpusProject(f"scale_{size}", dest))
        records = time_pipeline(projects, repetitions=1, kb=kb)
        assert len(records) == len(sizes)
        fit = linear_fit([(r.lines_of_code, r.total) for r in records])
        assert fit.r_squared >= 0.8, fit
        largest = records[-1]
        assert largest.lines_of_code >= 20_000
        assert largest.total < 60.0, largest


def test_c8_metrics_arithmetic():
    with criterion("C8 metrics arithmetic"):
        annotated = tuple(("a.py", line) for line in range(10, 20))
        gt = GroundTruth(
            projects={
                "p": (GroundTruthRecord(MisuseId.BATCH_API_NOT_USED, 10, annotated),)
            }
        )
        findings = tuple(
            Finding(misuse=MisuseId.BATCH_API_NOT_USED, file="a.py", line=line, evidence="x")
            for line in range(10, 19)
        ) + (
            Finding(misuse=MisuseId.BATCH_API_NOT_USED, file="a.py", line=99, evidence="x"),
        )
        metrics = score([Report(repo_name="p", kb_version="1", findings=findings)], gt)
        stats = metrics.per_misuse["batch_api_not_used"]
        assert stats.precision == 0.9
        assert stats.recall == 0.9

        perfect_findings = tuple(
            Finding(misuse=MisuseId.BATCH_API_NOT_USED, file="a.py", line=line, evidence="x")
            for line in range(10, 20)
        )
        perfect = score(
            [Report(repo_name="p", kb_version="1", findings=perfect_findings)], gt
        )
        for code, stats in perfect.per_misuse.items():
            assert stats.precision == 1.0 and stats.recall == 1.0, code
        assert perfect.overall.f1 == 1.0
        assert {m.code for m in ALL_MISUSES} == set(perfect.per_misuse)

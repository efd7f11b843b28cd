"""Desk-scale evaluation harness: detection metrics and timing measurements.

Scores detector reports against hand-labeled annotations (precision, recall,
F1 per misuse and micro-averaged overall) and measures end-to-end analysis
time across a corpus so scaling behaviour can be regression-fitted.
"""

from __future__ import annotations

import json
import random
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .detectors import DetectorContext, run_all
from .errors import MalformedAnnotations
from .findings import ALL_MISUSES, MisuseId, Report
from .ingest import acquire
from .knowledge_base import KnowledgeBase, load_kb
from .model import DEFAULT_MAX_LOOP_DEPTH, build_model


# ---------------------------------------------------------------------------
# ground truth


@dataclass(frozen=True)
class GroundTruthRecord:
    misuse: MisuseId
    count: int
    locations: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class GroundTruth:
    """Expected occurrences per project, keyed by project name."""

    projects: Mapping[str, tuple[GroundTruthRecord, ...]]

    def records(self, project: str) -> tuple[GroundTruthRecord, ...]:
        return self.projects.get(project, ())


def load_ground_truth(
    path: str | Path, known_projects: Iterable[str] | None = None
) -> GroundTruth:
    """Load one annotation file: ``{project: [{misuse, count, locations[]}]}``."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedAnnotations(f"{path}: {exc}") from exc
    if raw is None or raw == {}:
        return GroundTruth(projects={})
    if not isinstance(raw, dict):
        raise MalformedAnnotations(f"{path}: annotations must map project names to record lists")

    known = set(known_projects) if known_projects is not None else None
    projects: dict[str, tuple[GroundTruthRecord, ...]] = {}
    for project, entries in raw.items():
        if known is not None and project not in known:
            raise MalformedAnnotations(f"{path}: unknown project {project!r}")
        if not isinstance(entries, list):
            raise MalformedAnnotations(f"{path}: records for {project!r} must be a list")
        records = []
        for entry in entries:
            if not isinstance(entry, dict) or "misuse" not in entry:
                raise MalformedAnnotations(f"{path}: bad record {entry!r} in {project!r}")
            try:
                misuse = MisuseId.from_code(str(entry["misuse"]))
            except ValueError as exc:
                raise MalformedAnnotations(f"{path}: {exc}") from exc
            count = int(entry.get("count", 0))
            locations = tuple(
                (str(loc["file"]), int(loc["line"])) for loc in entry.get("locations", [])
            )
            if locations and len(locations) != count:
                raise MalformedAnnotations(
                    f"{path}: {project!r}/{misuse.code}: {count} expected but "
                    f"{len(locations)} locations listed"
                )
            records.append(GroundTruthRecord(misuse=misuse, count=count, locations=locations))
        projects[project] = tuple(records)
    return GroundTruth(projects=projects)


@dataclass(frozen=True)
class CorpusProject:
    name: str
    path: Path
    labels: Path | None = None


def load_manifest(path: str | Path) -> tuple[CorpusProject, ...]:
    """Load a corpus manifest: ``{"projects": [{"path": ..., "labels": ...}]}``."""
    path = Path(path)
    raw = json.loads(path.read_text("utf-8"))
    projects = []
    for item in raw.get("projects", []):
        project_path = (path.parent / item["path"]).resolve()
        labels = item.get("labels")
        projects.append(
            CorpusProject(
                name=item.get("name", project_path.name),
                path=project_path,
                labels=(path.parent / labels).resolve() if labels else None,
            )
        )
    return tuple(projects)


def load_corpus_ground_truth(projects: Sequence[CorpusProject]) -> GroundTruth:
    merged: dict[str, tuple[GroundTruthRecord, ...]] = {}
    names = {p.name for p in projects}
    for project in projects:
        if project.labels is None:
            merged.setdefault(project.name, ())
            continue
        part = load_ground_truth(project.labels, known_projects=names)
        merged.update(part.projects)
    return GroundTruth(projects=merged)


# ---------------------------------------------------------------------------
# scoring


@dataclass(frozen=True)
class MisuseStats:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0

    def plus(self, tp: int = 0, fp: int = 0, fn: int = 0) -> "MisuseStats":
        return MisuseStats(self.tp + tp, self.fp + fp, self.fn + fn)


@dataclass(frozen=True)
class Metrics:
    per_misuse: Mapping[str, MisuseStats]
    overall: MisuseStats


def score(reports: Sequence[Report], gt: GroundTruth) -> Metrics:
    """Compare reports with annotations.

    Call-site misuses (an annotation that lists locations, or detections that
    carry lines) are matched by (file, line); absence-style misuses are
    matched by presence. Overall numbers are micro-averaged.
    """
    for report in reports:
        if report.repo_name not in gt.projects:
            raise MalformedAnnotations(f"no annotations for project {report.repo_name!r}")

    stats = {m.code: MisuseStats() for m in ALL_MISUSES}
    for report in reports:
        expected = {rec.misuse: rec for rec in gt.records(report.repo_name)}
        detected: dict[MisuseId, list] = {}
        for finding in report.findings:
            detected.setdefault(finding.misuse, []).append(finding)

        for misuse in ALL_MISUSES:
            record = expected.get(misuse)
            found = detected.get(misuse, [])
            expected_locations = set(record.locations) if record else set()
            if expected_locations or any(f.line is not None for f in found):
                found_locations = {
                    (f.file, f.line) for f in found if f.file is not None and f.line is not None
                }
                tp = len(found_locations & expected_locations)
                fp = len(found_locations - expected_locations)
                fn = len(expected_locations - found_locations)
                stats[misuse.code] = stats[misuse.code].plus(tp=tp, fp=fp, fn=fn)
            else:
                expected_present = bool(record and record.count > 0)
                found_present = bool(found)
                if found_present and expected_present:
                    stats[misuse.code] = stats[misuse.code].plus(tp=1)
                elif found_present:
                    stats[misuse.code] = stats[misuse.code].plus(fp=1)
                elif expected_present:
                    stats[misuse.code] = stats[misuse.code].plus(fn=1)

    overall = MisuseStats(
        tp=sum(s.tp for s in stats.values()),
        fp=sum(s.fp for s in stats.values()),
        fn=sum(s.fn for s in stats.values()),
    )
    return Metrics(per_misuse=stats, overall=overall)


# ---------------------------------------------------------------------------
# scanning and timing


def scan_project(
    path: str | Path,
    kb: KnowledgeBase | None = None,
    max_loop_depth: int = DEFAULT_MAX_LOOP_DEPTH,
    selection: Iterable[MisuseId] | None = None,
) -> Report:
    """Run the full pipeline over one local project directory."""
    kb = kb if kb is not None else load_kb()
    workspace = acquire(path)
    started = time.perf_counter()
    model = build_model(workspace, kb)
    build_seconds = time.perf_counter() - started
    ctx = DetectorContext(model=model, kb=kb, max_loop_depth=max_loop_depth)
    return run_all(ctx, selection, base_timings={"model_build": build_seconds})


@dataclass(frozen=True)
class TimingRecord:
    project: str
    lines_of_code: int
    file_count: int
    per_detector: Mapping[str, float]
    total: float

    def as_dict(self) -> dict:
        return {
            "project": self.project,
            "loc": self.lines_of_code,
            "files": self.file_count,
            "per_detector": dict(sorted(self.per_detector.items())),
            "total": self.total,
        }


def time_pipeline(
    projects: Sequence[CorpusProject],
    repetitions: int = 3,
    kb: KnowledgeBase | None = None,
) -> tuple[TimingRecord, ...]:
    """Median end-to-end analysis time per project; failures are skipped."""
    kb = kb if kb is not None else load_kb()
    records: list[TimingRecord] = []
    for project in projects:
        totals: list[float] = []
        detector_runs: dict[str, list[float]] = {}
        loc = 0
        files = 0
        failed = False
        for _ in range(max(repetitions, 1)):
            started = time.perf_counter()
            try:
                workspace = acquire(project.path)
                model = build_model(workspace, kb)
                report = run_all(DetectorContext(model=model, kb=kb))
            except Exception as exc:
                print(f"timing skipped {project.name}: {exc}")
                failed = True
                break
            totals.append(time.perf_counter() - started)
            loc = model.loc()
            files = len(model.file_set.source_files) + len(model.file_set.notebooks)
            for key, value in report.timings.items():
                if key.startswith("detect:"):
                    detector_runs.setdefault(key, []).append(value)
        if failed or not totals:
            continue
        records.append(
            TimingRecord(
                project=project.name,
                lines_of_code=loc,
                file_count=files,
                per_detector={k: statistics.median(v) for k, v in detector_runs.items()},
                total=statistics.median(totals),
            )
        )
    return tuple(records)


def render_timing_rows(records: Sequence[TimingRecord]) -> str:
    """Timing series as JSON lines, ready for regression fitting elsewhere."""
    return "\n".join(json.dumps(r.as_dict(), sort_keys=True) for r in records) + (
        "\n" if records else ""
    )


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(points: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares line through (x, y) points with coefficient of determination."""
    if len(points) < 2:
        raise ValueError("need at least two points to fit a line")
    n = len(points)
    mean_x = sum(x for x, _ in points) / n
    mean_y = sum(y for _, y in points) / n
    var_x = sum((x - mean_x) ** 2 for x, _ in points)
    if var_x == 0:
        raise ValueError("x values are constant; nothing to fit")
    cov = sum((x - mean_x) * (y - mean_y) for x, y in points)
    slope = cov / var_x
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in points)
    ss_tot = sum((y - mean_y) ** 2 for _, y in points)
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return FitResult(slope=slope, intercept=intercept, r_squared=r_squared)


# ---------------------------------------------------------------------------
# synthetic project generation (for scaling runs)

_GEN_HELPERS = """\
def transform_{i}(values):
    total = 0
    for value in values:
        total += value * {k} + 1
    return total


def collect_{i}(rows):
    result = []
    for row in rows:
        if row % {k} == 0:
            result.append(transform_{i}([row, row + 1]))
    return result
"""

_GEN_SERVICE = """\
import openai


def complete_{i}(prompts):
    replies = []
    for prompt in prompts:
        reply = openai.Completion.create(engine="text", prompt=prompt, max_tokens=32)
        replies.append(reply)
    return replies
"""


def generate_scaling_project(dest: str | Path, target_loc: int, seed: int = 0) -> int:
    """Write a synthetic project of roughly ``target_loc`` lines; returns its LOC.

    Every project imports a provider SDK and calls it inside loops so the
    detectors (including loop reachability) do representative work.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    written = 0
    module = 0
    while written < target_loc:
        blocks = [f'"""Generated workload module {module}."""']
        if module % 4 == 0:
            blocks.append(_GEN_SERVICE.format(i=module))
        lines_needed = min(target_loc - written, 240)
        i = 0
        while sum(b.count("\n") + 1 for b in blocks) < lines_needed:
            blocks.append(_GEN_HELPERS.format(i=f"{module}_{i}", k=rng.randint(2, 9)))
            i += 1
        text = "\n\n".join(block.rstrip("\n") for block in blocks) + "\n"
        (dest / f"module_{module:03d}.py").write_text(text, "utf-8")
        written += len(text.rstrip("\n").split("\n"))
        module += 1
    return written

"""Command-line entry point: scan a project tree or repository URL."""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
import time
from pathlib import Path

from .detectors import DetectorContext, run_all
from .errors import MlsvclintError
from .findings import ALL_MISUSES, MisuseId
from .ingest import acquire
from .knowledge_base import default_catalog_text, load_kb
from .model import DEFAULT_MAX_LOOP_DEPTH, build_model
from .reporting import FORMATS, exit_code, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlsvclint",
        description=(
            "Detect machine-learning cloud service misuses (batch API use, "
            "checkpoints, early stopping, schema validation, output "
            "interpretation, rate limits, drift monitoring) in Python projects."
        ),
    )
    parser.add_argument(
        "source",
        nargs="?",
        help="project directory or repository URL to scan",
    )
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default="table",
        help="report format (default: table)",
    )
    parser.add_argument(
        "--misuses",
        metavar="CODES",
        help="comma-separated misuse codes to run (default: all seven)",
    )
    parser.add_argument("--kb", metavar="PATH", help="pattern catalog file (default: embedded)")
    parser.add_argument(
        "--max-loop-depth",
        type=int,
        default=DEFAULT_MAX_LOOP_DEPTH,
        metavar="N",
        help="call-chain depth for loop reachability (default: %(default)s)",
    )
    parser.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    parser.add_argument(
        "--scratch-dir", metavar="PATH", help="directory for temporary clones of URLs"
    )
    parser.add_argument(
        "--dump-kb", action="store_true", help="print the active pattern catalog and exit"
    )
    parser.add_argument(
        "--dump-model",
        action="store_true",
        help="dump a project-model summary to stderr after analysis",
    )
    parser.add_argument(
        "--timings", action="store_true", help="include wall-clock timings in the report"
    )
    return parser


def _parse_selection(parser: argparse.ArgumentParser, text: str | None) -> tuple[MisuseId, ...]:
    if text is None:
        return ALL_MISUSES
    selected = []
    for code in text.split(","):
        code = code.strip()
        if not code:
            continue
        try:
            selected.append(MisuseId.from_code(code))
        except ValueError:
            parser.error(
                f"unknown misuse code {code!r}; known codes: "
                + ", ".join(m.code for m in ALL_MISUSES)
            )
    if not selected:
        parser.error("--misuses selected nothing")
    return tuple(selected)


def _model_summary(model) -> dict:
    return {
        "repo": model.workspace.repo_name,
        "files": {
            "source": len(model.file_set.source_files),
            "notebooks": len(model.file_set.notebooks),
            "config": len(model.file_set.config_files),
        },
        "loc": model.loc(),
        "imports": len(model.imports),
        "calls": len(model.calls),
        "functions": len(model.functions),
        "call_graph_edges": len(model.call_graph.edges),
        "providers": sorted(model.providers.providers),
        "datasets": {
            "split_sites": len(model.datasets.split_sites),
            "train_calls": len(model.datasets.train_calls),
            "eval_calls": len(model.datasets.eval_calls),
        },
        "http_calls": len(model.http_calls),
        "config_entries": len(model.config.entries),
        "env_var_reads": len(model.config.env_var_reads),
        "skipped": len(model.skipped),
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.dump_kb:
            if args.kb:
                print(Path(args.kb).read_text("utf-8"), end="")
            else:
                print(default_catalog_text(), end="")
            return 0

        if not args.source:
            parser.error("a project source is required unless --dump-kb is given")

        kb = load_kb(args.kb)
        selection = _parse_selection(parser, args.misuses)
        scratch = args.scratch_dir or tempfile.gettempdir()

        workspace = acquire(args.source, scratch_dir=scratch)
        started = time.perf_counter()
        model = build_model(workspace, kb)
        model_build_seconds = time.perf_counter() - started

        if args.dump_model:
            print(json.dumps(_model_summary(model), indent=2), file=sys.stderr)

        ctx = DetectorContext(model=model, kb=kb, max_loop_depth=args.max_loop_depth)
        report = run_all(ctx, selection, base_timings={"model_build": model_build_seconds})

        for diagnostic in report.diagnostics:
            print(json.dumps(diagnostic.as_dict(), sort_keys=True), file=sys.stderr)

        text = render(report, args.format, include_timings=args.timings)
        if args.out:
            Path(args.out).write_text(text, "utf-8")
        else:
            print(text, end="")
        return exit_code(report)
    except MlsvclintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:  # pragma: no cover - setuptools console script
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entrypoint()

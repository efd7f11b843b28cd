from __future__ import annotations

from pathlib import Path

import pytest

from mlsvclint.ingest import LineOrigin, SourceText, acquire, split_lines
from mlsvclint.knowledge_base import KnowledgeBase, load_kb
from mlsvclint.model import ParsedUnit, ProjectModel, build_model, parse_unit

REPO_ROOT = Path(__file__).resolve().parents[1]
CORPUS = REPO_ROOT / "corpus"
LISTINGS = CORPUS / "listings"
SYNTHETIC = CORPUS / "synthetic"
MANIFEST = CORPUS / "manifest.json"


@pytest.fixture(scope="session")
def kb() -> KnowledgeBase:
    return load_kb()


def source_text(text: str, path: str = "unit.py") -> SourceText:
    lines = split_lines(text)
    return SourceText(
        path=path,
        text=text,
        origin=tuple(LineOrigin(line=i + 1) for i in range(len(lines))),
    )


def parse_source(text: str, path: str = "unit.py") -> ParsedUnit:
    return parse_unit(source_text(text, path))


def write_project(root: Path, files: dict[str, str]) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        target = root / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, "utf-8")
    return root


def model_from_files(tmp_path: Path, files: dict[str, str], kb: KnowledgeBase) -> ProjectModel:
    project = write_project(tmp_path / "project", files)
    return build_model(acquire(project), kb)

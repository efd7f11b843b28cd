"""Static-analysis linter for ML cloud service misuses in Python projects."""

from .detectors import DetectorContext, DETECTORS, run_all
from .errors import (
    AcquisitionFailed,
    AmbiguousPattern,
    EmptyModel,
    MalformedAnnotations,
    MalformedCatalog,
    MalformedNotebook,
    MlsvclintError,
    Unsalvageable,
)
from .findings import ALL_MISUSES, Diagnostic, Finding, MisuseId, Report
from .ingest import Workspace, acquire, discover_files, extract_notebook_code, sanitize_source
from .knowledge_base import (
    KnowledgeBase,
    load_kb,
    lookup_batch_api,
    patterns_for,
)
from .model import ProjectModel, build_model, loop_reachable
from .reporting import exit_code, render

__version__ = "0.1.0"

__all__ = [
    "ALL_MISUSES",
    "AcquisitionFailed",
    "AmbiguousPattern",
    "DETECTORS",
    "DetectorContext",
    "Diagnostic",
    "EmptyModel",
    "Finding",
    "KnowledgeBase",
    "MalformedAnnotations",
    "MalformedCatalog",
    "MalformedNotebook",
    "MisuseId",
    "MlsvclintError",
    "ProjectModel",
    "Report",
    "Unsalvageable",
    "Workspace",
    "acquire",
    "build_model",
    "discover_files",
    "exit_code",
    "extract_notebook_code",
    "load_kb",
    "lookup_batch_api",
    "loop_reachable",
    "patterns_for",
    "render",
    "run_all",
    "sanitize_source",
    "__version__",
]

"""Exception hierarchy shared across the package."""

from __future__ import annotations


class MlsvclintError(Exception):
    """Base class for all tool errors."""


class MalformedCatalog(MlsvclintError):
    """A pattern catalog failed to parse or validate.

    ``path`` names the catalog file and ``line`` the offending entry when the
    position is known.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class AmbiguousPattern(MlsvclintError):
    """Two catalog entries matched where at most one is allowed."""


class AcquisitionFailed(MlsvclintError):
    """A project source (local path or repository URL) could not be obtained."""


class MalformedNotebook(MlsvclintError):
    """A notebook file does not follow the notebook interchange format."""


class Unsalvageable(MlsvclintError):
    """Sanitization removed every line of a source unit without reaching valid code."""


class EmptyModel(MlsvclintError):
    """No source unit in the project survived extraction and sanitization."""


class MalformedAnnotations(MlsvclintError):
    """A ground-truth annotation file failed validation."""

from __future__ import annotations

import ast
import json
import subprocess

import pytest

from conftest import source_text, write_project
from mlsvclint.errors import AcquisitionFailed, MalformedNotebook, Unsalvageable
from mlsvclint.ingest import (
    acquire,
    discover_files,
    extract_notebook_code,
    read_source,
    sanitize_source,
    split_lines,
)


class TestAcquire:
    def test_local_directory(self, tmp_path):
        project = write_project(tmp_path / "listing1", {"a.py": "x = 1\n"})
        ws = acquire(project)
        assert ws.origin == "local"
        assert ws.repo_name == "listing1"
        assert ws.root.is_dir()

    def test_missing_path(self, tmp_path):
        with pytest.raises(AcquisitionFailed):
            acquire(tmp_path / "nope")

    def test_plain_file_is_rejected(self, tmp_path):
        f = tmp_path / "one.py"
        f.write_text("x = 1\n")
        with pytest.raises(AcquisitionFailed, match="not a directory"):
            acquire(f)

    def test_clone_from_local_bare_repository(self, tmp_path):
        upstream = write_project(tmp_path / "upstream", {"main.py": "print('hi')\n"})
        bare = tmp_path / "origin.git"
        subprocess.run(["git", "init", "--bare", "-q", str(bare)], check=True)
        subprocess.run(["git", "init", "-q"], cwd=upstream, check=True)
        subprocess.run(["git", "add", "main.py"], cwd=upstream, check=True)
        subprocess.run(
            ["git", "-c", "user.email=t@t", "-c", "user.name=t", "commit", "-qm", "init"],
            cwd=upstream,
            check=True,
        )
        subprocess.run(["git", "push", "-q", str(bare), "HEAD:master"], cwd=upstream, check=True)

        ws = acquire(f"file://{bare}", scratch_dir=tmp_path / "scratch")
        assert ws.origin == "cloned"
        assert ws.repo_name == "origin"
        assert (ws.root / "main.py").exists()

    def test_unreachable_url(self, tmp_path):
        with pytest.raises(AcquisitionFailed, match="clone"):
            acquire(f"file://{tmp_path}/missing.git", scratch_dir=tmp_path / "s")


class TestDiscover:
    def test_counts_by_kind(self, tmp_path, kb):
        project = write_project(
            tmp_path / "p",
            {
                "a.py": "",
                "b.py": "",
                "sub/c.py": "",
                "note.ipynb": "{}",
                ".env": "KEY=1",
            },
        )
        fs = discover_files(acquire(project))
        assert (len(fs.source_files), len(fs.notebooks), len(fs.config_files)) == (3, 1, 1)

    def test_empty_directory(self, tmp_path):
        (tmp_path / "empty").mkdir()
        fs = discover_files(acquire(tmp_path / "empty"))
        assert fs.source_files == () and fs.notebooks == () and fs.config_files == ()

    def test_vcs_and_hidden_directories_excluded(self, tmp_path):
        project = write_project(
            tmp_path / "p",
            {".git/hook.py": "", ".venv/lib.py": "", "__pycache__/x.py": "", "real.py": ""},
        )
        fs = discover_files(acquire(project))
        assert [str(p) for p in fs.source_files] == ["real.py"]

    def test_lexicographic_order(self, tmp_path):
        project = write_project(tmp_path / "p", {"b.py": "", "a.py": "", "sub/a.py": ""})
        fs = discover_files(acquire(project))
        names = [str(p) for p in fs.source_files]
        assert names == sorted(names)


def make_notebook(cells) -> str:
    return json.dumps({"cells": cells, "nbformat": 4, "nbformat_minor": 5, "metadata": {}})


class TestNotebookExtraction:
    def test_two_code_cells_concatenated(self, tmp_path):
        nb = tmp_path / "n.ipynb"
        nb.write_text(
            make_notebook(
                [
                    {"cell_type": "code", "source": "a = 1\nb = 2\nc = 3"},
                    {"cell_type": "markdown", "source": "# notes"},
                    {"cell_type": "code", "source": ["d = 4\n", "e = 5\n", "f = 6\n"]},
                ]
            )
        )
        st = extract_notebook_code(nb, "n.ipynb")
        assert len(split_lines(st.text)) == 6
        cells = [o.cell for o in st.origin]
        assert set(cells) == {0, 2}
        assert [o.cell_line for o in st.origin if o.cell == 2] == [1, 2, 3]

    def test_markdown_only_notebook_is_empty(self, tmp_path):
        nb = tmp_path / "n.ipynb"
        nb.write_text(make_notebook([{"cell_type": "markdown", "source": "hello"}]))
        st = extract_notebook_code(nb)
        assert st.text == ""
        assert st.origin == ()

    def test_magic_lines_are_dropped_and_recorded(self, tmp_path):
        nb = tmp_path / "n.ipynb"
        nb.write_text(
            make_notebook(
                [
                    {"cell_type": "code", "source": "x = 1"},
                    {"cell_type": "code", "source": "!pip install pandas\ny = 2"},
                ]
            )
        )
        st = extract_notebook_code(nb, "n.ipynb")
        assert "pip install" not in st.text
        assert len(st.dropped) == 1
        assert st.dropped[0].stage == "notebook-extract"
        assert "cell 1" in st.dropped[0].reason
        # the surviving second-cell line keeps its notebook position
        assert st.origin[-1].cell == 1 and st.origin[-1].cell_line == 2

    def test_malformed_notebook(self, tmp_path):
        nb = tmp_path / "broken.ipynb"
        nb.write_text("not json at all")
        with pytest.raises(MalformedNotebook):
            extract_notebook_code(nb)

    def test_notebook_without_cells_key(self, tmp_path):
        nb = tmp_path / "broken.ipynb"
        nb.write_text("{}")
        with pytest.raises(MalformedNotebook):
            extract_notebook_code(nb)


class TestSanitize:
    def test_valid_file_unchanged(self):
        st = source_text("x = 1\nfor i in range(3):\n    print(i)\n")
        cleaned, skipped = sanitize_source(st)
        assert cleaned.text == st.text
        assert skipped == ()

    def test_stray_bracket_line_removed(self):
        st = source_text("x = 1\n)\ny = 2\n")
        cleaned, skipped = sanitize_source(st)
        assert [o.line for o in skipped] == [2]
        ast.parse(cleaned.text)
        assert "y = 2" in cleaned.text

    def test_broken_block_opener_keeps_suite(self):
        st = source_text("def broken(:\n    value = compute()\n    return value\n")
        cleaned, skipped = sanitize_source(st)
        ast.parse(cleaned.text)
        assert [o.line for o in skipped] == [1]
        assert "compute()" in cleaned.text
        assert cleaned.origin[0].placeholder

    def test_binary_garbage_is_unsalvageable(self, tmp_path):
        blob = tmp_path / "junk.py"
        blob.write_bytes(bytes(range(256)) * 4)
        st = read_source(blob, "junk.py")
        with pytest.raises(Unsalvageable):
            sanitize_source(st)

    def test_originally_empty_file_is_fine(self):
        cleaned, skipped = sanitize_source(source_text(""))
        assert cleaned.text == "" and skipped == ()

    def test_line_map_soundness(self):
        original = "good = 1\n)\nalso_good = 2\nmore(\nlast = 3\n"
        st = source_text(original)
        cleaned, skipped = sanitize_source(st)
        original_lines = split_lines(original)
        for index, origin in enumerate(cleaned.origin):
            if not origin.placeholder:
                assert split_lines(cleaned.text)[index] == original_lines[origin.line - 1]

    def test_retained_plus_skipped_never_exceeds_original(self):
        original = "a = 1\n(\n)\nb = 2\n"
        st = source_text(original)
        cleaned, skipped = sanitize_source(st)
        retained = sum(1 for o in cleaned.origin if not o.placeholder)
        assert retained + len(skipped) <= len(split_lines(original))

    def test_deterministic(self):
        st = source_text("x = 1\n)\ndef broken(:\n    y = 2\nz = 3\n")
        first = sanitize_source(st)
        second = sanitize_source(st)
        assert first == second

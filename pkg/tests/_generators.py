"""Deterministic random generators for property-style tests.

Program texts use a deliberately non-ML identifier pool so that generated
projects never match provider signatures or catalog call patterns.
"""

from __future__ import annotations

import random

_FUNC_NAMES = [
    "combine_rows",
    "scale_values",
    "render_chunk",
    "pack_items",
    "walk_tree",
    "tally_groups",
    "mergesort_step",
    "load_targets",
]

_DOTTED_CALLS = [
    "json.dumps",
    "math.sqrt",
    "os.path.join",
    "collections.OrderedDict",
]

_IMPORT_LINES = ["import json", "import math", "import os", "import collections"]


def _call_stmt(rng: random.Random, indent: str, local_funcs: list[str]) -> str:
    target = rng.choice(local_funcs + _DOTTED_CALLS) if local_funcs else rng.choice(_DOTTED_CALLS)
    args = ", ".join(str(rng.randint(0, 9)) for _ in range(rng.randint(0, 2)))
    return f"{indent}{target}({args})"


def _block(rng: random.Random, indent: str, depth: int, local_funcs: list[str]) -> list[str]:
    lines: list[str] = []
    for _ in range(rng.randint(1, 3)):
        kind = rng.choice(
            ["call", "assign", "for", "while", "if", "comp"] if depth > 0 else ["call", "assign"]
        )
        if kind == "call":
            lines.append(_call_stmt(rng, indent, local_funcs))
        elif kind == "assign":
            lines.append(f"{indent}value_{rng.randint(0, 9)} = {rng.randint(0, 99)}")
        elif kind == "comp":
            inner = rng.choice(local_funcs + ["str"]) if local_funcs else "str"
            lines.append(
                f"{indent}items_{rng.randint(0, 9)} = "
                f"[{inner}(v) for v in range({rng.randint(1, 5)})]"
            )
        elif kind == "for":
            lines.append(f"{indent}for index_{depth} in range({rng.randint(1, 5)}):")
            lines.extend(_block(rng, indent + "    ", depth - 1, local_funcs))
        elif kind == "while":
            lines.append(f"{indent}while value_{rng.randint(0, 9)} < {rng.randint(1, 9)}:")
            lines.extend(_block(rng, indent + "    ", depth - 1, local_funcs))
            lines.append(f"{indent}    break")
        elif kind == "if":
            lines.append(f"{indent}if value_{rng.randint(0, 9)} > {rng.randint(0, 9)}:")
            lines.extend(_block(rng, indent + "    ", depth - 1, local_funcs))
    return lines


def generate_program(seed: int) -> str:
    """A syntactically valid program with loops, nesting, and non-ML calls."""
    rng = random.Random(seed)
    lines: list[str] = []
    lines.extend(rng.sample(_IMPORT_LINES, rng.randint(1, 3)))
    lines.append("value_0 = 0")
    defined: list[str] = []
    for _ in range(rng.randint(1, 4)):
        name = rng.choice([n for n in _FUNC_NAMES if n not in defined] or _FUNC_NAMES)
        if name in defined:
            name = f"{name}_{len(defined)}"
        lines.append("")
        lines.append(f"def {name}(arg=0):")
        body = _block(rng, "    ", rng.randint(0, 3), defined)
        lines.extend(body or ["    pass"])
        lines.append("    return arg")
        defined.append(name)
    lines.append("")
    lines.extend(_block(rng, "", rng.randint(0, 2), defined))
    return "\n".join(lines) + "\n"


def generate_call_graph_spec(seed: int) -> tuple[int, list[tuple[int, int, bool]]]:
    """A random graph over <= 12 functions: (node count, edges as (caller, callee, in_loop))."""
    rng = random.Random(seed)
    node_count = rng.randint(2, 12)
    edges: list[tuple[int, int, bool]] = []
    for caller in range(node_count):
        for callee in range(node_count):
            if caller != callee and rng.random() < 0.2:
                edges.append((caller, callee, rng.random() < 0.35))
    return node_count, edges

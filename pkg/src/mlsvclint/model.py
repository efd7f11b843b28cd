"""Project model construction: syntax facts, call graph, and usage detection.

Sanitized sources are parsed with the standard ``ast`` module into flat fact
lists (imports, calls, attribute accesses, function definitions), which the
builders below assemble into an immutable project model that every detector
reads. Name resolution is deliberately shallow: import aliases are expanded
and receiver variables are resolved one assignment step back when bound from
a constructor-style call, with no type inference beyond that.
"""

from __future__ import annotations

import ast
import configparser
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Mapping, Sequence

import yaml

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version shim
    import tomli as tomllib

from .errors import EmptyModel, MalformedNotebook, Unsalvageable
from .findings import Diagnostic
from .ingest import (
    FileSet,
    SourceText,
    Workspace,
    discover_files,
    extract_notebook_code,
    read_source,
    sanitize_source,
    split_lines,
)
from .knowledge_base import KnowledgeBase, PatternEntry, pattern_matches, patterns_for, segment_match

MODULE_SCOPE = "<module>"
EXTERNAL_SCOPE = "<external>"

DEFAULT_MAX_LOOP_DEPTH = 3

_ENV_READ_CALLS = ("os.getenv", "os.environ.get")
_HTTP_VERBS = ("get", "post", "put", "patch", "delete", "head", "options")
_HTTP_CLIENT_PREFIXES = ("requests", "httpx")
_HTTP_CLIENT_RECEIVERS = ("Session", "Client", "AsyncClient", "ClientSession")


# ---------------------------------------------------------------------------
# fact types


@dataclass(frozen=True)
class ImportFact:
    module_path: str
    imported_name: str | None
    alias: str | None
    file: str
    line: int

    def dotted_candidates(self) -> tuple[str, ...]:
        """Names this import brings into play, for pattern matching."""
        if self.imported_name and self.imported_name != "*":
            return (self.module_path, f"{self.module_path}.{self.imported_name}")
        return (self.module_path,)


@dataclass(frozen=True)
class CallFact:
    resolved_name: str
    receiver_chain: tuple[str, ...]
    argument_names: tuple[str, ...]  # keyword argument names
    positional_arity: int
    file: str
    line: int
    enclosing_function: str | None
    lexical_loop_depth: int
    loop_lines: tuple[int, ...] = ()  # start lines of enclosing for/while loops
    arg_names_top: tuple[str, ...] = ()  # bare names passed directly as arguments
    arg_names_all: tuple[str, ...] = ()  # every name referenced inside arguments
    arg_strings: tuple[str, ...] = ()  # top-level string literal arguments
    kw_strings: tuple[tuple[str, str], ...] = ()  # kwarg -> string literal value
    kw_dict_keys: tuple[tuple[str, tuple[str, ...]], ...] = ()  # kwarg -> literal dict keys

    def kw_string(self, name: str) -> str | None:
        for key, value in self.kw_strings:
            if key == name:
                return value
        return None

    def dict_keys(self, name: str) -> tuple[str, ...]:
        for key, keys in self.kw_dict_keys:
            if key == name:
                return keys
        return ()

    @property
    def last_segment(self) -> str:
        return self.resolved_name.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class AttributeAccessFact:
    base_expression_key: str
    attribute: str
    file: str
    line: int


@dataclass(frozen=True)
class FunctionNode:
    qualified_name: str
    file: str
    span: tuple[int, int]
    decorators: tuple[str, ...] = ()
    calls_inside_loops: frozenset[str] = frozenset()

    @property
    def node_id(self) -> str:
        return f"{self.file}::{self.qualified_name}"


@dataclass(frozen=True)
class LoopSpan:
    file: str
    line: int
    end_line: int
    kind: str  # "for" | "while" | "comprehension"


@dataclass(frozen=True)
class HandledException:
    name: str
    file: str
    line: int


@dataclass(frozen=True)
class TupleAssignment:
    targets: tuple[str, ...]
    resolved_call: str
    file: str
    line: int


@dataclass(frozen=True)
class EnvVarRead:
    name: str
    file: str
    line: int


@dataclass(frozen=True)
class ConfigEntry:
    key: str
    value: str
    file: str
    line: int


@dataclass(frozen=True)
class ConfigModel:
    entries: tuple[ConfigEntry, ...] = ()
    env_var_reads: tuple[EnvVarRead, ...] = ()


@dataclass(frozen=True)
class DatasetUsage:
    split_sites: tuple[CallFact, ...] = ()
    train_calls: tuple[CallFact, ...] = ()
    eval_calls: tuple[CallFact, ...] = ()
    train_symbols: frozenset[str] = frozenset()
    test_symbols: frozenset[str] = frozenset()

    @property
    def is_empty(self) -> bool:
        return not (self.split_sites or self.train_calls or self.eval_calls)


@dataclass(frozen=True)
class HttpCallFact:
    method: str | None
    url_literal: str | None
    header_keys: frozenset[str]
    param_keys: frozenset[str]
    wrapped_in_retry: bool
    file: str
    line: int


@dataclass(frozen=True)
class ProviderSet:
    providers: frozenset[str] = frozenset()
    evidence: tuple[tuple[str, object], ...] = ()

    def __bool__(self) -> bool:
        return bool(self.providers)


@dataclass(frozen=True)
class ParsedUnit:
    source: SourceText
    imports: tuple[ImportFact, ...]
    calls: tuple[CallFact, ...]
    attribute_accesses: tuple[AttributeAccessFact, ...]
    functions: tuple[FunctionNode, ...]
    loops: tuple[LoopSpan, ...]
    env_reads: tuple[EnvVarRead, ...]
    handled_exceptions: tuple[HandledException, ...]
    tuple_assignments: tuple[TupleAssignment, ...]


# ---------------------------------------------------------------------------
# per-unit parsing


class _FactCollector(ast.NodeVisitor):
    """Single traversal gathering all per-unit facts.

    Loop depth is lexical within the enclosing function: entering a nested
    ``def`` starts a fresh frame, comprehensions count as one loop each, and
    decorator/default expressions are evaluated in the enclosing scope.
    """

    def __init__(self, source: SourceText):
        self.source = source
        self.file = source.path
        self.aliases: dict[str, str] = {}
        self.assignments: dict[str, str] = {}
        self.imports: list[ImportFact] = []
        self.calls: list[CallFact] = []
        self.attribute_accesses: list[AttributeAccessFact] = []
        self.functions: list[FunctionNode] = []
        self.loops: list[LoopSpan] = []
        self.env_reads: list[EnvVarRead] = []
        self.handled_exceptions: list[HandledException] = []
        self.tuple_assignments: list[TupleAssignment] = []
        self._qual_stack: list[str] = []
        self._func_stack: list[str] = []
        self._frames: list[list[LoopSpan]] = [[]]
        self._loop_calls: dict[str, set[str]] = {}

    # -- helpers

    def _line(self, node: ast.AST) -> int:
        lineno = getattr(node, "lineno", 1)
        origin = self.source.origin[min(lineno, len(self.source.origin)) - 1]
        return origin.line

    def _enclosing(self) -> str | None:
        return self._func_stack[-1] if self._func_stack else None

    def _dotted(self, node: ast.AST) -> str | None:
        if isinstance(node, ast.Name):
            return self.assignments.get(node.id) or self.aliases.get(node.id) or node.id
        if isinstance(node, ast.Attribute):
            base = self._dotted(node.value)
            return f"{base}.{node.attr}" if base else node.attr
        if isinstance(node, ast.Call):
            return self._dotted(node.func)
        return None

    def _receiver_chain(self, node: ast.AST) -> tuple[str, ...]:
        parts: list[str] = []
        current = node
        while isinstance(current, ast.Attribute):
            parts.append(current.attr)
            current = current.value
        if isinstance(current, ast.Name):
            parts.append(current.id)
        return tuple(reversed(parts))

    # -- imports

    def visit_Import(self, node: ast.Import) -> None:
        for alias in node.names:
            self.imports.append(
                ImportFact(
                    module_path=alias.name,
                    imported_name=None,
                    alias=alias.asname,
                    file=self.file,
                    line=self._line(node),
                )
            )
            if alias.asname:
                self.aliases[alias.asname] = alias.name

    def visit_ImportFrom(self, node: ast.ImportFrom) -> None:
        module = "." * node.level + (node.module or "")
        for alias in node.names:
            self.imports.append(
                ImportFact(
                    module_path=module,
                    imported_name=alias.name,
                    alias=alias.asname,
                    file=self.file,
                    line=self._line(node),
                )
            )
            if alias.name != "*":
                bound = alias.asname or alias.name
                self.aliases[bound] = f"{module}.{alias.name}" if module else alias.name

    # -- scopes

    def _visit_function(self, node: ast.FunctionDef | ast.AsyncFunctionDef) -> None:
        # Decorators and defaults run in the enclosing scope.
        for dec in node.decorator_list:
            self.visit(dec)
        for default in list(node.args.defaults) + [d for d in node.args.kw_defaults if d]:
            self.visit(default)

        self._qual_stack.append(node.name)
        qualified = ".".join(self._qual_stack)
        self._func_stack.append(qualified)
        self._frames.append([])
        self._loop_calls.setdefault(qualified, set())
        for stmt in node.body:
            self.visit(stmt)
        self._frames.pop()
        self._func_stack.pop()
        self._qual_stack.pop()

        decorators = tuple(d for d in (self._dotted(dec) for dec in node.decorator_list) if d)
        self.functions.append(
            FunctionNode(
                qualified_name=qualified,
                file=self.file,
                span=(self._line(node), self._end_line(node)),
                decorators=decorators,
                calls_inside_loops=frozenset(self._loop_calls.get(qualified, ())),
            )
        )

    def _end_line(self, node: ast.AST) -> int:
        end = getattr(node, "end_lineno", None) or getattr(node, "lineno", 1)
        origin = self.source.origin[min(end, len(self.source.origin)) - 1]
        return origin.line

    visit_FunctionDef = _visit_function
    visit_AsyncFunctionDef = _visit_function

    def visit_ClassDef(self, node: ast.ClassDef) -> None:
        for dec in node.decorator_list:
            self.visit(dec)
        self._qual_stack.append(node.name)
        for stmt in node.body:
            self.visit(stmt)
        self._qual_stack.pop()

    # -- loops

    def _visit_loop(self, node: ast.AST, kind: str) -> None:
        span = LoopSpan(
            file=self.file, line=self._line(node), end_line=self._end_line(node), kind=kind
        )
        self.loops.append(span)
        self._frames[-1].append(span)
        self.generic_visit(node)
        self._frames[-1].pop()

    def visit_For(self, node: ast.For) -> None:
        self._visit_loop(node, "for")

    def visit_AsyncFor(self, node: ast.AsyncFor) -> None:
        self._visit_loop(node, "for")

    def visit_While(self, node: ast.While) -> None:
        self._visit_loop(node, "while")

    def visit_ListComp(self, node: ast.ListComp) -> None:
        self._visit_loop(node, "comprehension")

    def visit_SetComp(self, node: ast.SetComp) -> None:
        self._visit_loop(node, "comprehension")

    def visit_DictComp(self, node: ast.DictComp) -> None:
        self._visit_loop(node, "comprehension")

    def visit_GeneratorExp(self, node: ast.GeneratorExp) -> None:
        self._visit_loop(node, "comprehension")

    # -- assignments

    def visit_Assign(self, node: ast.Assign) -> None:
        if isinstance(node.value, ast.Call):
            resolved = self._dotted(node.value.func)
            if resolved:
                if len(node.targets) == 1 and isinstance(node.targets[0], ast.Name):
                    self.assignments[node.targets[0].id] = resolved
                elif len(node.targets) == 1 and isinstance(node.targets[0], (ast.Tuple, ast.List)):
                    elements = node.targets[0].elts
                    if all(isinstance(e, ast.Name) for e in elements):
                        self.tuple_assignments.append(
                            TupleAssignment(
                                targets=tuple(e.id for e in elements),
                                resolved_call=resolved,
                                file=self.file,
                                line=self._line(node),
                            )
                        )
        self.generic_visit(node)

    # -- calls, attribute reads, subscripts, exception handlers

    def visit_Call(self, node: ast.Call) -> None:
        resolved = self._dotted(node.func)
        if resolved is None:
            # Callable computed from a subscript or similar: fall back to the
            # attribute chain so suffix patterns still apply.
            chain = self._receiver_chain(node.func)
            resolved = ".".join(chain) if chain else "<unknown>"

        kw_names = tuple(kw.arg for kw in node.keywords if kw.arg)
        top_names: list[str] = []
        strings: list[str] = []
        kw_strings: list[tuple[str, str]] = []
        kw_dict_keys: list[tuple[str, tuple[str, ...]]] = []
        # Every name in the whole call expression, so chained forms like
        # infer(X_train).validate(X_test) count as referencing both.
        all_names = [n.id for n in ast.walk(node) if isinstance(n, ast.Name)]

        for arg in node.args:
            if isinstance(arg, ast.Name):
                top_names.append(arg.id)
            if isinstance(arg, ast.Constant) and isinstance(arg.value, str):
                strings.append(arg.value)
        for kw in node.keywords:
            if isinstance(kw.value, ast.Name):
                top_names.append(kw.value.id)
            if kw.arg and isinstance(kw.value, ast.Constant) and isinstance(kw.value.value, str):
                kw_strings.append((kw.arg, kw.value.value))
            if kw.arg and isinstance(kw.value, ast.Dict):
                keys = tuple(
                    k.value
                    for k in kw.value.keys
                    if isinstance(k, ast.Constant) and isinstance(k.value, str)
                )
                if keys:
                    kw_dict_keys.append((kw.arg, keys))

        frame = self._frames[-1]
        fact = CallFact(
            resolved_name=resolved,
            receiver_chain=self._receiver_chain(node.func),
            argument_names=kw_names,
            positional_arity=len(node.args),
            file=self.file,
            line=self._line(node),
            enclosing_function=self._enclosing(),
            lexical_loop_depth=len(frame),
            loop_lines=tuple(s.line for s in frame if s.kind in ("for", "while")),
            arg_names_top=tuple(top_names),
            arg_names_all=tuple(all_names),
            arg_strings=tuple(strings),
            kw_strings=tuple(kw_strings),
            kw_dict_keys=tuple(kw_dict_keys),
        )
        self.calls.append(fact)
        if fact.lexical_loop_depth > 0 and fact.enclosing_function:
            self._loop_calls.setdefault(fact.enclosing_function, set()).add(resolved)

        self._record_env_read(fact, node)

        # The call target itself is a call fact, not an attribute read.
        if isinstance(node.func, ast.Attribute):
            self.visit(node.func.value)
        else:
            self.visit(node.func)
        for arg in node.args:
            self.visit(arg)
        for kw in node.keywords:
            self.visit(kw.value)

    def _record_env_read(self, fact: CallFact, node: ast.Call) -> None:
        if any(segment_match(pattern, fact.resolved_name) for pattern in _ENV_READ_CALLS):
            if node.args and isinstance(node.args[0], ast.Constant) and isinstance(
                node.args[0].value, str
            ):
                self.env_reads.append(
                    EnvVarRead(name=node.args[0].value, file=self.file, line=fact.line)
                )

    def visit_Attribute(self, node: ast.Attribute) -> None:
        base = self._dotted(node.value) or _short_expr(node.value)
        self.attribute_accesses.append(
            AttributeAccessFact(
                base_expression_key=base,
                attribute=node.attr,
                file=self.file,
                line=self._line(node),
            )
        )
        self.generic_visit(node)

    def visit_Subscript(self, node: ast.Subscript) -> None:
        # Dict-style provider responses: a constant string key reads a field.
        if isinstance(node.slice, ast.Constant) and isinstance(node.slice.value, str):
            base = self._dotted(node.value) or _short_expr(node.value)
            self.attribute_accesses.append(
                AttributeAccessFact(
                    base_expression_key=base,
                    attribute=node.slice.value,
                    file=self.file,
                    line=self._line(node),
                )
            )
            resolved = self._dotted(node.value)
            if resolved == "os.environ":
                self.env_reads.append(
                    EnvVarRead(name=node.slice.value, file=self.file, line=self._line(node))
                )
        self.generic_visit(node)

    def visit_ExceptHandler(self, node: ast.ExceptHandler) -> None:
        names: list[ast.AST] = []
        if isinstance(node.type, ast.Tuple):
            names.extend(node.type.elts)
        elif node.type is not None:
            names.append(node.type)
        for expr in names:
            dotted = self._dotted(expr)
            if dotted:
                self.handled_exceptions.append(
                    HandledException(name=dotted, file=self.file, line=self._line(node))
                )
        self.generic_visit(node)


def _short_expr(node: ast.AST, limit: int = 60) -> str:
    try:
        text = ast.unparse(node)
    except Exception:  # pragma: no cover - unparse is total on parser output
        text = "<expr>"
    return text if len(text) <= limit else text[: limit - 3] + "..."


def parse_unit(st: SourceText) -> ParsedUnit:
    """Extract all syntax facts from one sanitized source unit."""
    try:
        tree = ast.parse(st.text)
    except SyntaxError as exc:  # sanitize_source guarantees this cannot happen
        raise AssertionError(f"unsanitized unit reached the parser: {st.path}: {exc}") from exc

    collector = _FactCollector(st)
    collector.visit(tree)
    line_count = len(split_lines(st.text))
    module_node = FunctionNode(
        qualified_name=MODULE_SCOPE,
        file=st.path,
        span=(1, max(line_count, 1)),
        calls_inside_loops=frozenset(collector._loop_calls.get(MODULE_SCOPE, ())),
    )
    return ParsedUnit(
        source=st,
        imports=tuple(collector.imports),
        calls=tuple(collector.calls),
        attribute_accesses=tuple(collector.attribute_accesses),
        functions=tuple(collector.functions) + (module_node,),
        loops=tuple(collector.loops),
        env_reads=tuple(collector.env_reads),
        handled_exceptions=tuple(collector.handled_exceptions),
        tuple_assignments=tuple(collector.tuple_assignments),
    )


# ---------------------------------------------------------------------------
# call graph


@dataclass(frozen=True)
class CallEdge:
    caller: str  # node id
    callee: str  # node id
    in_loop: bool
    site: CallFact


class CallGraph:
    """Caller/callee edges over defined functions plus external sentinels.

    Callee resolution tries an exact qualified-name match first (same file
    preferred), then a unique match on the final name segment; anything still
    ambiguous or undefined points at an external sentinel node.
    """

    def __init__(self, nodes: Mapping[str, FunctionNode | None], edges: Sequence[CallEdge]):
        self.nodes: dict[str, FunctionNode | None] = dict(nodes)
        self.edges: tuple[CallEdge, ...] = tuple(edges)
        incoming: dict[str, list[CallEdge]] = {}
        for edge in self.edges:
            incoming.setdefault(edge.callee, []).append(edge)
        self._incoming = {k: tuple(v) for k, v in incoming.items()}

    def incoming(self, node_id: str) -> tuple[CallEdge, ...]:
        return self._incoming.get(node_id, ())

    @staticmethod
    def site_node_id(site: CallFact) -> str:
        return f"{site.file}::{site.enclosing_function or MODULE_SCOPE}"


def build_call_graph(
    functions: Sequence[FunctionNode], calls: Sequence[CallFact]
) -> CallGraph:
    nodes: dict[str, FunctionNode | None] = {fn.node_id: fn for fn in functions}
    by_qualname: dict[str, list[FunctionNode]] = {}
    by_last_segment: dict[str, list[FunctionNode]] = {}
    for fn in functions:
        if fn.qualified_name == MODULE_SCOPE:
            continue
        by_qualname.setdefault(fn.qualified_name, []).append(fn)
        by_last_segment.setdefault(fn.qualified_name.rsplit(".", 1)[-1], []).append(fn)

    def resolve_callee(site: CallFact) -> str:
        exact = by_qualname.get(site.resolved_name, [])
        if exact:
            same_file = [fn for fn in exact if fn.file == site.file]
            pick = same_file or exact
            if len(pick) == 1:
                return pick[0].node_id
            return f"{EXTERNAL_SCOPE}::{site.resolved_name}"
        suffix = by_last_segment.get(site.last_segment, [])
        if suffix:
            same_file = [fn for fn in suffix if fn.file == site.file]
            pick = same_file if len(same_file) == 1 else suffix
            if len(pick) == 1:
                return pick[0].node_id
        return f"{EXTERNAL_SCOPE}::{site.resolved_name}"

    edges: list[CallEdge] = []
    for site in calls:
        caller_id = CallGraph.site_node_id(site)
        if caller_id not in nodes:
            nodes[caller_id] = None
        callee_id = resolve_callee(site)
        if callee_id not in nodes:
            nodes[callee_id] = None
        edges.append(
            CallEdge(
                caller=caller_id,
                callee=callee_id,
                in_loop=site.lexical_loop_depth > 0,
                site=site,
            )
        )
    return CallGraph(nodes, edges)


def loop_reachable(cg: CallGraph, site: CallFact, max_depth: int = DEFAULT_MAX_LOOP_DEPTH) -> bool:
    """Whether a call site executes inside a loop, directly or via callers.

    True when the site is lexically inside a loop, or when a chain of at most
    ``max_depth`` call edges leads from an in-loop call into the function
    containing the site (intermediate edges need not themselves be in loops).
    """
    if site.lexical_loop_depth > 0:
        return True
    if max_depth <= 0:
        return False
    target = CallGraph.site_node_id(site)
    distance = {target: 0}
    frontier = [target]
    while frontier:
        next_frontier: list[str] = []
        for node_id in frontier:
            steps = distance[node_id]
            for edge in cg.incoming(node_id):
                # Taking this edge closes a chain of steps + 1 calls.
                if edge.in_loop and steps + 1 <= max_depth:
                    return True
                if edge.caller not in distance and steps + 1 <= max_depth - 1:
                    distance[edge.caller] = steps + 1
                    next_frontier.append(edge.caller)
        frontier = next_frontier
    return False


# ---------------------------------------------------------------------------
# providers, datasets, HTTP, configuration


def detect_providers(
    imports: Sequence[ImportFact], calls: Sequence[CallFact], kb: KnowledgeBase
) -> ProviderSet:
    signatures = [e for e in kb.entries if e.category == "provider_signature"]
    providers: set[str] = set()
    evidence: list[tuple[str, object]] = []
    for imp in imports:
        for entry in signatures:
            if any(pattern_matches(entry, cand) for cand in imp.dotted_candidates()):
                providers.add(entry.provider)
                evidence.append((entry.provider, imp))
                break
    for call in calls:
        for entry in signatures:
            if pattern_matches(entry, call.resolved_name):
                providers.add(entry.provider)
                evidence.append((entry.provider, call))
                break
    return ProviderSet(providers=frozenset(providers), evidence=tuple(evidence))


def training_role(entry: PatternEntry) -> str:
    """Role marker of a training_call entry (split, train, or eval)."""
    for token in entry.notes.replace(";", " ").split():
        if token.startswith("role="):
            return token[len("role="):]
    return "train"


def detect_datasets(
    calls: Sequence[CallFact],
    kb: KnowledgeBase,
    tuple_assignments: Sequence[TupleAssignment] = (),
) -> DatasetUsage:
    entries = patterns_for(kb, "training_call", "any")
    split_entries = [e for e in entries if training_role(e) == "split"]
    train_entries = [e for e in entries if training_role(e) == "train"]
    eval_entries = [e for e in entries if training_role(e) == "eval"]

    def matching(group: list[PatternEntry]) -> tuple[CallFact, ...]:
        return tuple(
            c for c in calls if any(pattern_matches(e, c.resolved_name) for e in group)
        )

    split_sites = matching(split_entries)
    train_symbols: set[str] = set()
    test_symbols: set[str] = set()
    for assignment in tuple_assignments:
        if any(pattern_matches(e, assignment.resolved_call) for e in split_entries):
            # scikit-learn convention: (train, test, train, test, ...)
            for index, name in enumerate(assignment.targets):
                (train_symbols if index % 2 == 0 else test_symbols).add(name)

    return DatasetUsage(
        split_sites=split_sites,
        train_calls=matching(train_entries),
        eval_calls=matching(eval_entries),
        train_symbols=frozenset(train_symbols),
        test_symbols=frozenset(test_symbols),
    )


def _http_client_patterns() -> tuple[str, ...]:
    patterns = ["urllib.request.urlopen"]
    for prefix in _HTTP_CLIENT_PREFIXES:
        patterns.append(f"{prefix}.request")
        patterns.extend(f"{prefix}.{verb}" for verb in _HTTP_VERBS)
    for receiver in _HTTP_CLIENT_RECEIVERS:
        patterns.extend(f"{receiver}.{verb}" for verb in _HTTP_VERBS)
    return tuple(patterns)


_HTTP_PATTERNS = _http_client_patterns()
_SLEEP_PATTERNS = ("time.sleep", "asyncio.sleep")


def is_sleep_call(call: CallFact) -> bool:
    return call.resolved_name == "sleep" or any(
        segment_match(p, call.resolved_name) for p in _SLEEP_PATTERNS
    )


def _call_url_literal(call: CallFact) -> str | None:
    url = call.kw_string("url")
    if url is not None:
        return url
    return call.arg_strings[0] if call.arg_strings else None


def detect_http(
    calls: Sequence[CallFact],
    kb: KnowledgeBase,
    functions: Sequence[FunctionNode] = (),
) -> tuple[HttpCallFact, ...]:
    """HTTP requests recognizable as such, annotated with retry context."""
    endpoint_entries = [e for e in kb.entries if e.category == "ml_http_endpoint"]
    retry_entries = [e for e in kb.entries if e.category == "rate_limit_handling_call"]

    sleep_loops: set[tuple[str, int]] = set()
    for call in calls:
        if is_sleep_call(call):
            sleep_loops.update((call.file, line) for line in call.loop_lines)

    decorated: set[str] = set()
    for fn in functions:
        if any(
            any(pattern_matches(e, dec) for e in retry_entries) for dec in fn.decorators
        ):
            decorated.add(fn.node_id)

    def wrapped(call: CallFact) -> bool:
        if any((call.file, line) in sleep_loops for line in call.loop_lines):
            return True
        return CallGraph.site_node_id(call) in decorated

    facts: list[HttpCallFact] = []
    for call in calls:
        is_client = any(segment_match(p, call.resolved_name) for p in _HTTP_PATTERNS)
        url = _call_url_literal(call)
        literal_candidates = list(call.arg_strings) + [v for _, v in call.kw_strings]
        endpoint_hit = any(
            pattern_matches(e, text) for e in endpoint_entries for text in literal_candidates
        )
        if not is_client and not endpoint_hit:
            continue

        last = call.last_segment
        if last in _HTTP_VERBS:
            method = last.upper()
        elif last == "urlopen":
            method = "GET"
        else:
            method = call.kw_string("method")
            method = method.upper() if method else None
        if method is None and url is None:
            continue

        facts.append(
            HttpCallFact(
                method=method,
                url_literal=url,
                header_keys=frozenset(call.dict_keys("headers")),
                param_keys=frozenset(call.dict_keys("params")),
                wrapped_in_retry=wrapped(call),
                file=call.file,
                line=call.line,
            )
        )
    return tuple(facts)


# -- configuration scanning


def _flatten(value: object, prefix: str, sink: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(item, f"{prefix}.{key}" if prefix else str(key), sink)
    elif isinstance(value, list):
        for index, item in enumerate(value):
            _flatten(item, f"{prefix}.{index}" if prefix else str(index), sink)
    else:
        sink.append((prefix, "" if value is None else str(value)))


def _yaml_entries(text: str, rel: str) -> list[ConfigEntry]:
    entries: list[ConfigEntry] = []

    def walk(node: yaml.Node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                walk(value_node, key)
        elif isinstance(node, yaml.SequenceNode):
            for index, item in enumerate(node.value):
                walk(item, f"{prefix}.{index}" if prefix else str(index))
        else:
            entries.append(
                ConfigEntry(
                    key=prefix or "<document>",
                    value=str(node.value),
                    file=rel,
                    line=node.start_mark.line + 1,
                )
            )

    root = yaml.compose(text)
    if root is not None:
        walk(root, "")
    return entries


def _ini_entries(text: str, rel: str) -> list[ConfigEntry]:
    # configparser drops line numbers, so track them with a simple scan.
    entries: list[ConfigEntry] = []
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, _, value = line.partition(sep)
                full = f"{section}.{key.strip()}" if section else key.strip()
                entries.append(ConfigEntry(key=full, value=value.strip(), file=rel, line=lineno))
                break
    # Validate shape so malformed files are still reported upstream.
    parser = configparser.ConfigParser()
    parser.read_string(text)
    return entries


def _env_entries(text: str, rel: str) -> list[ConfigEntry]:
    entries: list[ConfigEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        if key.startswith("export "):
            key = key[len("export "):]
        entries.append(ConfigEntry(key=key.strip(), value=value.strip(), file=rel, line=lineno))
    return entries


def _requirements_entries(text: str, rel: str) -> list[ConfigEntry]:
    entries: list[ConfigEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", "-")):
            continue
        name = re.split(r"[=<>!~\[;@ ]", line, maxsplit=1)[0]
        if name:
            entries.append(ConfigEntry(key=name, value=line, file=rel, line=lineno))
    return entries


def scan_config_env(
    config_files: Sequence[PurePosixPath],
    units: Sequence[ParsedUnit],
    root: Path,
) -> tuple[ConfigModel, tuple[Diagnostic, ...]]:
    """Flatten configuration files and collect environment-variable reads."""
    entries: list[ConfigEntry] = []
    diagnostics: list[Diagnostic] = []
    for rel in config_files:
        path = root / rel
        rel_text = str(rel)
        try:
            text = path.read_text("utf-8", errors="replace")
            name = path.name.lower()
            if name.startswith("requirements") and name.endswith(".txt"):
                entries.extend(_requirements_entries(text, rel_text))
            elif name == ".env" or name.startswith(".env.") or path.suffix.lower() == ".env":
                entries.extend(_env_entries(text, rel_text))
            elif path.suffix.lower() in (".yaml", ".yml"):
                entries.extend(_yaml_entries(text, rel_text))
            elif path.suffix.lower() == ".json":
                flat: list[tuple[str, str]] = []
                _flatten(json.loads(text), "", flat)
                entries.extend(ConfigEntry(k or "<document>", v, rel_text, 1) for k, v in flat)
            elif path.suffix.lower() == ".toml":
                flat = []
                _flatten(tomllib.loads(text), "", flat)
                entries.extend(ConfigEntry(k or "<document>", v, rel_text, 1) for k, v in flat)
            elif path.suffix.lower() in (".ini", ".cfg"):
                entries.extend(_ini_entries(text, rel_text))
        except Exception as exc:
            diagnostics.append(
                Diagnostic(path=rel_text, stage="config-scan", reason=f"skipped: {exc}")
            )

    env_reads = tuple(read for unit in units for read in unit.env_reads)
    return ConfigModel(entries=tuple(entries), env_var_reads=env_reads), tuple(diagnostics)


# ---------------------------------------------------------------------------
# project model


@dataclass(frozen=True)
class ProjectModel:
    workspace: Workspace
    file_set: FileSet
    units: tuple[SourceText, ...]
    imports: tuple[ImportFact, ...]
    calls: tuple[CallFact, ...]
    attribute_accesses: tuple[AttributeAccessFact, ...]
    functions: tuple[FunctionNode, ...]
    call_graph: CallGraph = field(repr=False, default=None)  # type: ignore[assignment]
    datasets: DatasetUsage = field(default_factory=DatasetUsage)
    http_calls: tuple[HttpCallFact, ...] = ()
    config: ConfigModel = field(default_factory=ConfigModel)
    providers: ProviderSet = field(default_factory=ProviderSet)
    handled_exceptions: tuple[HandledException, ...] = ()
    skipped: tuple[Diagnostic, ...] = ()

    def loc(self) -> int:
        return sum(len(split_lines(unit.text.rstrip("\n"))) for unit in self.units)


def build_model(ws: Workspace, kb: KnowledgeBase) -> ProjectModel:
    """Run the whole ingestion pipeline and assemble the project model."""
    file_set = discover_files(ws)
    diagnostics: list[Diagnostic] = []
    parsed: list[ParsedUnit] = []

    def ingest_one(rel: PurePosixPath, notebook: bool) -> None:
        rel_text = str(rel)
        try:
            if notebook:
                st = extract_notebook_code(ws.root / rel, rel_text)
                diagnostics.extend(st.dropped)
            else:
                st = read_source(ws.root / rel, rel_text)
        except MalformedNotebook as exc:
            diagnostics.append(Diagnostic(rel_text, "notebook-extract", f"skipped: {exc}"))
            return
        except OSError as exc:
            diagnostics.append(Diagnostic(rel_text, "read", f"unreadable: {exc}"))
            return
        try:
            st, skipped = sanitize_source(st)
        except Unsalvageable:
            diagnostics.append(Diagnostic(rel_text, "sanitize", "unsalvageable unit excluded"))
            return
        diagnostics.extend(
            Diagnostic(rel_text, "sanitize", "syntax error: line skipped", line=origin.line)
            for origin in skipped
        )
        parsed.append(parse_unit(st))

    for rel in file_set.source_files:
        ingest_one(rel, notebook=False)
    for rel in file_set.notebooks:
        ingest_one(rel, notebook=True)

    if not parsed:
        raise EmptyModel(f"{ws.repo_name}: no parseable source units")

    imports = tuple(f for unit in parsed for f in unit.imports)
    calls = tuple(f for unit in parsed for f in unit.calls)
    accesses = tuple(f for unit in parsed for f in unit.attribute_accesses)
    functions = tuple(f for unit in parsed for f in unit.functions)
    handled = tuple(f for unit in parsed for f in unit.handled_exceptions)
    assignments = tuple(a for unit in parsed for a in unit.tuple_assignments)

    config, config_diags = scan_config_env(file_set.config_files, parsed, ws.root)
    diagnostics.extend(config_diags)

    return ProjectModel(
        workspace=ws,
        file_set=file_set,
        units=tuple(unit.source for unit in parsed),
        imports=imports,
        calls=calls,
        attribute_accesses=accesses,
        functions=functions,
        call_graph=build_call_graph(functions, calls),
        datasets=detect_datasets(calls, kb, assignments),
        http_calls=detect_http(calls, kb, functions),
        config=config,
        providers=detect_providers(imports, calls, kb),
        handled_exceptions=handled,
        skipped=tuple(diagnostics),
    )

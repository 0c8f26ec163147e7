"""Typed graph models: the shared substrate for every modeling language.

A model is a flat list of nodes and edges plus a containment relation
(``Node.parent``). Per-language vocabulary lives in a :class:`Metamodel`;
this module only knows about structure: ids, kinds, containment, endpoint
legality, cardinality and property schemas.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Union

from .errors import (
    CycleError,
    DanglingReferenceError,
    EnvelopeError,
    MetamodelMismatchError,
    ModelSyntaxError,
)

MODEL_TYPES = ("statechart", "webstory", "dataflow", "pipeline")

# A property value is one of four tags: text, integer, boolean, list-of-text.
# The native Python type carries the tag; lists are stored as tuples so that
# models stay immutable.
PropertyValue = Union[str, int, bool, tuple]

TAG_TEXT = "text"
TAG_INTEGER = "integer"
TAG_BOOLEAN = "boolean"
TAG_TEXT_LIST = "list-of-text"


def property_tag(value: PropertyValue) -> str:
    """Return the tag name for a property value. bool before int: bool is a
    subclass of int in Python."""
    if isinstance(value, bool):
        return TAG_BOOLEAN
    if isinstance(value, int):
        return TAG_INTEGER
    if isinstance(value, str):
        return TAG_TEXT
    if isinstance(value, tuple):
        return TAG_TEXT_LIST
    raise TypeError(f"not a property value: {value!r}")


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    parent: str | None = None
    properties: Mapping[str, PropertyValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    id: str
    kind: str
    source: str
    target: str
    properties: Mapping[str, PropertyValue] = field(default_factory=dict)


@dataclass(frozen=True)
class GraphModel:
    """Immutable typed graph. Mutation means building a new model."""

    id: str
    model_type: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    @cached_property
    def node_by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def children(self) -> dict[str | None, tuple[Node, ...]]:
        """Direct children per parent id (None collects top-level nodes),
        sorted by node id."""
        out: dict[str | None, list[Node]] = {}
        for n in sorted(self.nodes, key=lambda n: n.id):
            out.setdefault(n.parent, []).append(n)
        return {k: tuple(v) for k, v in out.items()}

    def node(self, node_id: str) -> Node:
        return self.node_by_id[node_id]

    def children_of(self, parent: str | None) -> tuple[Node, ...]:
        return self.children.get(parent, ())

    def ancestors(self, node_id: str) -> tuple[str, ...]:
        """Containment chain of ``node_id`` from the top down, excluding the
        node itself."""
        chain: list[str] = []
        cur = self.node_by_id[node_id].parent
        while cur is not None:
            chain.append(cur)
            cur = self.node_by_id[cur].parent
        chain.reverse()
        return tuple(chain)

    def edges_from(self, node_id: str, kind: str | None = None) -> tuple[Edge, ...]:
        return tuple(
            e for e in sorted(self.edges, key=lambda e: e.id)
            if e.source == node_id and (kind is None or e.kind == kind)
        )

    def edges_to(self, node_id: str, kind: str | None = None) -> tuple[Edge, ...]:
        return tuple(
            e for e in sorted(self.edges, key=lambda e: e.id)
            if e.target == node_id and (kind is None or e.kind == kind)
        )

    def nodes_of_kind(self, *kinds: str) -> tuple[Node, ...]:
        wanted = set(kinds)
        return tuple(n for n in sorted(self.nodes, key=lambda n: n.id) if n.kind in wanted)


# -- validation issues -------------------------------------------------------

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"
# "info" extends the base enum for diagnostics that are purely advisory,
# e.g. the statechart decision-exhaustiveness note.
SEVERITY_INFO = "info"


@dataclass(frozen=True)
class ValidationIssue:
    severity: str
    rule_id: str
    message: str
    element_id: str | None = None

    def sort_key(self) -> tuple:
        return (self.element_id or "", self.rule_id, self.message)


def has_errors(issues: Iterable[ValidationIssue]) -> bool:
    return any(i.severity == SEVERITY_ERROR for i in issues)


def sort_issues(issues: Iterable[ValidationIssue]) -> list[ValidationIssue]:
    return sorted(issues, key=ValidationIssue.sort_key)


# -- metamodels ---------------------------------------------------------------

@dataclass(frozen=True)
class PropertySpec:
    name: str
    tag: str
    required: bool = False


@dataclass(frozen=True)
class Cardinality:
    min: int = 0
    max: int | None = None  # None = unbounded

    def allows(self, count: int) -> bool:
        if count < self.min:
            return False
        return self.max is None or count <= self.max


@dataclass(frozen=True)
class NodeKindSpec:
    """Schema for one node kind.

    ``allowed_parents`` is a set of parent kind names; ``None`` in the set
    means the node may sit at top level.
    """

    kind: str
    properties: tuple[PropertySpec, ...] = ()
    allowed_parents: frozenset = frozenset({None})


@dataclass(frozen=True)
class EdgeKindSpec:
    """Schema for one edge kind: legal endpoint kind pairs plus per-endpoint
    cardinality bounds keyed by node kind (missing entry = unbounded)."""

    kind: str
    pairs: frozenset
    properties: tuple[PropertySpec, ...] = ()
    out_bounds: Mapping[str, Cardinality] = field(default_factory=dict)
    in_bounds: Mapping[str, Cardinality] = field(default_factory=dict)


@dataclass(frozen=True)
class Metamodel:
    model_type: str
    node_kinds: Mapping[str, NodeKindSpec]
    edge_kinds: Mapping[str, EdgeKindSpec]

    def __post_init__(self):
        for ek in self.edge_kinds.values():
            for src, tgt in ek.pairs:
                if src not in self.node_kinds or tgt not in self.node_kinds:
                    raise ValueError(
                        f"edge kind {ek.kind} references undeclared node kind"
                    )


def metamodel(model_type: str, node_kinds: Iterable[NodeKindSpec],
              edge_kinds: Iterable[EdgeKindSpec]) -> Metamodel:
    return Metamodel(
        model_type=model_type,
        node_kinds={nk.kind: nk for nk in node_kinds},
        edge_kinds={ek.kind: ek for ek in edge_kinds},
    )


# -- load / save --------------------------------------------------------------

_ENVELOPE_KEYS = {"id", "modelType", "nodes", "edges"}
_NODE_KEYS = {"id", "kind", "parent", "properties"}
_EDGE_KEYS = {"id", "kind", "source", "target", "properties"}


def _check_properties(raw, where: str) -> dict[str, PropertyValue]:
    if not isinstance(raw, dict):
        raise EnvelopeError(f"{where}: properties must be an object")
    out: dict[str, PropertyValue] = {}
    for name, value in raw.items():
        if not isinstance(name, str):
            raise EnvelopeError(f"{where}: property names must be strings")
        if isinstance(value, bool) or isinstance(value, int) or isinstance(value, str):
            out[name] = value
        elif isinstance(value, list):
            if not all(isinstance(v, str) for v in value):
                raise EnvelopeError(
                    f"{where}: property {name!r} list entries must be strings"
                )
            out[name] = tuple(value)
        else:
            raise EnvelopeError(
                f"{where}: property {name!r} must be string, integer, boolean "
                "or a list of strings"
            )
    return out


def _require_string(obj: dict, key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise EnvelopeError(f"{where}: {key!r} must be a non-empty string")
    return value


def load_model(document: bytes | str) -> GraphModel:
    """Parse and structurally check a model envelope.

    Raises ModelSyntaxError for malformed JSON, EnvelopeError for schema
    violations (including unknown fields and duplicate ids) and
    DanglingReferenceError when an edge endpoint or parent is missing.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelSyntaxError(f"document is not valid UTF-8: {exc}") from exc
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(f"malformed JSON: {exc}") from exc

    if not isinstance(raw, dict):
        raise EnvelopeError("document root must be an object")
    unknown = set(raw) - _ENVELOPE_KEYS
    if unknown:
        raise EnvelopeError(f"unknown top-level fields: {sorted(unknown)}")
    missing = _ENVELOPE_KEYS - set(raw)
    if missing:
        raise EnvelopeError(f"missing top-level fields: {sorted(missing)}")

    model_id = _require_string(raw, "id", "envelope")
    model_type = _require_string(raw, "modelType", "envelope")
    if model_type not in MODEL_TYPES:
        raise EnvelopeError(f"unknown modelType {model_type!r}")
    if not isinstance(raw["nodes"], list) or not isinstance(raw["edges"], list):
        raise EnvelopeError("nodes and edges must be arrays")

    nodes: list[Node] = []
    for i, obj in enumerate(raw["nodes"]):
        where = f"nodes[{i}]"
        if not isinstance(obj, dict):
            raise EnvelopeError(f"{where}: must be an object")
        unknown = set(obj) - _NODE_KEYS
        if unknown:
            raise EnvelopeError(f"{where}: unknown fields: {sorted(unknown)}")
        node_id = _require_string(obj, "id", where)
        kind = _require_string(obj, "kind", where)
        parent = obj.get("parent")
        if parent is not None and (not isinstance(parent, str) or not parent):
            raise EnvelopeError(f"{where}: parent must be a non-empty string")
        props = _check_properties(obj.get("properties", {}), where)
        nodes.append(Node(id=node_id, kind=kind, parent=parent, properties=props))

    edges: list[Edge] = []
    for i, obj in enumerate(raw["edges"]):
        where = f"edges[{i}]"
        if not isinstance(obj, dict):
            raise EnvelopeError(f"{where}: must be an object")
        unknown = set(obj) - _EDGE_KEYS
        if unknown:
            raise EnvelopeError(f"{where}: unknown fields: {sorted(unknown)}")
        edges.append(Edge(
            id=_require_string(obj, "id", where),
            kind=_require_string(obj, "kind", where),
            source=_require_string(obj, "source", where),
            target=_require_string(obj, "target", where),
            properties=_check_properties(obj.get("properties", {}), where),
        ))

    node_ids = [n.id for n in nodes]
    if len(set(node_ids)) != len(node_ids):
        dupes = sorted({i for i in node_ids if node_ids.count(i) > 1})
        raise EnvelopeError(f"duplicate node ids: {dupes}")
    edge_ids = [e.id for e in edges]
    if len(set(edge_ids)) != len(edge_ids):
        dupes = sorted({i for i in edge_ids if edge_ids.count(i) > 1})
        raise EnvelopeError(f"duplicate edge ids: {dupes}")

    known = set(node_ids)
    for n in nodes:
        if n.parent is not None and n.parent not in known:
            raise DanglingReferenceError(
                f"node {n.id!r}: parent {n.parent!r} not found"
            )
    for e in edges:
        if e.source not in known:
            raise DanglingReferenceError(f"edge {e.id!r}: source {e.source!r} not found")
        if e.target not in known:
            raise DanglingReferenceError(f"edge {e.id!r}: target {e.target!r} not found")

    # containment must be a forest
    parent_of = {n.id: n.parent for n in nodes}
    for start in node_ids:
        seen = set()
        cur: str | None = start
        while cur is not None:
            if cur in seen:
                raise EnvelopeError(f"containment cycle through node {cur!r}")
            seen.add(cur)
            cur = parent_of[cur]

    return GraphModel(
        id=model_id,
        model_type=model_type,
        nodes=tuple(nodes),
        edges=tuple(edges),
    )


def _property_json(props: Mapping[str, PropertyValue]) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(props.items())}


def model_to_json_value(model: GraphModel) -> dict:
    """Canonical JSON value for a model: lists sorted by id, fixed key order,
    property keys sorted."""
    nodes = []
    for n in sorted(model.nodes, key=lambda n: n.id):
        obj: dict = {"id": n.id, "kind": n.kind}
        if n.parent is not None:
            obj["parent"] = n.parent
        obj["properties"] = _property_json(n.properties)
        nodes.append(obj)
    edges = []
    for e in sorted(model.edges, key=lambda e: e.id):
        edges.append({
            "id": e.id,
            "kind": e.kind,
            "source": e.source,
            "target": e.target,
            "properties": _property_json(e.properties),
        })
    return {"id": model.id, "modelType": model.model_type, "nodes": nodes, "edges": edges}


def save_model(model: GraphModel) -> bytes:
    """Canonical serialization; byte-identical across calls and across node
    and edge input orderings. load_model(save_model(m)) equals m."""
    text = json.dumps(model_to_json_value(model), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


# -- structural validation ----------------------------------------------------

def validate_structure(model: GraphModel, meta: Metamodel) -> list[ValidationIssue]:
    """All structural violations of the metamodel, deterministically ordered
    by (element id, rule id). Empty list iff the model is structurally valid."""
    if meta.model_type != model.model_type:
        raise MetamodelMismatchError(
            f"model type {model.model_type!r} does not match metamodel "
            f"{meta.model_type!r}"
        )

    issues: list[ValidationIssue] = []

    def issue(severity: str, rule_id: str, message: str, element_id: str):
        issues.append(ValidationIssue(severity, rule_id, message, element_id))

    def check_properties(spec_props: tuple[PropertySpec, ...],
                         props: Mapping[str, PropertyValue], element_id: str):
        by_name = {p.name: p for p in spec_props}
        for p in spec_props:
            if p.required and p.name not in props:
                issue(SEVERITY_ERROR, "property.missing",
                      f"required property {p.name!r} is missing", element_id)
        for name, value in sorted(props.items()):
            spec = by_name.get(name)
            if spec is None:
                issue(SEVERITY_WARNING, "property.unknown",
                      f"property {name!r} is not declared for this kind", element_id)
            elif property_tag(value) != spec.tag:
                issue(SEVERITY_ERROR, "property.type",
                      f"property {name!r} must be {spec.tag}, "
                      f"got {property_tag(value)}", element_id)

    for n in model.nodes:
        spec = meta.node_kinds.get(n.kind)
        if spec is None:
            issue(SEVERITY_ERROR, "kind.unknown",
                  f"unknown node kind {n.kind!r}", n.id)
            continue
        check_properties(spec.properties, n.properties, n.id)
        parent_kind = model.node_by_id[n.parent].kind if n.parent else None
        if parent_kind is not None and parent_kind not in meta.node_kinds:
            pass  # parent already flagged kind.unknown
        elif parent_kind not in spec.allowed_parents:
            desc = f"kind {parent_kind!r}" if parent_kind else "top level"
            issue(SEVERITY_ERROR, "containment.illegal",
                  f"node of kind {n.kind!r} may not be placed under {desc}", n.id)

    out_count: dict[tuple[str, str], int] = {}
    in_count: dict[tuple[str, str], int] = {}
    for e in model.edges:
        spec = meta.edge_kinds.get(e.kind)
        if spec is None:
            issue(SEVERITY_ERROR, "edge.kind.unknown",
                  f"unknown edge kind {e.kind!r}", e.id)
            continue
        check_properties(spec.properties, e.properties, e.id)
        src_kind = model.node_by_id[e.source].kind
        tgt_kind = model.node_by_id[e.target].kind
        if (src_kind, tgt_kind) not in spec.pairs:
            issue(SEVERITY_ERROR, "edge.endpoint",
                  f"edge kind {e.kind!r} may not connect {src_kind!r} to "
                  f"{tgt_kind!r}", e.id)
        out_count[(e.kind, e.source)] = out_count.get((e.kind, e.source), 0) + 1
        in_count[(e.kind, e.target)] = in_count.get((e.kind, e.target), 0) + 1

    for ek in meta.edge_kinds.values():
        for n in model.nodes:
            bounds = ek.out_bounds.get(n.kind)
            if bounds is not None:
                count = out_count.get((ek.kind, n.id), 0)
                if not bounds.allows(count):
                    issue(SEVERITY_ERROR, "cardinality.out",
                          f"node of kind {n.kind!r} has {count} outgoing "
                          f"{ek.kind!r} edges, allowed "
                          f"[{bounds.min}, {bounds.max if bounds.max is not None else 'unbounded'}]",
                          n.id)
            bounds = ek.in_bounds.get(n.kind)
            if bounds is not None:
                count = in_count.get((ek.kind, n.id), 0)
                if not bounds.allows(count):
                    issue(SEVERITY_ERROR, "cardinality.in",
                          f"node of kind {n.kind!r} has {count} incoming "
                          f"{ek.kind!r} edges, allowed "
                          f"[{bounds.min}, {bounds.max if bounds.max is not None else 'unbounded'}]",
                          n.id)

    return sort_issues(issues)


# -- topological order --------------------------------------------------------

def topological_order(model: GraphModel,
                      edge_kinds: Iterable[str] | None = None,
                      node_kinds: Iterable[str] | None = None) -> list[str]:
    """Total order on the filtered nodes consistent with the filtered edges,
    lexicographic node id as tie-break.

    Edges whose endpoints are not themselves filtered nodes are lifted along
    containment to the nearest enclosing filtered node, so port-level edges
    order their containers. Raises CycleError with one witness cycle.
    """
    ek = set(edge_kinds) if edge_kinds is not None else None
    nk = set(node_kinds) if node_kinds is not None else None

    wanted = [n.id for n in model.nodes if nk is None or n.kind in nk]
    wanted_set = set(wanted)

    def lift(node_id: str) -> str | None:
        cur: str | None = node_id
        while cur is not None:
            if cur in wanted_set:
                return cur
            cur = model.node_by_id[cur].parent
        return None

    succs: dict[str, set[str]] = {n: set() for n in wanted}
    indeg: dict[str, int] = {n: 0 for n in wanted}
    for e in model.edges:
        if ek is not None and e.kind not in ek:
            continue
        u = lift(e.source)
        v = lift(e.target)
        if u is None or v is None:
            continue
        if v not in succs[u]:
            succs[u].add(v)
            if u != v:
                indeg[v] += 1

    ready = [n for n in wanted if indeg[n] == 0 and n not in succs[n]]
    heapq.heapify(ready)
    order: list[str] = []
    done: set[str] = set()
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        done.add(n)
        for m in succs[n]:
            if m in done or m == n:
                continue
            indeg[m] -= 1
            if indeg[m] == 0 and m not in succs[m]:
                heapq.heappush(ready, m)

    if len(order) != len(wanted):
        remaining = sorted(wanted_set - set(order))
        witness = _find_cycle(remaining, succs)
        raise CycleError(f"cycle detected: {' -> '.join(witness)}", witness)
    return order


def _find_cycle(remaining: list[str], succs: dict[str, set[str]]) -> list[str]:
    """One genuine cycle among the remaining nodes.

    Nodes that merely sit downstream of a cycle are trimmed first so the
    walk below cannot dead-end.
    """
    core = set(remaining)
    changed = True
    while changed:
        changed = False
        for n in sorted(core):
            if not any(s in core for s in succs[n]):
                core.remove(n)
                changed = True
    start = min(core)
    path: list[str] = []
    index: dict[str, int] = {}
    cur = start
    while cur not in index:
        index[cur] = len(path)
        path.append(cur)
        cur = min(s for s in succs[cur] if s in core)
    return path[index[cur]:]

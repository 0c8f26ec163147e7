"""Dataflow process language: wire discovered functions into acyclic graphs,
type-check the wiring by unification over nominal types, then compile to a
straight-line host script.

Functions are discovered from annotated source text. Port wiring types are
nominal: two concrete names unify only when equal; unannotated ports get
type variables that may bind to anything.

Boundary convention for hierarchical processes: a subprocess model declares
its interface through top-level port pads. A top-level *outputPort* pad is a
process input (inside the model it produces the incoming value), a top-level
*inputPort* pad is a process output (inside it consumes the value that the
process returns). The subprocess node in the parent model carries mirrored
child ports matched by name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import (
    AnnotationError,
    CycleError,
    UnboundInputError,
    UnknownSignatureError,
    UnknownSubmodelError,
)
from .graph_core import (
    EdgeKindSpec,
    GraphModel,
    Node,
    NodeKindSpec,
    PropertySpec,
    SEVERITY_ERROR,
    ValidationIssue,
    metamodel,
    sort_issues,
    topological_order,
)

_PORT_PARENTS = frozenset({None, "functionNode", "subprocessNode"})

DATAFLOW_METAMODEL = metamodel(
    "dataflow",
    node_kinds=[
        NodeKindSpec("functionNode", properties=(
            PropertySpec("signatureRef", "text", required=True),)),
        NodeKindSpec("subprocessNode", properties=(
            PropertySpec("modelRef", "text", required=True),)),
        NodeKindSpec("inputPort",
                     properties=(PropertySpec("name", "text", required=True),
                                 PropertySpec("portType", "text")),
                     allowed_parents=_PORT_PARENTS),
        NodeKindSpec("outputPort",
                     properties=(PropertySpec("name", "text", required=True),
                                 PropertySpec("portType", "text")),
                     allowed_parents=_PORT_PARENTS),
    ],
    edge_kinds=[
        EdgeKindSpec("dataFlow",
                     pairs=frozenset({("outputPort", "inputPort")})),
    ],
)


# -- function signatures ------------------------------------------------------

@dataclass(frozen=True)
class FunctionSignature:
    name: str
    inputs: tuple  # ((port name, type name), ...)
    output: tuple  # (port name, type name)
    origin: tuple = ("<string>", 0)


_PORT_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*:\s*([A-Za-z_][A-Za-z0-9_]*)$")


def _parse_ports(text: str, line_no: int) -> list[tuple]:
    ports = []
    if not text.strip():
        return ports
    for part in text.split(","):
        m = _PORT_RE.match(part.strip())
        if m is None:
            raise AnnotationError(
                f"line {line_no}: malformed port tuple {part.strip()!r}, "
                "expected name:Type", line_no)
        ports.append((m.group(1), m.group(2)))
    return ports


def parse_signatures(source: str, path: str = "<string>"
                     ) -> list[FunctionSignature]:
    """Discover annotated functions in source text.

    A signature is three consecutive comment lines ``# Method:``,
    ``# Inputs:``, ``# Output:`` immediately before a function definition.
    Unannotated functions are skipped silently; malformed annotation blocks
    raise AnnotationError with the offending line number.
    """
    lines = source.splitlines()
    signatures: list[FunctionSignature] = []
    i = 0
    while i < len(lines):
        line = lines[i]
        if not line.startswith("# Method:"):
            i += 1
            continue
        start = i + 1  # 1-based line number of the Method line
        name = line[len("# Method:"):].strip()
        if not name:
            raise AnnotationError(f"line {start}: empty method name", start)
        if i + 1 >= len(lines) or not lines[i + 1].startswith("# Inputs:"):
            raise AnnotationError(
                f"line {start}: annotation block lacks an '# Inputs:' line",
                start)
        if i + 2 >= len(lines) or not lines[i + 2].startswith("# Output:"):
            raise AnnotationError(
                f"line {start}: annotation block lacks an '# Output:' line",
                start)
        inputs = _parse_ports(lines[i + 1][len("# Inputs:"):], start + 1)
        outputs = _parse_ports(lines[i + 2][len("# Output:"):], start + 2)
        if len(outputs) != 1:
            raise AnnotationError(
                f"line {start + 2}: exactly one output expected, "
                f"got {len(outputs)}", start + 2)
        if i + 3 >= len(lines) or not lines[i + 3].lstrip().startswith("def "):
            raise AnnotationError(
                f"line {start}: annotation block is not followed by a "
                "function definition", start)
        seen = set()
        for port_name, _ in inputs + outputs:
            if port_name in seen:
                raise AnnotationError(
                    f"line {start}: duplicate port name {port_name!r}", start)
            seen.add(port_name)
        signatures.append(FunctionSignature(
            name=name, inputs=tuple(inputs), output=outputs[0],
            origin=(path, start)))
        i += 4
    return signatures


def signature_index(signatures) -> dict[str, FunctionSignature]:
    if isinstance(signatures, Mapping):
        return dict(signatures)
    return {s.name: s for s in signatures}


# -- nominal types and unification --------------------------------------------

@dataclass(frozen=True)
class TypeVar:
    id: int


TypeTerm = object  # str (concrete nominal type) | TypeVar


class _Unifier:
    def __init__(self):
        self._next = 0
        self.parent: dict[TypeVar, TypeTerm] = {}

    def fresh(self) -> TypeVar:
        self._next += 1
        var = TypeVar(self._next)
        self.parent[var] = var
        return var

    def find(self, term: TypeTerm) -> TypeTerm:
        if isinstance(term, str):
            return term
        chain = []
        cur = term
        while True:
            parent = self.parent[cur]
            if isinstance(parent, str):
                root: TypeTerm = parent
                break
            if parent is cur:
                root = cur
                break
            chain.append(cur)
            cur = parent
        for var in chain:
            self.parent[var] = root
        return root

    def union(self, a: TypeTerm, b: TypeTerm) -> tuple | None:
        """Unify two terms. Returns (left, right) concrete names on
        conflict, None on success."""
        ra, rb = self.find(a), self.find(b)
        if isinstance(ra, str) and isinstance(rb, str):
            return None if ra == rb else (ra, rb)
        if isinstance(ra, str):
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return None


# -- port resolution and validation -------------------------------------------

def _ports_of(model: GraphModel, owner: str | None, kind: str) -> tuple:
    return tuple(n for n in model.children_of(owner) if n.kind == kind)


def input_pads(model: GraphModel) -> tuple:
    """Top-level outputPort pads: the model's declared inputs."""
    return _ports_of(model, None, "outputPort")


def output_pads(model: GraphModel) -> tuple:
    """Top-level inputPort pads: the model's declared outputs."""
    return _ports_of(model, None, "inputPort")


class _Analysis:
    """Port terms and boundary of one model, within a shared unifier."""

    def __init__(self):
        self.port_terms: dict[str, TypeTerm] = {}
        self.boundary_in: dict[str, TypeTerm] = {}
        self.boundary_out: dict[str, TypeTerm] = {}
        self.issues: list[ValidationIssue] = []


def _analyze(model: GraphModel, sigs: dict, submodels: Mapping,
             unifier: _Unifier, cache: dict, stack: tuple,
             shared: list) -> _Analysis:
    """shared collects findings that must surface at the top level
    regardless of which nested model produced them (reference cycles)."""
    if model.id in cache:
        return cache[model.id]
    result = _Analysis()
    cache[model.id] = result

    def issue(rule_id, message, element_id=None):
        result.issues.append(
            ValidationIssue(SEVERITY_ERROR, rule_id, message, element_id))

    def pad_term(pad: Node) -> TypeTerm:
        annotated = pad.properties.get("portType")
        return annotated if annotated is not None else unifier.fresh()

    for pad in sorted(input_pads(model) + output_pads(model),
                      key=lambda n: n.id):
        result.port_terms[pad.id] = pad_term(pad)

    seen_names: dict[tuple, str] = {}
    for direction, pads in (("in", input_pads(model)),
                            ("out", output_pads(model))):
        for pad in pads:
            name = pad.properties["name"]
            key = (direction, name)
            if key in seen_names:
                issue("boundary.ambiguous",
                      f"two {direction}-pads named {name!r}", pad.id)
                continue
            seen_names[key] = pad.id
            target = result.boundary_in if direction == "in" \
                else result.boundary_out
            target[name] = result.port_terms[pad.id]

    for node in model.nodes_of_kind("functionNode"):
        ref = node.properties["signatureRef"]
        sig = sigs.get(ref)
        if sig is None:
            raise UnknownSignatureError(
                f"function node {node.id!r} references unknown signature "
                f"{ref!r}")
        declared = dict(sig.inputs)
        declared_out = {sig.output[0]: sig.output[1]}
        for kind, table in (("inputPort", declared), ("outputPort", declared_out)):
            found = set()
            for port in _ports_of(model, node.id, kind):
                name = port.properties["name"]
                if name in found:
                    issue("port.duplicate",
                          f"node {node.id!r} has two ports named {name!r}",
                          port.id)
                    continue
                found.add(name)
                if name not in table:
                    issue("port.unknown",
                          f"port {name!r} does not exist on signature "
                          f"{ref!r}", port.id)
                    result.port_terms[port.id] = unifier.fresh()
                    continue
                term: TypeTerm = table[name]
                annotated = port.properties.get("portType")
                if annotated is not None and annotated != term:
                    issue("type.mismatch",
                          f"port {name!r} annotated {annotated!r} but "
                          f"signature {ref!r} declares {term!r}", port.id)
                result.port_terms[port.id] = term
            for missing in sorted(set(table) - found):
                issue("port.missing",
                      f"node {node.id!r} lacks a port for signature "
                      f"{kind == 'inputPort' and 'input' or 'output'} "
                      f"{missing!r}", node.id)

    for node in model.nodes_of_kind("subprocessNode"):
        ref = node.properties["modelRef"]
        if ref in stack or ref == model.id:
            shared.append(ValidationIssue(
                SEVERITY_ERROR, "submodel.cycle",
                f"subprocess {node.id!r} of model {model.id!r} closes a "
                f"reference cycle through {ref!r}", node.id))
            for port in _ports_of(model, node.id, "inputPort") + \
                    _ports_of(model, node.id, "outputPort"):
                result.port_terms[port.id] = unifier.fresh()
            continue
        inner_model = submodels.get(ref)
        if inner_model is None:
            raise UnknownSubmodelError(
                f"subprocess {node.id!r} references unknown model {ref!r}")
        inner = _analyze(inner_model, sigs, submodels, unifier, cache,
                         stack + (model.id,), shared)
        # fresh variables per use, but variables shared between two
        # boundary ports of the same submodel stay shared
        instantiated: dict[TypeTerm, TypeTerm] = {}

        def instance_term(term: TypeTerm) -> TypeTerm:
            root = unifier.find(term)
            if isinstance(root, str):
                return root
            if root not in instantiated:
                instantiated[root] = unifier.fresh()
            return instantiated[root]

        for kind, boundary in (("inputPort", inner.boundary_in),
                               ("outputPort", inner.boundary_out)):
            found = set()
            for port in _ports_of(model, node.id, kind):
                name = port.properties["name"]
                if name in found:
                    issue("port.duplicate",
                          f"node {node.id!r} has two ports named {name!r}",
                          port.id)
                    continue
                found.add(name)
                if name not in boundary:
                    issue("port.unknown",
                          f"subprocess model {ref!r} declares no "
                          f"{'input' if kind == 'inputPort' else 'output'} "
                          f"pad named {name!r}", port.id)
                    result.port_terms[port.id] = unifier.fresh()
                    continue
                term = instance_term(boundary[name])
                annotated = port.properties.get("portType")
                if annotated is not None:
                    conflict = unifier.union(annotated, term)
                    if conflict is not None:
                        issue("type.mismatch",
                              f"port {name!r} annotated {annotated!r} but "
                              f"submodel wiring gives {conflict[1]!r}", port.id)
                result.port_terms[port.id] = term
            for missing in sorted(set(boundary) - found):
                issue("port.missing",
                      f"node {node.id!r} lacks a port for submodel pad "
                      f"{missing!r}", node.id)

    # unify along wires, deterministically by edge id
    for e in sorted(model.edges, key=lambda e: e.id):
        if e.kind != "dataFlow":
            continue
        src = result.port_terms.get(e.source)
        tgt = result.port_terms.get(e.target)
        if src is None or tgt is None:
            continue
        conflict = unifier.union(src, tgt)
        if conflict is not None:
            issue("type.mismatch",
                  f"wire {e.id!r} connects {conflict[0]!r} to {conflict[1]!r}",
                  e.id)

    return result


def validate_flow(model: GraphModel, signatures, submodels: Mapping | None = None
                  ) -> list[ValidationIssue]:
    """Resolve ports, infer types by unification and report wiring faults.

    Raises UnknownSignatureError / UnknownSubmodelError for unresolvable
    references; everything else comes back as issues.
    """
    sigs = signature_index(signatures)
    submodels = submodels or {}
    unifier = _Unifier()
    shared: list[ValidationIssue] = []
    analysis = _analyze(model, sigs, submodels, unifier, {}, (), shared)
    issues = list(analysis.issues) + shared

    def issue(rule_id, message, element_id=None):
        issues.append(ValidationIssue(SEVERITY_ERROR, rule_id, message,
                                      element_id))

    incoming: dict[str, int] = {}
    for e in model.edges:
        if e.kind == "dataFlow":
            incoming[e.target] = incoming.get(e.target, 0) + 1

    for node in model.nodes:
        if node.kind != "inputPort":
            continue
        count = incoming.get(node.id, 0)
        if count > 1:
            issue("input.fanin",
                  f"input port {node.id!r} has {count} producers, only one "
                  "allowed", node.id)
        elif count == 0 and node.parent is not None:
            issue("input.unconnected",
                  f"input port {node.id!r} of node {node.parent!r} is not "
                  "connected", node.id)
        elif count == 0 and node.parent is None:
            issue("input.unconnected",
                  f"output pad {node.id!r} is never produced", node.id)

    try:
        topological_order(model, edge_kinds={"dataFlow"},
                          node_kinds={"functionNode", "subprocessNode"})
    except CycleError as exc:
        issue("flow.cycle",
              "dataflow composition must be acyclic: "
              + " -> ".join(exc.witness), exc.witness[0])

    return sort_issues(issues)


def infer_port_types(model: GraphModel, signatures, submodels: Mapping | None = None
                     ) -> dict[str, TypeTerm]:
    """Resolved type per port id: a concrete name or a TypeVar root."""
    sigs = signature_index(signatures)
    unifier = _Unifier()
    analysis = _analyze(model, sigs, submodels or {}, unifier, {}, (), [])
    return {port: unifier.find(term)
            for port, term in analysis.port_terms.items()}


# -- control-flow plan --------------------------------------------------------

@dataclass(frozen=True)
class PlanStep:
    step_id: str
    function: str
    bindings: tuple  # ((input port name, (producer step id, port name)), ...)


@dataclass(frozen=True)
class ControlFlowPlan:
    steps: tuple
    sinks: tuple  # ((step id, output port name), ...)


def order_nodes(model: GraphModel, signatures, submodels: Mapping | None = None
                ) -> ControlFlowPlan:
    """Topologically ordered call plan with every subprocess inlined.

    The model must have validated cleanly and, being executable, must not
    declare input pads of its own.
    """
    sigs = signature_index(signatures)
    submodels = submodels or {}
    if input_pads(model):
        names = [p.properties["name"] for p in input_pads(model)]
        raise UnboundInputError(
            f"model {model.id!r} has unbound input pads {names}; only "
            "closed models can be compiled")

    steps: list[PlanStep] = []

    def flatten(m: GraphModel, prefix: str, pad_bindings: dict,
                stack: tuple = ()) -> dict:
        """Emit steps for one model instance; returns its output-pad map
        name -> (step id, port name)."""
        if m.id in stack:
            raise CycleError(
                "subprocess models reference each other in a cycle: "
                + " -> ".join(stack + (m.id,)), list(stack) + [m.id])
        by_port_owner = {n.id: n for n in m.nodes}

        sub_outputs: dict[str, dict] = {}

        def feeding_edge(port_id: str):
            edges = m.edges_to(port_id, "dataFlow")
            return edges[0] if edges else None

        def resolve_source(port_id: str) -> tuple:
            port = by_port_owner[port_id]
            if port.parent is None:
                if port.kind == "outputPort":  # input pad
                    return pad_bindings[port.properties["name"]]
                raise AssertionError("output pads cannot produce")
            owner = by_port_owner[port.parent]
            if owner.kind == "functionNode":
                return (prefix + owner.id, port.properties["name"])
            return sub_outputs[owner.id][port.properties["name"]]

        def resolve_input(port_id: str) -> tuple:
            edge = feeding_edge(port_id)
            return resolve_source(edge.source)

        order = topological_order(m, edge_kinds={"dataFlow"},
                                  node_kinds={"functionNode",
                                              "subprocessNode"})
        for node_id in order:
            node = by_port_owner[node_id]
            if node.kind == "functionNode":
                sig = sigs[node.properties["signatureRef"]]
                port_by_name = {p.properties["name"]: p.id
                                for p in _ports_of(m, node_id, "inputPort")}
                bindings = tuple(
                    (name, resolve_input(port_by_name[name]))
                    for name, _ in sig.inputs)
                steps.append(PlanStep(step_id=prefix + node_id,
                                      function=sig.name, bindings=bindings))
            else:
                inner = submodels[node.properties["modelRef"]]
                inner_bindings = {}
                for port in _ports_of(m, node_id, "inputPort"):
                    inner_bindings[port.properties["name"]] = \
                        resolve_input(port.id)
                sub_outputs[node_id] = flatten(
                    inner, prefix + node_id + "__", inner_bindings,
                    stack + (m.id,))

        outputs: dict[str, tuple] = {}
        for pad in output_pads(m):
            outputs[pad.properties["name"]] = resolve_input(pad.id)
        return outputs

    root_outputs = flatten(model, "", {})

    # sinks: the model's declared outputs first, then anything dangling
    consumed = {binding for step in steps for _, binding in step.bindings}
    sinks: list[tuple] = []
    for name in sorted(root_outputs):
        if root_outputs[name] not in sinks:
            sinks.append(root_outputs[name])
    for step in steps:
        sig = sigs[step.function]
        produced = (step.step_id, sig.output[0])
        if produced not in consumed and produced not in sinks:
            sinks.append(produced)
    return ControlFlowPlan(steps=tuple(steps), sinks=tuple(sinks))


# -- script emission ----------------------------------------------------------

_IDENT_RE = re.compile(r"[^0-9A-Za-z_]")


def _var_name(step_id: str) -> str:
    return "r_" + _IDENT_RE.sub("_", step_id)


def emit_host_script(plan: ControlFlowPlan, signatures) -> str:
    """One assignment per plan step, then one line printing the sinks.

    Deterministic text; every referenced variable is defined earlier.
    Argument order follows the signature's declared input order.
    """
    sigs = signature_index(signatures)
    lines = ["# ldekit dataflow host script"]
    for step in plan.steps:
        bound = dict(step.bindings)
        args = ", ".join(_var_name(bound[name][0])
                         for name, _ in sigs[step.function].inputs)
        lines.append(f"{_var_name(step.step_id)} = {step.function}({args})")
    if plan.sinks:
        sinks = ", ".join(_var_name(step_id) for step_id, _ in plan.sinks)
        lines.append(f"print({sinks})")
    return "\n".join(lines) + "\n"

"""Statechart language: metamodel, validator and macrostep simulator.

The language covers flat states, hierarchical and concurrent composites,
decision nodes, history nodes and a declarations container for variables
and triggers. Simulation is run-to-completion: one external trigger per
macrostep, followed by a cascade of untriggered completions until the
configuration stabilizes.

Semantics choices that the modeling vocabulary leaves open:

* When several transitions share a trigger, the outermost active source
  wins; ties break on lexicographic edge id. All regions of a concurrent
  state receive the trigger in one macrostep (broadcast), processed in
  region id order.
* A transition's action runs after exit and before entry.
* History is shallow: each scope stores its directly active children;
  restored composites re-enter through their start nodes.
* A decision with no true guard is a runtime error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import expr as ex
from .errors import (
    NonterminatingCompletionError,
    ParseError,
    StuckAtDecisionError,
    UnknownTriggerError,
)
from .graph_core import (
    Cardinality,
    Edge,
    EdgeKindSpec,
    GraphModel,
    NodeKindSpec,
    PropertySpec,
    SEVERITY_ERROR,
    SEVERITY_INFO,
    SEVERITY_WARNING,
    ValidationIssue,
    metamodel,
    sort_issues,
)

STATE_LIKE = frozenset({"start", "end", "state", "hierarchicalState",
                        "concurrentState", "decision", "history"})
COMPOSITE = frozenset({"hierarchicalState", "concurrentState"})

_TRANSITION_SOURCES = ("start", "state", "hierarchicalState", "concurrentState",
                       "decision")
_TRANSITION_TARGETS = ("state", "hierarchicalState", "concurrentState",
                       "decision", "history", "end")

_CONTAINER_PARENTS = frozenset({None, "hierarchicalState", "region"})

STATECHART_METAMODEL = metamodel(
    "statechart",
    node_kinds=[
        NodeKindSpec("start", allowed_parents=_CONTAINER_PARENTS),
        NodeKindSpec("end", allowed_parents=_CONTAINER_PARENTS),
        NodeKindSpec("state", allowed_parents=_CONTAINER_PARENTS),
        NodeKindSpec("hierarchicalState", allowed_parents=_CONTAINER_PARENTS),
        NodeKindSpec("concurrentState", allowed_parents=_CONTAINER_PARENTS),
        NodeKindSpec("region", allowed_parents=frozenset({"concurrentState"})),
        NodeKindSpec("decision", allowed_parents=_CONTAINER_PARENTS),
        NodeKindSpec("history",
                     allowed_parents=frozenset({"hierarchicalState", "region"})),
        NodeKindSpec("declarations"),
        NodeKindSpec("variable",
                     properties=(PropertySpec("varType", "text", required=True),
                                 PropertySpec("initial", "text")),
                     allowed_parents=frozenset({"declarations"})),
        NodeKindSpec("trigger", allowed_parents=frozenset({"declarations"})),
    ],
    edge_kinds=[
        EdgeKindSpec(
            "transition",
            pairs=frozenset((s, t) for s in _TRANSITION_SOURCES
                            for t in _TRANSITION_TARGETS),
            properties=(PropertySpec("trigger", "text"),
                        PropertySpec("guard", "text"),
                        PropertySpec("action", "text")),
            out_bounds={"start": Cardinality(1, 1)},
        ),
    ],
)


@dataclass(frozen=True)
class Configuration:
    """Live state of one simulation: active nodes, variables, history."""

    active_states: frozenset
    env: ex.Environment
    history: Mapping[str, frozenset]
    terminated: bool = False


@dataclass(frozen=True)
class SimulationEvent:
    """Record of one macrostep, in execution order."""

    fired_trigger: str
    taken_transitions: tuple = ()
    executed_actions: tuple = ()
    completions: tuple = ()


def active_states(config: Configuration) -> set:
    return set(config.active_states)


# -- validation ---------------------------------------------------------------

def _scopes(model: GraphModel):
    """All scopes that may hold state-like children: top level plus every
    hierarchicalState and region interior."""
    yield None
    for n in sorted(model.nodes, key=lambda n: n.id):
        if n.kind in ("hierarchicalState", "region"):
            yield n.id


def declared_variables(model: GraphModel) -> dict[str, tuple[str, ex.Value]]:
    """name -> (type tag, initial value); defaults false / 0."""
    out: dict[str, tuple[str, ex.Value]] = {}
    for decls in model.nodes_of_kind("declarations"):
        for n in model.children_of(decls.id):
            if n.kind != "variable":
                continue
            tag = n.properties.get("varType", "")
            raw = n.properties.get("initial")
            if tag == ex.BOOLEAN:
                value: ex.Value = raw == "true" if raw is not None else False
            else:
                try:
                    value = int(raw) if raw is not None else 0
                except (TypeError, ValueError):
                    value = 0
            out[n.id] = (tag, value)
    return out


def declared_triggers(model: GraphModel) -> set[str]:
    out = set()
    for decls in model.nodes_of_kind("declarations"):
        out.update(n.id for n in model.children_of(decls.id)
                   if n.kind == "trigger")
    return out


def validate_statechart(model: GraphModel) -> list[ValidationIssue]:
    """Statechart-level rules; assumes structural validation passed."""
    issues: list[ValidationIssue] = []

    def issue(severity, rule_id, message, element_id=None):
        issues.append(ValidationIssue(severity, rule_id, message, element_id))

    variables = declared_variables(model)
    triggers = declared_triggers(model)
    schema = {name: tag for name, (tag, _) in variables.items()}

    for name, (tag, _) in sorted(variables.items()):
        if tag not in (ex.BOOLEAN, ex.INTEGER):
            issue(SEVERITY_ERROR, "variable.type",
                  f"variable {name!r} has invalid varType {tag!r}", name)
            continue
        node = model.node(name)
        raw = node.properties.get("initial")
        if raw is None:
            continue
        if tag == ex.BOOLEAN and raw not in ("true", "false"):
            issue(SEVERITY_ERROR, "variable.initial",
                  f"variable {name!r} initial value {raw!r} is not boolean", name)
        if tag == ex.INTEGER:
            try:
                int(raw)
            except (TypeError, ValueError):
                issue(SEVERITY_ERROR, "variable.initial",
                      f"variable {name!r} initial value {raw!r} is not an "
                      "integer", name)

    # one start per scope
    for scope in _scopes(model):
        kids = model.children_of(scope)
        if scope is None:
            kids = tuple(k for k in kids if k.kind in STATE_LIKE)
        starts = [k for k in kids if k.kind == "start"]
        label = "top level" if scope is None else f"scope {scope!r}"
        if len(starts) != 1:
            issue(SEVERITY_ERROR, "start.count",
                  f"{label} has {len(starts)} start nodes, expected exactly 1",
                  scope)

    for n in sorted(model.nodes, key=lambda n: n.id):
        if n.kind == "history":
            parent_kind = model.node(n.parent).kind if n.parent else None
            if parent_kind not in ("hierarchicalState", "region"):
                issue(SEVERITY_ERROR, "history.placement",
                      "history nodes may only appear inside a hierarchical "
                      "state or a region", n.id)
        if n.kind == "concurrentState":
            regions = [c for c in model.children_of(n.id) if c.kind == "region"]
            if len(regions) < 2:
                issue(SEVERITY_ERROR, "concurrent.regions",
                      f"concurrent state {n.id!r} has {len(regions)} regions, "
                      "expected at least 2", n.id)
        if n.kind in COMPOSITE:
            defaults = [e for e in model.edges_from(n.id, "transition")
                        if "trigger" not in e.properties]
            if len(defaults) > 1:
                issue(SEVERITY_ERROR, "default.duplicate",
                      f"composite {n.id!r} has {len(defaults)} untriggered "
                      "outgoing transitions, at most 1 allowed", n.id)
        if n.kind == "decision":
            outgoing = model.edges_from(n.id, "transition")
            if not outgoing:
                issue(SEVERITY_ERROR, "decision.outgoing",
                      f"decision {n.id!r} has no outgoing transition", n.id)
            for e in outgoing:
                if "trigger" in e.properties:
                    issue(SEVERITY_ERROR, "decision.triggered",
                          f"transition {e.id!r} out of decision {n.id!r} must "
                          "not carry a trigger", e.id)
            issue(SEVERITY_INFO, "decision.exhaustiveness",
                  f"guard exhaustiveness of decision {n.id!r} cannot be "
                  "checked statically", n.id)
        if n.kind == "start":
            outgoing = model.edges_from(n.id, "transition")
            for e in outgoing:
                if "trigger" in e.properties:
                    issue(SEVERITY_ERROR, "start.triggered",
                          f"transition {e.id!r} out of a start node must be "
                          "untriggered", e.id)
                if "guard" in e.properties:
                    issue(SEVERITY_WARNING, "start.guarded",
                          f"guard on start transition {e.id!r} is ignored "
                          "during entry", e.id)
                target = model.node(e.target)
                if target.parent != n.parent:
                    issue(SEVERITY_ERROR, "start.target.scope",
                          f"start transition {e.id!r} must stay in its scope",
                          e.id)
                elif target.kind == "history":
                    # falling back from an empty history to start entry
                    # would re-run this very transition, forever
                    issue(SEVERITY_ERROR, "start.target.history",
                          f"start transition {e.id!r} must not target a "
                          "history node", e.id)

    def region_chain(node_id: str) -> tuple:
        return tuple(a for a in model.ancestors(node_id)
                     if model.node(a).kind == "region")

    for e in sorted(model.edges, key=lambda e: e.id):
        if e.kind != "transition":
            continue
        target = model.node(e.target)
        if target.kind in ("declarations", "variable", "trigger"):
            issue(SEVERITY_ERROR, "transition.target",
                  f"transition {e.id!r} targets a declarations element", e.id)
        source = model.node(e.source)
        if source.kind == "state" and "trigger" not in e.properties:
            issue(SEVERITY_WARNING, "transition.untriggered",
                  f"untriggered transition {e.id!r} from simple state "
                  f"{e.source!r} can never fire", e.id)
        # a transition may leave a concurrent state entirely, but must not
        # hop between its regions
        src_regions = region_chain(e.source)
        tgt_regions = region_chain(e.target)
        common = 0
        for a, b in zip(src_regions, tgt_regions):
            if a != b:
                break
            common += 1
        if len(src_regions) > common and len(tgt_regions) > common:
            issue(SEVERITY_ERROR, "transition.crossregion",
                  f"transition {e.id!r} crosses region boundaries", e.id)

        trig = e.properties.get("trigger")
        if trig is not None and trig not in triggers:
            issue(SEVERITY_ERROR, "trigger.undeclared",
                  f"transition {e.id!r} uses undeclared trigger {trig!r}", e.id)
        for prop, parse, check in (
                ("guard", ex.parse_expression,
                 lambda ast: ex.typecheck_expression(ast, schema)),
                ("action", ex.parse_action,
                 lambda ast: (None, ex.typecheck_action(ast, schema)))):
            text = e.properties.get(prop)
            if text is None:
                continue
            try:
                ast = parse(text)
            except ParseError as exc:
                issue(SEVERITY_ERROR, f"{prop}.parse",
                      f"{prop} of transition {e.id!r} does not parse: {exc}",
                      e.id)
                continue
            tag, sub = check(ast)
            for s in sub:
                issue(SEVERITY_ERROR, f"{prop}.{s.rule_id}",
                      f"{prop} of transition {e.id!r}: {s.message}", e.id)
            if prop == "guard" and not sub and tag != ex.BOOLEAN:
                issue(SEVERITY_ERROR, "guard.type",
                      f"guard of transition {e.id!r} must be boolean, "
                      f"got {tag}", e.id)

    return sort_issues(issues)


# -- compiled chart and simulation --------------------------------------------

class Statechart:
    """Pre-indexed statechart; build once, simulate many times.

    Assumes validate_statechart reported no errors.
    """

    def __init__(self, model: GraphModel):
        self.model = model
        self.kind = {n.id: n.kind for n in model.nodes}
        self.parent = {n.id: n.parent for n in model.nodes}
        self.children = {scope: tuple(n.id for n in model.children_of(scope))
                         for scope in [None] + [n.id for n in model.nodes]}
        self.variables = declared_variables(model)
        self.triggers = declared_triggers(model)
        self.schema = {name: tag for name, (tag, _) in self.variables.items()}

        self.transitions: dict[str, Edge] = {}
        self.out: dict[str, list[Edge]] = {}
        self.guards: dict[str, ex.Expression] = {}
        self.actions: dict[str, ex.ActionList] = {}
        for e in sorted(model.edges, key=lambda e: e.id):
            if e.kind != "transition":
                continue
            self.transitions[e.id] = e
            self.out.setdefault(e.source, []).append(e)
            guard = e.properties.get("guard")
            if guard is not None:
                self.guards[e.id] = ex.parse_expression(guard)
            action = e.properties.get("action")
            if action is not None:
                self.actions[e.id] = ex.parse_action(action)

        self.descendants: dict[str, frozenset] = {}
        for n in model.nodes:
            self.descendants[n.id] = frozenset(self._collect_subtree(n.id))

        self.start_of: dict[str | None, str] = {}
        self.history_of: dict[str, str] = {}
        for scope in [None] + [n.id for n in model.nodes]:
            for child in self.children.get(scope, ()):
                if self.kind[child] == "start":
                    self.start_of[scope] = child
                if self.kind[child] == "history" and scope is not None:
                    self.history_of[scope] = child

    def _collect_subtree(self, node_id: str):
        yield node_id
        for child in self.children.get(node_id, ()):
            yield from self._collect_subtree(child)

    def regions(self, concurrent_id: str) -> list[str]:
        return [c for c in self.children[concurrent_id]
                if self.kind[c] == "region"]

    def path(self, node_id: str) -> tuple:
        """Containment chain from the top down to and including the node."""
        return self.model.ancestors(node_id) + (node_id,)

    def initial_env(self) -> ex.Environment:
        return ex.Environment(
            schema=self.schema,
            values={name: value for name, (_, value) in self.variables.items()})

    def guard_true(self, edge: Edge, env: ex.Environment) -> bool:
        ast = self.guards.get(edge.id)
        if ast is None:
            return True
        return bool(ex.eval_expression(ast, env))

    # -- macrostep machinery --

    def init_configuration(self) -> Configuration:
        step = _Step(self, set(), self.initial_env(), {})
        step.take_start(None)
        step.run_completion()
        return step.configuration()

    def fire_trigger(self, config: Configuration, trigger: str
                     ) -> tuple[Configuration, SimulationEvent]:
        if trigger not in self.triggers:
            raise UnknownTriggerError(f"trigger {trigger!r} is not declared")
        if config.terminated:
            return config, SimulationEvent(fired_trigger=trigger)

        candidates = []
        for source, edges in self.out.items():
            if source not in config.active_states:
                continue
            for e in edges:
                if e.properties.get("trigger") != trigger:
                    continue
                if self.guard_true(e, config.env):
                    candidates.append(e)
        candidates.sort(key=lambda e: (self.path(e.source), e.id))

        taken: list[Edge] = []
        exited: set[str] = set()
        for e in candidates:
            exit_set = self.descendants[self.exit_root(e.source, e.target)]
            if exit_set & exited:
                continue
            taken.append(e)
            exited |= exit_set

        if not taken:
            return config, SimulationEvent(fired_trigger=trigger)

        step = _Step(self, set(config.active_states), config.env,
                     dict(config.history))
        step.take_transitions(taken)
        step.run_completion()
        return step.configuration(), SimulationEvent(
            fired_trigger=trigger,
            taken_transitions=tuple(e.id for e in taken),
            executed_actions=tuple(step.executed_actions),
            completions=tuple(step.completions),
        )

    def run_completion(self, config: Configuration
                       ) -> tuple[Configuration, list[str]]:
        step = _Step(self, set(config.active_states), config.env,
                     dict(config.history))
        step.run_completion()
        return step.configuration(), list(step.completions)

    def exit_root(self, source: str, target: str) -> str:
        """The node whose whole subtree is exited when the transition fires:
        the ancestor-or-self of the source directly below the deepest
        container shared with the target."""
        src_chain = self.model.ancestors(source)
        tgt_chain = self.model.ancestors(target)
        common = 0
        for a, b in zip(src_chain, tgt_chain):
            if a != b:
                break
            common += 1
        chain = src_chain + (source,)
        return chain[common]


class _Step:
    """Mutable working state for one macrostep."""

    def __init__(self, chart: Statechart, active: set, env: ex.Environment,
                 history: dict):
        self.chart = chart
        self.active = active
        self.env = env
        self.history = history
        self.terminated = False
        self.executed_actions: list[str] = []
        self.completions: list[str] = []

    def configuration(self) -> Configuration:
        return Configuration(
            active_states=frozenset(self.active),
            env=self.env,
            history={k: frozenset(v) for k, v in sorted(self.history.items())},
            terminated=self.terminated,
        )

    # -- exits --

    def exit_subtree(self, root: str) -> None:
        chart = self.chart
        subtree = chart.descendants[root]
        for scope, history_node in sorted(chart.history_of.items()):
            if scope is None or scope not in subtree:
                continue
            kind = chart.kind[scope]
            owner_active = (scope in self.active if kind == "hierarchicalState"
                            else chart.parent[scope] in self.active)
            if not owner_active:
                continue
            stored = {c for c in chart.children[scope]
                      if c in self.active and chart.kind[c] in STATE_LIKE}
            self.history[scope] = stored
        self.active -= subtree

    # -- entries --

    def run_action(self, edge: Edge) -> None:
        actions = self.chart.actions.get(edge.id)
        if actions is None:
            return
        self.env = ex.apply_action(actions, self.env)
        self.executed_actions.append(edge.properties["action"])

    def take_start(self, scope: str | None) -> None:
        """Default entry of a scope through its start node."""
        start = self.chart.start_of[scope]
        edge = self.chart.out[start][0]
        self.run_action(edge)
        self.enter_target(edge.target)

    def enter_target(self, target: str) -> None:
        self._enter_along(self.chart.path(target), 0)

    def _enter_along(self, path: tuple, index: int) -> None:
        """Activate the containment chain down to the target, entering the
        forced branch of a concurrent state first and its remaining regions
        through their start nodes afterwards."""
        chart = self.chart
        while index < len(path) - 1:
            node = path[index]
            kind = chart.kind[node]
            if kind == "region" or node in self.active:
                index += 1
                continue
            self.active.add(node)
            if kind == "concurrentState":
                forced_region = path[index + 1]
                self._enter_along(path, index + 1)
                for region in chart.regions(node):
                    if region != forced_region:
                        self.take_start(region)
                return
            index += 1
        self.enter_node(path[-1])

    def enter_node(self, node: str) -> None:
        chart = self.chart
        kind = chart.kind[node]
        if kind == "history":
            scope = chart.parent[node]
            stored = self.history.get(scope, frozenset())
            if stored:
                for child in sorted(stored):
                    self.enter_target(child)
            else:
                self.take_start(scope)
            return
        self.active.add(node)
        if kind == "end" and chart.parent[node] is None:
            self.terminated = True
        elif kind == "hierarchicalState":
            self.take_start(node)
        elif kind == "concurrentState":
            for region in chart.regions(node):
                self.take_start(region)

    # -- transitions and completion --

    def take_transitions(self, taken: list[Edge]) -> None:
        for e in taken:
            self.exit_subtree(self.chart.exit_root(e.source, e.target))
        for e in taken:
            self.run_action(e)
        for e in taken:
            self.enter_target(e.target)

    def take_single(self, edge: Edge) -> None:
        self.exit_subtree(self.chart.exit_root(edge.source, edge.target))
        self.run_action(edge)
        self.enter_target(edge.target)

    def completion_candidate(self) -> Edge | None:
        """First enabled completion, decisions before composite defaults,
        scanning in node id order."""
        chart = self.chart
        for node in sorted(self.active):
            if chart.kind[node] != "decision":
                continue
            for e in chart.out.get(node, []):
                if self.chart.guard_true(e, self.env):
                    return e
            raise StuckAtDecisionError(
                f"decision {node!r} has no outgoing transition with a true "
                "guard", node)
        for node in sorted(self.active):
            kind = chart.kind[node]
            if kind == "hierarchicalState":
                done = any(chart.kind[c] == "end" and c in self.active
                           for c in chart.children[node])
            elif kind == "concurrentState":
                done = all(
                    any(chart.kind[c] == "end" and c in self.active
                        for c in chart.children[region])
                    for region in chart.regions(node))
            else:
                continue
            if not done:
                continue
            for e in chart.out.get(node, []):
                if "trigger" in e.properties:
                    continue
                if self.chart.guard_true(e, self.env):
                    return e
        return None

    def run_completion(self) -> None:
        cap = len(self.chart.transitions)
        count = 0
        while True:
            edge = self.completion_candidate()
            if edge is None:
                return
            count += 1
            if count > cap:
                raise NonterminatingCompletionError(
                    f"completion cascade exceeded {cap} transitions in one "
                    "macrostep")
            self.completions.append(edge.id)
            self.take_single(edge)


# -- module-level operation surface -------------------------------------------

def init_configuration(model: GraphModel) -> Configuration:
    return Statechart(model).init_configuration()


def fire_trigger(model: GraphModel, config: Configuration, trigger: str
                 ) -> tuple[Configuration, SimulationEvent]:
    return Statechart(model).fire_trigger(config, trigger)


def run_completion(model: GraphModel, config: Configuration
                   ) -> tuple[Configuration, list[str]]:
    return Statechart(model).run_completion(config)

"""Point-and-click story language: validation, play, model checking, codegen.

A story is a set of screens with clickable areas. Clicking follows a chain
of control-flow hops through variable modifiers (set a boolean to a fixed
value) and conditions (branch on one boolean variable) until the next
screen is reached. The set of boolean variables plus the current screen is
the complete game state, which makes the whole game a finite Kripke
transition system: states are labeled with ``screen:<id>`` and ``var:<name>``
propositions, transitions with click area ids.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import (
    MissingAssetError,
    UnknownPropositionError,
    WrongScreenError,
)
from .graph_core import (
    Cardinality,
    EdgeKindSpec,
    GraphModel,
    NodeKindSpec,
    PropertySpec,
    SEVERITY_ERROR,
    SEVERITY_WARNING,
    ValidationIssue,
    metamodel,
    save_model,
    sort_issues,
)

_FLOW_TARGETS = ("screen", "variableModifier", "condition")

WEBSTORY_METAMODEL = metamodel(
    "webstory",
    node_kinds=[
        NodeKindSpec("screen", properties=(
            PropertySpec("backgroundImage", "text", required=True),)),
        NodeKindSpec("clickArea",
                     properties=(PropertySpec("rect", "list-of-text",
                                              required=True),),
                     allowed_parents=frozenset({"screen"})),
        NodeKindSpec("startMarker"),
        NodeKindSpec("variable", properties=(PropertySpec("initial", "boolean"),)),
        NodeKindSpec("variableModifier", properties=(
            PropertySpec("targetValue", "boolean", required=True),)),
        NodeKindSpec("condition"),
    ],
    edge_kinds=[
        EdgeKindSpec(
            "controlFlow",
            pairs=frozenset((s, t) for s in ("startMarker", "clickArea",
                                             "variableModifier")
                            for t in _FLOW_TARGETS),
            out_bounds={"startMarker": Cardinality(1, 1),
                        "clickArea": Cardinality(1, 1),
                        "variableModifier": Cardinality(1, 1)},
        ),
        EdgeKindSpec("trueFlow",
                     pairs=frozenset(("condition", t) for t in _FLOW_TARGETS),
                     out_bounds={"condition": Cardinality(1, 1)}),
        EdgeKindSpec("falseFlow",
                     pairs=frozenset(("condition", t) for t in _FLOW_TARGETS),
                     out_bounds={"condition": Cardinality(1, 1)}),
        EdgeKindSpec("dataRead", pairs=frozenset({("condition", "variable")}),
                     out_bounds={"condition": Cardinality(1, 1)}),
        EdgeKindSpec("dataWrite",
                     pairs=frozenset({("variableModifier", "variable")}),
                     out_bounds={"variableModifier": Cardinality(1, 1)}),
    ],
)


@dataclass(frozen=True)
class GameState:
    """Current screen plus the valuation of every declared variable."""

    current_screen: str
    valuation: Mapping[str, bool]
    finished: bool = False

    def to_json_value(self) -> dict:
        return {
            "currentScreen": self.current_screen,
            "finished": self.finished,
            "valuation": dict(sorted(self.valuation.items())),
        }


@dataclass(frozen=True)
class KtsState:
    screen: str
    true_vars: frozenset

    def labels(self) -> frozenset:
        return frozenset({f"screen:{self.screen}"}
                         | {f"var:{v}" for v in self.true_vars})


@dataclass(frozen=True)
class KripkeTransitionSystem:
    states: frozenset
    initial: KtsState
    transitions: frozenset  # (KtsState, clickArea id, KtsState)

    def labels_of(self, state: KtsState) -> frozenset:
        return state.labels()


def declared_variables(model: GraphModel) -> dict[str, bool]:
    return {n.id: bool(n.properties.get("initial", False))
            for n in model.nodes_of_kind("variable")}


def screens(model: GraphModel) -> tuple:
    return model.nodes_of_kind("screen")


def click_areas_of(model: GraphModel, screen_id: str) -> tuple:
    return tuple(n for n in model.children_of(screen_id)
                 if n.kind == "clickArea")


def _flow_target(model: GraphModel, node_id: str, kind: str) -> str | None:
    edges = model.edges_from(node_id, kind)
    return edges[0].target if edges else None


def validate_webstory(model: GraphModel) -> list[ValidationIssue]:
    """Story-level rules; assumes structural validation passed (which
    already pins down endpoint kinds and out-degrees)."""
    issues: list[ValidationIssue] = []

    def issue(severity, rule_id, message, element_id=None):
        issues.append(ValidationIssue(severity, rule_id, message, element_id))

    markers = model.nodes_of_kind("startMarker")
    if len(markers) != 1:
        issue(SEVERITY_ERROR, "start.count",
              f"model has {len(markers)} start markers, expected exactly 1")
    else:
        target = _flow_target(model, markers[0].id, "controlFlow")
        if target is not None and model.node(target).kind != "screen":
            issue(SEVERITY_ERROR, "start.target",
                  "the start marker must point at a screen", markers[0].id)

    for area in model.nodes_of_kind("clickArea"):
        rect = area.properties.get("rect", ())
        if len(rect) != 4 or not all(_is_int(v) for v in rect):
            issue(SEVERITY_ERROR, "rect.malformed",
                  f"click area {area.id!r} rect must be four integers "
                  "x,y,w,h", area.id)

    for cond in model.nodes_of_kind("condition"):
        if not model.edges_from(cond.id, "trueFlow"):
            issue(SEVERITY_ERROR, "condition.branch.missing",
                  f"condition {cond.id!r} has no trueFlow branch", cond.id)
        if not model.edges_from(cond.id, "falseFlow"):
            issue(SEVERITY_ERROR, "condition.branch.missing",
                  f"condition {cond.id!r} has no falseFlow branch", cond.id)
        if not model.edges_from(cond.id, "dataRead"):
            issue(SEVERITY_ERROR, "condition.variable.missing",
                  f"condition {cond.id!r} reads no variable", cond.id)

    for mod in model.nodes_of_kind("variableModifier"):
        if not model.edges_from(mod.id, "dataWrite"):
            issue(SEVERITY_ERROR, "modifier.variable.missing",
                  f"modifier {mod.id!r} writes no variable", mod.id)
        if not model.edges_from(mod.id, "controlFlow"):
            issue(SEVERITY_ERROR, "modifier.flow.missing",
                  f"modifier {mod.id!r} has no outgoing control flow", mod.id)

    # chains between screens must be acyclic; with the per-kind out-degree
    # rules this also guarantees every chain ends at a screen
    chain_nodes = [n.id for n in model.nodes
                   if n.kind in ("variableModifier", "condition")]
    chain_set = set(chain_nodes)
    succs = {n: set() for n in chain_nodes}
    for e in model.edges:
        if e.kind in ("controlFlow", "trueFlow", "falseFlow") \
                and e.source in chain_set and e.target in chain_set:
            succs[e.source].add(e.target)
    visiting: set[str] = set()
    settled: set[str] = set()

    def walk(node: str, trail: list[str]) -> list[str] | None:
        if node in settled:
            return None
        if node in visiting:
            return trail[trail.index(node):]
        visiting.add(node)
        trail.append(node)
        for nxt in sorted(succs[node]):
            cycle = walk(nxt, trail)
            if cycle is not None:
                return cycle
        trail.pop()
        visiting.discard(node)
        settled.add(node)
        return None

    for n in sorted(chain_nodes):
        cycle = walk(n, [])
        if cycle is not None:
            issue(SEVERITY_ERROR, "chain.cycle",
                  "control-flow chain cycles without reaching a screen: "
                  + " -> ".join(cycle), cycle[0])
            break

    if not any(i.severity == SEVERITY_ERROR for i in issues):
        reachable = {s.screen for s in derive_kts(model).states}
        for s in screens(model):
            if s.id not in reachable:
                issue(SEVERITY_WARNING, "screen.unreachable",
                      f"screen {s.id!r} is unreachable under every valuation",
                      s.id)

    return sort_issues(issues)


def _is_int(text: str) -> bool:
    return bool(re.fullmatch(r"-?\d+", text))


def initial_state(model: GraphModel) -> GameState:
    marker = model.nodes_of_kind("startMarker")[0]
    screen_id = _flow_target(model, marker.id, "controlFlow")
    valuation = declared_variables(model)
    return GameState(
        current_screen=screen_id,
        valuation=valuation,
        finished=not click_areas_of(model, screen_id),
    )


def click(model: GraphModel, state: GameState, click_area: str) -> GameState:
    """Follow one click through its modifier/condition chain to the next
    screen. Total on validated models."""
    node = model.node_by_id.get(click_area)
    if node is None or node.kind != "clickArea" \
            or node.parent != state.current_screen:
        raise WrongScreenError(
            f"click area {click_area!r} is not on screen "
            f"{state.current_screen!r}")
    valuation = dict(state.valuation)
    current = _flow_target(model, click_area, "controlFlow")
    while True:
        kind = model.node(current).kind
        if kind == "screen":
            return GameState(
                current_screen=current,
                valuation=valuation,
                finished=not click_areas_of(model, current),
            )
        if kind == "variableModifier":
            variable = _flow_target(model, current, "dataWrite")
            valuation[variable] = bool(
                model.node(current).properties["targetValue"])
            current = _flow_target(model, current, "controlFlow")
        else:  # condition
            variable = _flow_target(model, current, "dataRead")
            branch = "trueFlow" if valuation[variable] else "falseFlow"
            current = _flow_target(model, current, branch)


def derive_kts(model: GraphModel) -> KripkeTransitionSystem:
    """Breadth-first exploration of (screen, valuation) through click."""
    start = initial_state(model)
    initial = KtsState(start.current_screen, _true_vars(start.valuation))
    states = {initial}
    transitions = set()
    queue = deque([start])
    seen = {initial}
    while queue:
        game = queue.popleft()
        source = KtsState(game.current_screen, _true_vars(game.valuation))
        for area in click_areas_of(model, game.current_screen):
            nxt = click(model, game, area.id)
            target = KtsState(nxt.current_screen, _true_vars(nxt.valuation))
            transitions.add((source, area.id, target))
            if target not in seen:
                seen.add(target)
                states.add(target)
                queue.append(nxt)
    return KripkeTransitionSystem(
        states=frozenset(states),
        initial=initial,
        transitions=frozenset(transitions),
    )


def _true_vars(valuation: Mapping[str, bool]) -> frozenset:
    return frozenset(name for name, value in valuation.items() if value)


@dataclass(frozen=True)
class ReachabilityResult:
    reachable: bool
    witness: tuple | None = None  # ((KtsState, clickArea id), ...)


def proposition_vocabulary(model: GraphModel) -> frozenset:
    return frozenset({f"screen:{s.id}" for s in screens(model)}
                     | {f"var:{v.id}" for v in model.nodes_of_kind("variable")})


def check_reachability(kts: KripkeTransitionSystem, goal: str,
                       vocabulary: frozenset | None = None
                       ) -> ReachabilityResult:
    """Shortest-path reachability of a labeled state.

    ``vocabulary`` guards against typos; when omitted it is inferred from
    the system itself (all labels that occur plus all screen labels).
    """
    if vocabulary is None:
        vocabulary = frozenset().union(*(s.labels() for s in kts.states))
    if goal not in vocabulary:
        raise UnknownPropositionError(f"unknown proposition {goal!r}")

    succs: dict[KtsState, list] = {}
    for (src, label, tgt) in sorted(
            kts.transitions, key=lambda t: (t[0].screen, sorted(t[0].true_vars),
                                            t[1])):
        succs.setdefault(src, []).append((label, tgt))

    queue = deque([kts.initial])
    parents: dict[KtsState, tuple] = {kts.initial: None}
    while queue:
        state = queue.popleft()
        if goal in state.labels():
            steps = []
            cur = state
            while parents[cur] is not None:
                prev, label = parents[cur]
                steps.append((prev, label))
                cur = prev
            return ReachabilityResult(True, tuple(reversed(steps)))
        for label, tgt in succs.get(state, []):
            if tgt not in parents:
                parents[tgt] = (state, label)
                queue.append(tgt)
    return ReachabilityResult(False, None)


# -- site generation ----------------------------------------------------------

_ASSET_DIR = Path(__file__).parent / "webstory_assets"


def generate_site(model: GraphModel, assets: Path | str) -> dict[str, bytes]:
    """Self-contained browser build of a story.

    Returns relative path -> bytes; writing is the caller's concern so a
    failed generation never leaves partial output behind.
    """
    assets = Path(assets)
    model_json = save_model(model)

    files: dict[str, bytes] = {}
    for s in screens(model):
        image = s.properties["backgroundImage"]
        source = assets / image
        if not source.is_file():
            raise MissingAssetError(
                f"background image {image!r} for screen {s.id!r} not found "
                f"under {assets}")
        files[f"assets/{image}"] = source.read_bytes()

    runtime = (_ASSET_DIR / "runtime.js").read_bytes()
    style = (_ASSET_DIR / "style.css").read_bytes()
    template = (_ASSET_DIR / "index.html").read_text(encoding="utf-8")
    # </ must not terminate the inline script block early
    embedded = model_json.decode("utf-8").replace("</", "<\\/")
    index = template.replace("__TITLE__", json.dumps(model.id)[1:-1]) \
                    .replace("__MODEL__", embedded)

    files["index.html"] = index.encode("utf-8")
    files["runtime.js"] = runtime
    files["style.css"] = style
    files["model.json"] = model_json
    return files

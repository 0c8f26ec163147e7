"""CI/CD pipeline language: from a job graph to a GitLab-CI YAML document.

Jobs form a DAG; dependsOn edges are drawn in workflow direction, so the
edge target depends on (needs) the edge source. Build targets attached via
appliesTo multiply a job into per-target instances; ``${name}`` script
placeholders resolve against the target's parameters first, then against
model variables. Stages are longest-path layers over the DAG, which keeps
every need in a strictly earlier stage.

Configuration nodes contribute properties to the jobs they configure, with
job-local properties winning. A configuration node that configures no job
holds pipeline-level settings; ``stageNames`` is the only one understood
today.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import CycleError, StageNameArityError, TargetSetMismatchError
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

RIG_METAMODEL = metamodel(
    "pipeline",
    node_kinds=[
        NodeKindSpec("job", properties=(
            PropertySpec("scriptTemplate", "list-of-text"),
            PropertySpec("image", "text"),
        )),
        NodeKindSpec("target", properties=(
            PropertySpec("parameters", "list-of-text"),)),
        NodeKindSpec("variable", properties=(
            PropertySpec("name", "text", required=True),
            PropertySpec("value", "text", required=True),
        )),
        NodeKindSpec("configurationNode"),
    ],
    edge_kinds=[
        EdgeKindSpec("dependsOn", pairs=frozenset({("job", "job")})),
        EdgeKindSpec("appliesTo", pairs=frozenset({("target", "job")})),
        EdgeKindSpec("configures",
                     pairs=frozenset({("configurationNode", "job")})),
    ],
)

_PLACEHOLDER_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class JobInstance:
    name: str
    job_id: str
    target_id: str | None
    resolved_script: tuple
    image: str | None = None
    stage_index: int = 0
    needs: tuple = ()


@dataclass(frozen=True)
class PipelineInstanceSet:
    instances: tuple
    stage_names: tuple = ()


def _variables(model: GraphModel) -> dict[str, str]:
    out = {}
    for n in model.nodes_of_kind("variable"):
        out[n.properties["name"]] = n.properties["value"]
    return out


def _target_parameters(target: Node) -> dict[str, str]:
    params = {}
    for entry in target.properties.get("parameters", ()):
        key, sep, value = entry.partition("=")
        if sep:
            params[key] = value
    return params


def _effective_properties(model: GraphModel, job_id: str) -> dict:
    """Configuration-node properties under the job's own, which win."""
    merged: dict = {}
    for e in model.edges_to(job_id, "configures"):
        merged.update(model.node(e.source).properties)
    merged.update(model.node(job_id).properties)
    return merged


def _targets_of(model: GraphModel, job_id: str) -> tuple:
    return tuple(model.node(e.source)
                 for e in model.edges_to(job_id, "appliesTo"))


def pipeline_settings(model: GraphModel) -> dict:
    """Properties of configuration nodes that configure no job."""
    settings: dict = {}
    for n in model.nodes_of_kind("configurationNode"):
        if not model.edges_from(n.id, "configures"):
            settings.update(n.properties)
    return settings


def _substitute(line: str, mapping: dict[str, str]) -> tuple[str, list[str]]:
    unresolved = []

    def repl(m):
        name = m.group(1)
        if name in mapping:
            return mapping[name]
        unresolved.append(name)
        return m.group(0)

    return _PLACEHOLDER_RE.sub(repl, line), unresolved


def validate_pipeline(model: GraphModel) -> list[ValidationIssue]:
    """Pipeline-level rules; assumes structural validation passed."""
    issues: list[ValidationIssue] = []

    def issue(rule_id, message, element_id=None):
        issues.append(ValidationIssue(SEVERITY_ERROR, rule_id, message,
                                      element_id))

    try:
        topological_order(model, edge_kinds={"dependsOn"}, node_kinds={"job"})
    except CycleError as exc:
        issue("dag.cycle",
              "jobs must form a DAG: " + " -> ".join(exc.witness),
              exc.witness[0])

    seen_names: dict[str, str] = {}
    for n in model.nodes_of_kind("variable"):
        name = n.properties["name"]
        if name in seen_names:
            issue("variable.duplicate",
                  f"variable name {name!r} is declared by both "
                  f"{seen_names[name]!r} and {n.id!r}", n.id)
        else:
            seen_names[name] = n.id

    variables = _variables(model)
    for job in model.nodes_of_kind("job"):
        props = _effective_properties(model, job.id)
        script = props.get("scriptTemplate", ())
        if not script:
            issue("script.missing", f"job {job.id!r} has no script", job.id)
            continue
        targets = _targets_of(model, job.id) or (None,)
        for target in targets:
            mapping = dict(variables)
            label = "without a target"
            if target is not None:
                mapping.update(_target_parameters(target))
                label = f"for target {target.id!r}"
            for line in script:
                resolved, unresolved = _substitute(line, mapping)
                for name in unresolved:
                    issue("placeholder.unresolved",
                          f"job {job.id!r} {label}: placeholder "
                          f"${{{name}}} does not resolve", job.id)
                leftovers = _PLACEHOLDER_RE.findall(resolved)
                for name in leftovers:
                    if name not in unresolved:
                        issue("placeholder.unresolved",
                              f"job {job.id!r} {label}: substitution "
                              f"reintroduces ${{{name}}}", job.id)

    return sort_issues(issues)


def expand_targets(model: GraphModel) -> PipelineInstanceSet:
    """One instance per (job, attached target); jobs without targets yield
    a single instance. Parameters override variables during substitution."""
    variables = _variables(model)
    instances = []
    for job in model.nodes_of_kind("job"):
        props = _effective_properties(model, job.id)
        script = props.get("scriptTemplate", ())
        image = props.get("image")
        targets = sorted(_targets_of(model, job.id), key=lambda t: t.id)
        if not targets:
            mapping = variables
            resolved = tuple(_substitute(line, mapping)[0] for line in script)
            instances.append(JobInstance(
                name=job.id, job_id=job.id, target_id=None,
                resolved_script=resolved, image=image))
            continue
        for target in targets:
            mapping = dict(variables)
            mapping.update(_target_parameters(target))
            resolved = tuple(_substitute(line, mapping)[0] for line in script)
            instances.append(JobInstance(
                name=f"{job.id}:{target.id}", job_id=job.id,
                target_id=target.id, resolved_script=resolved, image=image))
    instances.sort(key=lambda i: (i.job_id, i.name))
    return PipelineInstanceSet(instances=tuple(instances))


def _job_stages(model: GraphModel) -> dict[str, int]:
    """Longest-path layer per job over the dependsOn DAG."""
    order = topological_order(model, edge_kinds={"dependsOn"},
                              node_kinds={"job"})
    stage: dict[str, int] = {}
    for job_id in order:
        incoming = model.edges_to(job_id, "dependsOn")
        stage[job_id] = max((stage[e.source] + 1 for e in incoming), default=0)
    return stage


def assign_stages(instance_set: PipelineInstanceSet, model: GraphModel
                  ) -> PipelineInstanceSet:
    """Stage index per instance. Stage names default to stage_<k> unless the
    pipeline declares a stageNames list covering every derived stage."""
    stage = _job_stages(model)
    instances = tuple(replace(i, stage_index=stage[i.job_id])
                      for i in instance_set.instances)
    needed = max((i.stage_index for i in instances), default=-1) + 1
    declared = pipeline_settings(model).get("stageNames")
    if declared is not None and len(declared) < needed:
        raise StageNameArityError(
            f"pipeline declares {len(declared)} stage names but "
            f"{needed} stages are derived")
    if declared is not None:
        names = tuple(declared)
    else:
        names = tuple(f"stage_{k}" for k in range(needed))
    return PipelineInstanceSet(instances=instances, stage_names=names)


def derive_needs(instance_set: PipelineInstanceSet, model: GraphModel
                 ) -> PipelineInstanceSet:
    """Lift job-level dependencies onto instances.

    Both sides expanded over the same target set: match per target. One
    side unexpanded: connect to every counterpart instance. Expanded over
    different target sets: an error, never a silent product.
    """
    by_job: dict[str, list[JobInstance]] = {}
    for inst in instance_set.instances:
        by_job.setdefault(inst.job_id, []).append(inst)

    needs: dict[str, set] = {inst.name: set()
                             for inst in instance_set.instances}
    for e in sorted(model.edges, key=lambda e: e.id):
        if e.kind != "dependsOn":
            continue
        producers = by_job.get(e.source, [])
        consumers = by_job.get(e.target, [])
        p_targets = {p.target_id for p in producers} - {None}
        c_targets = {c.target_id for c in consumers} - {None}
        if p_targets and c_targets:
            if p_targets != c_targets:
                raise TargetSetMismatchError(
                    f"job {e.target!r} (targets {sorted(c_targets)}) depends "
                    f"on {e.source!r} (targets {sorted(p_targets)}); the "
                    "target sets must match")
            for consumer in consumers:
                needs[consumer.name].add(f"{e.source}:{consumer.target_id}")
        else:
            for consumer in consumers:
                needs[consumer.name].update(p.name for p in producers)

    instances = tuple(replace(i, needs=tuple(sorted(needs[i.name])))
                      for i in instance_set.instances)
    return PipelineInstanceSet(instances=instances,
                               stage_names=instance_set.stage_names)


def compile_pipeline(model: GraphModel) -> PipelineInstanceSet:
    """expand, stage, derive needs in order."""
    return derive_needs(assign_stages(expand_targets(model), model), model)


# -- YAML emission ------------------------------------------------------------

_PLAIN_SCALAR_RE = re.compile(r"^[0-9A-Za-z_][0-9A-Za-z_ ./:$@{}()\[\],=+-]*$")
_AMBIGUOUS = {"true", "false", "null", "yes", "no", "on", "off", "~", ""}


def _scalar(text: str) -> str:
    """Quote only when the plain form would be ambiguous YAML."""
    if (_PLAIN_SCALAR_RE.match(text)
            and text.lower() not in _AMBIGUOUS
            and ": " not in text
            and " #" not in text
            and not text.endswith(":")
            and text.strip() == text
            and not _NUMBER_RE.match(text)):
        return text
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")


def emit_ci_yaml(instance_set: PipelineInstanceSet) -> str:
    """Deterministic GitLab-CI document: stages list, then one mapping per
    instance sorted by (stage, name), keys in fixed order."""
    lines: list[str] = []
    if instance_set.stage_names:
        lines.append("stages:")
        for name in instance_set.stage_names:
            lines.append(f"  - {_scalar(name)}")
    else:
        lines.append("stages: []")

    ordered = sorted(instance_set.instances,
                     key=lambda i: (i.stage_index, i.name))
    for inst in ordered:
        lines.append("")
        lines.append(f"{_scalar(inst.name)}:")
        lines.append(f"  stage: {_scalar(instance_set.stage_names[inst.stage_index])}")
        if inst.image is not None:
            lines.append(f"  image: {_scalar(inst.image)}")
        lines.append("  script:")
        for line in inst.resolved_script:
            lines.append(f"    - {_scalar(line)}")
        if inst.needs:
            lines.append("  needs:")
            for need in inst.needs:
                lines.append(f"    - {_scalar(need)}")
    return "\n".join(lines) + "\n"

"""Model-type dispatch shared by the CLI and the HTTP service."""

from __future__ import annotations

from typing import Mapping

from .dataflow import DATAFLOW_METAMODEL, validate_flow
from .graph_core import GraphModel, Metamodel, ValidationIssue, validate_structure
from .rig import RIG_METAMODEL, validate_pipeline
from .statechart import STATECHART_METAMODEL, validate_statechart
from .webstory import WEBSTORY_METAMODEL, validate_webstory

METAMODELS: Mapping[str, Metamodel] = {
    "statechart": STATECHART_METAMODEL,
    "webstory": WEBSTORY_METAMODEL,
    "dataflow": DATAFLOW_METAMODEL,
    "pipeline": RIG_METAMODEL,
}


def validate_model(model: GraphModel, signatures=None,
                   submodels=None) -> list[ValidationIssue]:
    """Structural validation plus the model type's own rules.

    Language rules only run once the structure is clean, mirroring their
    preconditions.
    """
    issues = validate_structure(model, METAMODELS[model.model_type])
    if any(i.severity == "error" for i in issues):
        return issues
    if model.model_type == "statechart":
        issues += validate_statechart(model)
    elif model.model_type == "webstory":
        issues += validate_webstory(model)
    elif model.model_type == "dataflow":
        issues += validate_flow(model, signatures or [], submodels or {})
    elif model.model_type == "pipeline":
        issues += validate_pipeline(model)
    return issues

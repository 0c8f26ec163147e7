from __future__ import annotations

import json
from pathlib import Path

import pytest

from ldekit.graph_core import Edge, GraphModel, Node

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def build_model(model_id: str, model_type: str, nodes, edges) -> GraphModel:
    """Compact model builder for tests.

    nodes: (id, kind) | (id, kind, parent) | (id, kind, parent, props)
    edges: (id, kind, source, target) | (id, kind, source, target, props)
    """
    ns = []
    for spec in nodes:
        node_id, kind, *rest = spec
        parent = rest[0] if rest else None
        props = dict(rest[1]) if len(rest) > 1 else {}
        props = {k: tuple(v) if isinstance(v, list) else v for k, v in props.items()}
        ns.append(Node(id=node_id, kind=kind, parent=parent, properties=props))
    es = []
    for spec in edges:
        edge_id, kind, source, target, *rest = spec
        props = dict(rest[0]) if rest else {}
        props = {k: tuple(v) if isinstance(v, list) else v for k, v in props.items()}
        es.append(Edge(id=edge_id, kind=kind, source=source, target=target,
                       properties=props))
    return GraphModel(id=model_id, model_type=model_type, nodes=tuple(ns),
                      edges=tuple(es))


def envelope(model_id: str, model_type: str, nodes=(), edges=()) -> bytes:
    """Raw JSON envelope bytes, bypassing the model types entirely."""
    return json.dumps({
        "id": model_id,
        "modelType": model_type,
        "nodes": list(nodes),
        "edges": list(edges),
    }).encode("utf-8")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def coffee_model():
    from ldekit.graph_core import load_model
    return load_model((FIXTURES / "coffee_machine.json").read_bytes())


@pytest.fixture
def webstory_model():
    from ldekit.graph_core import load_model
    return load_model((FIXTURES / "treasure_hunt.json").read_bytes())


@pytest.fixture
def webstory_nokey_model():
    from ldekit.graph_core import load_model
    return load_model((FIXTURES / "treasure_hunt_no_modifier.json").read_bytes())


@pytest.fixture
def rig_model():
    from ldekit.graph_core import load_model
    return load_model((FIXTURES / "app_delivery_pipeline.json").read_bytes())

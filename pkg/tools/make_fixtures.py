#!/usr/bin/env python3
"""Rebuild the model fixtures under tests/fixtures/ in canonical form.

The models themselves are authored here; the script only canonicalizes
them through save_model so the files stay byte-stable. Golden outputs
(YAML, host scripts) are hand-written files and are NOT regenerated here.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

from ldekit.graph_core import Edge, GraphModel, Node, save_model

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def node(node_id, kind, parent=None, **props):
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in props.items()}
    return Node(id=node_id, kind=kind, parent=parent, properties=clean)


def edge(edge_id, kind, source, target, **props):
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in props.items()}
    return Edge(id=edge_id, kind=kind, source=source, target=target,
                properties=clean)


def model(model_id, model_type, nodes, edges):
    return GraphModel(id=model_id, model_type=model_type, nodes=tuple(nodes),
                      edges=tuple(edges))


def coffee_machine() -> GraphModel:
    nodes = [
        node("s_top", "start"),
        node("Off", "state"),
        node("On", "hierarchicalState"),
        node("on_start", "start", parent="On"),
        node("Idle", "state", parent="On"),
        node("Preparing", "concurrentState", parent="On"),
        node("r1_grind", "region", parent="Preparing"),
        node("r1_start", "start", parent="r1_grind"),
        node("Grinding", "state", parent="r1_grind"),
        node("r1_end", "end", parent="r1_grind"),
        node("r2_heat", "region", parent="Preparing"),
        node("r2_start", "start", parent="r2_heat"),
        node("Heating", "state", parent="r2_heat"),
        node("r2_end", "end", parent="r2_heat"),
        node("Pouring", "state", parent="On"),
        node("d_more", "decision", parent="On"),
        node("Empty", "state", parent="On"),
        node("on_hist", "history", parent="On"),
        node("Paused", "state"),
        node("end_top", "end"),
        node("decls", "declarations"),
        node("beans", "variable", parent="decls", varType="integer", initial="2"),
        node("Power", "trigger", parent="decls"),
        node("Brew", "trigger", parent="decls"),
        node("GrindDone", "trigger", parent="decls"),
        node("HeatDone", "trigger", parent="decls"),
        node("Done", "trigger", parent="decls"),
        node("Refill", "trigger", parent="decls"),
        node("Stop", "trigger", parent="decls"),
        node("Resume", "trigger", parent="decls"),
        node("PowerOff", "trigger", parent="decls"),
    ]
    edges = [
        edge("t_init", "transition", "s_top", "Off"),
        edge("t_power", "transition", "Off", "On", trigger="Power"),
        edge("t_on_entry", "transition", "on_start", "Idle"),
        edge("t_brew", "transition", "Idle", "Preparing", trigger="Brew",
             guard="beans > 0", action="beans := beans - 1"),
        edge("t_r1_init", "transition", "r1_start", "Grinding"),
        edge("t_grind_done", "transition", "Grinding", "r1_end", trigger="GrindDone"),
        edge("t_r2_init", "transition", "r2_start", "Heating"),
        edge("t_heat_done", "transition", "Heating", "r2_end", trigger="HeatDone"),
        edge("t_prep_done", "transition", "Preparing", "Pouring"),
        edge("t_pour_done", "transition", "Pouring", "d_more", trigger="Done"),
        edge("t_more", "transition", "d_more", "Idle", guard="beans > 0"),
        edge("t_empty", "transition", "d_more", "Empty", guard="beans <= 0"),
        edge("t_refill", "transition", "Empty", "Idle", trigger="Refill",
             action="beans := 2"),
        edge("t_stop", "transition", "On", "Paused", trigger="Stop"),
        edge("t_resume", "transition", "Paused", "on_hist", trigger="Resume"),
        edge("t_off", "transition", "Paused", "end_top", trigger="PowerOff"),
    ]
    return model("coffee-machine", "statechart", nodes, edges)


def treasure_hunt(with_modifier: bool = True) -> GraphModel:
    nodes = [
        node("s", "startMarker"),
        node("screen1", "screen", backgroundImage="img/cabin.png"),
        node("screen2", "screen", backgroundImage="img/cave.png"),
        node("screen3", "screen", backgroundImage="img/key.png"),
        node("screen4", "screen", backgroundImage="img/treasure.png"),
        node("screen5", "screen", backgroundImage="img/message.png"),
        node("areaA", "clickArea", parent="screen1", rect=["10", "10", "120", "80"]),
        node("areaB", "clickArea", parent="screen1", rect=["200", "40", "90", "90"]),
        node("areaC", "clickArea", parent="screen2", rect=["30", "30", "60", "60"]),
        node("areaD", "clickArea", parent="screen2", rect=["150", "10", "80", "40"]),
        node("areaE", "clickArea", parent="screen3", rect=["20", "120", "100", "60"]),
        node("areaG", "clickArea", parent="screen3", rect=["180", "20", "70", "70"]),
        node("areaF", "clickArea", parent="screen5", rect=["60", "60", "140", "50"]),
        node("key", "variable", initial=False),
        node("cond_key", "condition"),
    ]
    edges = [
        edge("f_start", "controlFlow", "s", "screen1"),
        edge("f_a", "controlFlow", "areaA", "screen2"),
        edge("f_b", "controlFlow", "areaB", "cond_key"),
        edge("f_d", "controlFlow", "areaD", "screen1"),
        edge("f_e", "controlFlow", "areaE", "screen1"),
        edge("f_g", "controlFlow", "areaG", "screen2"),
        edge("f_f", "controlFlow", "areaF", "screen1"),
        edge("tf", "trueFlow", "cond_key", "screen4"),
        edge("ff", "falseFlow", "cond_key", "screen5"),
        edge("dr", "dataRead", "cond_key", "key"),
    ]
    if with_modifier:
        nodes.append(node("mod_key", "variableModifier", targetValue=True))
        edges.append(edge("f_c", "controlFlow", "areaC", "mod_key"))
        edges.append(edge("f_m", "controlFlow", "mod_key", "screen3"))
        edges.append(edge("dw", "dataWrite", "mod_key", "key"))
        return model("treasure-hunt", "webstory", nodes, edges)
    edges.append(edge("f_c", "controlFlow", "areaC", "screen3"))
    return model("treasure-hunt-no-modifier", "webstory", nodes, edges)


def app_delivery_pipeline() -> GraphModel:
    nodes = [
        node("GenerateApp", "job",
             scriptTemplate=["./ci/generate-app.sh ${appModelDir}"]),
        node("FrontendBuild", "job", image="node:20",
             scriptTemplate=["npm ci", "npm run build"]),
        node("BackendBuild", "job", image="maven:3",
             scriptTemplate=["mvn -B package"]),
        node("FrontendPackage", "job", image="docker:24",
             scriptTemplate=["docker build -t ${registry}/frontend ."]),
        node("BackendPackage", "job", image="docker:24",
             scriptTemplate=["docker build -t ${registry}/backend ."]),
        node("Deliver", "job", image="docker:24",
             scriptTemplate=["docker push ${registry}/frontend",
                             "docker push ${registry}/backend"]),
        node("var_registry", "variable", name="registry",
             value="registry.example.com/app"),
        node("var_model_dir", "variable", name="appModelDir", value="models"),
    ]
    edges = [
        edge("d1", "dependsOn", "GenerateApp", "FrontendBuild"),
        edge("d2", "dependsOn", "GenerateApp", "BackendBuild"),
        edge("d3", "dependsOn", "FrontendBuild", "FrontendPackage"),
        edge("d4", "dependsOn", "BackendBuild", "BackendPackage"),
        edge("d5", "dependsOn", "FrontendPackage", "Deliver"),
        edge("d6", "dependsOn", "BackendPackage", "Deliver"),
    ]
    return model("app-delivery", "pipeline", nodes, edges)


def multi_target_pipeline() -> GraphModel:
    nodes = [
        node("Generate", "job", scriptTemplate=["./prepare.sh"]),
        node("Build", "job", scriptTemplate=["make build OS=${os}"]),
        node("Package", "job", scriptTemplate=["make package OS=${os} V=${version}"]),
        node("linux", "target", parameters=["os=linux"]),
        node("windows", "target", parameters=["os=windows"]),
        node("var_version", "variable", name="version", value="1.2.0"),
        node("cfg_build", "configurationNode", image="debian:12"),
        node("cfg_pipeline", "configurationNode",
             stageNames=["prepare", "build", "package"]),
    ]
    edges = [
        edge("d1", "dependsOn", "Generate", "Build"),
        edge("d2", "dependsOn", "Build", "Package"),
        edge("a1", "appliesTo", "linux", "Build"),
        edge("a2", "appliesTo", "windows", "Build"),
        edge("a3", "appliesTo", "linux", "Package"),
        edge("a4", "appliesTo", "windows", "Package"),
        edge("c1", "configures", "cfg_build", "Build"),
    ]
    return model("multi-target", "pipeline", nodes, edges)


def cyclic_pipeline() -> GraphModel:
    nodes = [
        node("Build", "job", scriptTemplate=["make"]),
        node("Test", "job", scriptTemplate=["make test"]),
    ]
    edges = [
        edge("d1", "dependsOn", "Build", "Test"),
        edge("d2", "dependsOn", "Test", "Build"),
    ]
    return model("cyclic-pipeline", "pipeline", nodes, edges)


def clustering_flow() -> GraphModel:
    """Top-level process: load a table, prepare it in a subprocess, report."""
    nodes = [
        node("n_load", "functionNode", signatureRef="load_table"),
        node("n_load_out", "outputPort", parent="n_load", name="out"),
        node("n_prep", "subprocessNode", modelRef="table-prep"),
        node("n_prep_in", "inputPort", parent="n_prep", name="data"),
        node("n_prep_out", "outputPort", parent="n_prep", name="res"),
        node("n_report", "functionNode", signatureRef="publish"),
        node("n_report_in", "inputPort", parent="n_report", name="data"),
        node("n_report_out", "outputPort", parent="n_report", name="res"),
    ]
    edges = [
        edge("w1", "dataFlow", "n_load_out", "n_prep_in"),
        edge("w2", "dataFlow", "n_prep_out", "n_report_in"),
    ]
    return model("clustering-flow", "dataflow", nodes, edges)


def table_prep() -> GraphModel:
    """Subprocess: boundary pads wired through two functions."""
    nodes = [
        node("pad_data", "outputPort", name="data"),
        node("pad_res", "inputPort", name="res"),
        node("n_clean", "functionNode", signatureRef="clean"),
        node("n_clean_in", "inputPort", parent="n_clean", name="data"),
        node("n_clean_out", "outputPort", parent="n_clean", name="cleaned"),
        node("n_stats", "functionNode", signatureRef="stats"),
        node("n_stats_in", "inputPort", parent="n_stats", name="cleaned"),
        node("n_stats_out", "outputPort", parent="n_stats", name="res"),
    ]
    edges = [
        edge("w1", "dataFlow", "pad_data", "n_clean_in"),
        edge("w2", "dataFlow", "n_clean_out", "n_stats_in"),
        edge("w3", "dataFlow", "n_stats_out", "pad_res"),
    ]
    return model("table-prep", "dataflow", nodes, edges)


def mismatch_flow() -> GraphModel:
    """Feeds a cluster model where a table is expected."""
    nodes = [
        node("n_load", "functionNode", signatureRef="load_table"),
        node("n_load_out", "outputPort", parent="n_load", name="out"),
        node("n_train", "functionNode", signatureRef="train"),
        node("n_train_in", "inputPort", parent="n_train", name="data"),
        node("n_train_out", "outputPort", parent="n_train", name="res"),
        node("n_desc", "functionNode", signatureRef="describe"),
        node("n_desc_in", "inputPort", parent="n_desc", name="data"),
        node("n_desc_out", "outputPort", parent="n_desc", name="res"),
    ]
    edges = [
        edge("w1", "dataFlow", "n_load_out", "n_train_in"),
        edge("w2", "dataFlow", "n_train_out", "n_desc_in"),
    ]
    return model("mismatch-flow", "dataflow", nodes, edges)


ANALYSIS_FUNCTIONS = """\
# Method: cluster
# Inputs: data:Table, x:text, y:text, clusters:num
# Output: res:Clu_Model
def cluster(data,x,y,clusters):
    pass

# Method: load_table
# Inputs:
# Output: out:Table
def load_table():
    pass

# Method: clean
# Inputs: data:Table
# Output: cleaned:Table
def clean(data):
    pass

# Method: stats
# Inputs: cleaned:Table
# Output: res:text
def stats(cleaned):
    pass

# Method: train
# Inputs: data:Table
# Output: res:Clu_Model
def train(data):
    pass

# Method: describe
# Inputs: data:Table
# Output: res:text
def describe(data):
    pass

# Method: publish
# Inputs: data:text
# Output: res:text
def publish(data):
    pass

def helper_without_annotation(x):
    return x
"""


def tiny_png(rgb: tuple[int, int, int]) -> bytes:
    """Minimal 8x8 single-color PNG, no external deps."""
    width = height = 8

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (struct.pack(">I", len(payload)) + tag + payload
                + struct.pack(">I", zlib.crc32(tag + payload)))

    row = b"\x00" + bytes(rgb) * width
    raw = row * height
    return (b"\x89PNG\r\n\x1a\n"
            + chunk(b"IHDR", struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0))
            + chunk(b"IDAT", zlib.compress(raw))
            + chunk(b"IEND", b""))


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    written = {
        "coffee_machine.json": save_model(coffee_machine()),
        "treasure_hunt.json": save_model(treasure_hunt(True)),
        "treasure_hunt_no_modifier.json": save_model(treasure_hunt(False)),
        "app_delivery_pipeline.json": save_model(app_delivery_pipeline()),
        "multi_target_pipeline.json": save_model(multi_target_pipeline()),
        "cyclic_pipeline.json": save_model(cyclic_pipeline()),
        "clustering_flow.json": save_model(clustering_flow()),
        "table_prep.json": save_model(table_prep()),
        "mismatch_flow.json": save_model(mismatch_flow()),
        "analysis_functions.py": ANALYSIS_FUNCTIONS.encode(),
    }
    for name, data in written.items():
        (FIXTURES / name).write_bytes(data)
        print(f"wrote {name} ({len(data)} bytes)")

    img_dir = FIXTURES / "img"
    img_dir.mkdir(parents=True, exist_ok=True)
    colors = {
        "cabin.png": (120, 90, 40),
        "cave.png": (60, 60, 70),
        "key.png": (200, 180, 40),
        "treasure.png": (220, 160, 30),
        "message.png": (150, 150, 150),
    }
    for name, rgb in colors.items():
        (img_dir / name).write_bytes(tiny_png(rgb))
        print(f"wrote img/{name}")


if __name__ == "__main__":
    main()

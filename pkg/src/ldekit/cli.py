"""Command line front end.

Exit codes: 0 success, 1 validation or semantic failure, 2 IO/usage
failure. All output is deterministic so sessions can be scripted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataflow import emit_host_script, order_nodes, parse_signatures
from .errors import LdekitError
from .graph_core import GraphModel, ValidationIssue, has_errors, load_model
from .registry import validate_model
from .rig import compile_pipeline, emit_ci_yaml
from .statechart import Statechart
from .webstory import generate_site

OK, FAILED, IO_ERROR = 0, 1, 2


def _load(path: Path) -> GraphModel:
    return load_model(path.read_bytes())


def _read_dataflow_context(args) -> tuple[list, dict]:
    signatures = []
    for sig_path in args.signatures or []:
        text = Path(sig_path).read_text(encoding="utf-8")
        signatures.extend(parse_signatures(text, str(sig_path)))
    submodels = {}
    for sub_path in args.submodel or []:
        model = _load(Path(sub_path))
        submodels[model.id] = model
    return signatures, submodels


def _print_issues(path: Path, issues: list[ValidationIssue], out) -> None:
    for issue in issues:
        element = issue.element_id or "-"
        print(f"{path}:{element}: {issue.severity} {issue.rule_id}: "
              f"{issue.message}", file=out)


def cmd_validate(args, out=sys.stdout, err=sys.stderr) -> int:
    status = OK
    try:
        signatures, submodels = _read_dataflow_context(args)
    except (OSError, LdekitError) as exc:
        print(f"error: {exc}", file=err)
        return IO_ERROR
    for raw in args.files:
        path = Path(raw)
        try:
            model = _load(path)
        except OSError as exc:
            print(f"{path}: io error: {exc}", file=err)
            return IO_ERROR
        except LdekitError as exc:
            print(f"{path}:-: error load.failed: {exc}", file=out)
            status = max(status, FAILED)
            continue
        try:
            issues = validate_model(model, signatures, submodels)
        except LdekitError as exc:
            print(f"{path}:-: error validate.failed: {exc}", file=out)
            status = max(status, FAILED)
            continue
        _print_issues(path, issues, out)
        if has_errors(issues):
            status = max(status, FAILED)
    return status


def cmd_generate(args, out=sys.stdout, err=sys.stderr) -> int:
    path = Path(args.file)
    out_dir = Path(args.out)
    try:
        signatures, submodels = _read_dataflow_context(args)
        model = _load(path)
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return IO_ERROR
    except LdekitError as exc:
        print(f"{path}:-: error load.failed: {exc}", file=out)
        return FAILED

    try:
        issues = validate_model(model, signatures, submodels)
    except LdekitError as exc:
        print(f"{path}:-: error validate.failed: {exc}", file=out)
        return FAILED
    _print_issues(path, issues, out)
    if has_errors(issues):
        print("generation aborted: the model does not validate", file=err)
        return FAILED

    # build everything in memory first so failures leave outDir untouched
    try:
        if model.model_type == "webstory":
            assets = Path(args.assets) if args.assets else path.parent
            files = generate_site(model, assets)
        elif model.model_type == "pipeline":
            files = {".gitlab-ci.yml": emit_ci_yaml(
                compile_pipeline(model)).encode("utf-8")}
        elif model.model_type == "dataflow":
            plan = order_nodes(model, signatures, submodels)
            files = {f"{model.id}.py": emit_host_script(
                plan, signatures).encode("utf-8")}
        else:
            print(f"no generator for model type {model.model_type!r}",
                  file=err)
            return FAILED
    except LdekitError as exc:
        print(f"generation failed: {exc}", file=err)
        return FAILED

    try:
        for rel, data in sorted(files.items()):
            target = out_dir / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
            print(f"wrote {target}", file=out)
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return IO_ERROR
    return OK


def _vars_line(config) -> str:
    parts = []
    for name, value in sorted(config.env.values.items()):
        rendered = ("true" if value else "false") if isinstance(value, bool) \
            else str(value)
        parts.append(f"{name}={rendered}")
    return "vars: " + ", ".join(parts)


def cmd_simulate(args, out=sys.stdout, err=sys.stderr,
                 source=sys.stdin) -> int:
    path = Path(args.file)
    try:
        model = _load(path)
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return IO_ERROR
    except LdekitError as exc:
        print(f"{path}:-: error load.failed: {exc}", file=out)
        return FAILED
    if model.model_type != "statechart":
        print("simulate only runs statechart models", file=err)
        return FAILED
    issues = validate_model(model)
    _print_issues(path, issues, out)
    if has_errors(issues):
        return FAILED

    chart = Statechart(model)
    config = chart.init_configuration()
    print(f"model: {model.id}", file=out)
    print("triggers: " + ", ".join(sorted(chart.triggers)), file=out)
    print("active: " + ", ".join(sorted(config.active_states)), file=out)
    print(_vars_line(config), file=out)

    for line in source:
        command = line.strip()
        if not command:
            continue
        if command == "quit":
            return OK
        if command == "vars":
            print(_vars_line(config), file=out)
            continue
        if command.startswith("fire "):
            trigger = command[len("fire "):].strip()
            if trigger not in chart.triggers:
                print(f"unknown trigger: {trigger}", file=out)
                continue
            config, event = chart.fire_trigger(config, trigger)
            print(f"fired {trigger}: "
                  f"transitions={json.dumps(list(event.taken_transitions))} "
                  f"completions={json.dumps(list(event.completions))} "
                  f"actions={json.dumps(list(event.executed_actions))}",
                  file=out)
            print("active: " + ", ".join(sorted(config.active_states)),
                  file=out)
            print(_vars_line(config), file=out)
            if config.terminated:
                print("terminated", file=out)
            continue
        print(f"unknown command: {command}", file=out)
    return OK


def cmd_serve(args, out=sys.stdout, err=sys.stderr) -> int:
    import uvicorn

    from .service import create_app

    model_dir = Path(args.dir)
    if not model_dir.is_dir():
        print(f"error: {model_dir} is not a directory", file=err)
        return IO_ERROR
    app = create_app(model_dir, ui_dir=args.ui_dir)
    print(f"serving models from {model_dir} on port {args.port}", file=out)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldekit",
        description="validate, simulate and generate code from graph models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate model files")
    p.add_argument("files", nargs="+")
    p.add_argument("--signatures", action="append",
                   help="annotated source file for dataflow models")
    p.add_argument("--submodel", action="append",
                   help="subprocess model file for dataflow models")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="generate code from a model")
    p.add_argument("file")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--signatures", action="append")
    p.add_argument("--submodel", action="append")
    p.add_argument("--assets", help="asset directory for webstory images "
                                    "(defaults to the model's directory)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="interactive statechart simulation")
    p.add_argument("file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("dir")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", help="static browser UI to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Exit codes: 0 success, 1 analysis findings (validation violations, golden
mismatches), 2 usage, parse, or input errors.  Stages chain through files:
``synth`` and ``integrate`` write fault-tree JSON that ``integrate``,
``ccf`` and ``cutsets`` accept back via ``--ft``.  Set ``RESHA_NO_COLOR``
to disable ANSI color on terminals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .ccf import detect_ccf_groups, inject_ccf_events
from .cutsets import first_order_cut_sets, minimal_cut_sets
from .dsl import ParseError, parse_model
from .ftree import branch_census, integrate_software, synthesize_hardware_ft
from .golden import load_golden, verify_golden
from .model import ModelError, SystemModel, expand_replication, validate_model
from .pipeline import (
    PipelineOptions,
    ValidationFailed,
    analyze_model,
    run_pipeline,
)
from .report import ccf_csv, cutsets_csv, export_ft, import_ft, render_summary, traceability_csv
from .stpa import apply_applicability, enumerate_candidates, extract_control_structure


def _color_enabled(stream) -> bool:
    if os.environ.get("RESHA_NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _style(text: str, code: str, stream) -> str:
    if _color_enabled(stream):
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_model(path: str) -> SystemModel:
    text = Path(path).read_text(encoding="utf-8")
    return parse_model(text, path)


def _expanded(path: str) -> SystemModel:
    return expand_replication(_load_model(path))


def _tree_from(args, model: SystemModel):
    """The integrated tree: imported via --ft when given, else recomputed."""
    if getattr(args, "ft", None):
        return import_ft(Path(args.ft).read_text(encoding="utf-8"))
    structure = extract_control_structure(model)
    instances = apply_applicability(enumerate_candidates(structure), model)
    hardware = synthesize_hardware_ft(model, getattr(args, "include_hw_design", False))
    return integrate_software(hardware, instances)


def cmd_validate(args) -> int:
    model = _load_model(args.model)
    report = validate_model(model)
    if report.ok:
        print(_style("model OK", "32", sys.stdout))
        return 0
    for violation in report.violations:
        print(_style(str(violation), "31", sys.stderr), file=sys.stderr)
    print(f"{len(report.violations)} violation(s)", file=sys.stderr)
    return 1


def cmd_stpa(args) -> int:
    model = _expanded(args.model)
    structure = extract_control_structure(model)
    candidates = enumerate_candidates(structure)
    instances = apply_applicability(candidates, model)
    if args.format == "csv":
        _emit(traceability_csv(instances, model), args.out)
    elif args.format == "json":
        payload = {
            "candidates": len(candidates),
            "instances": [
                {
                    "id": i.id,
                    "flavor": i.flavor.value,
                    "type": i.type.letter,
                    "owner": i.owner,
                    "link": i.link,
                    "division": i.division,
                    "hazards": i.hazards,
                }
                for i in instances
            ],
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = [f"candidates: {len(candidates)}", f"applicable: {len(instances)}"]
        lines += [
            f"{i.id}  {i.flavor.value}  type {i.type.letter}  owner {i.owner}  "
            f"hazards {','.join(i.hazards)}"
            for i in instances
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_synth(args) -> int:
    model = _expanded(args.model)
    tree = synthesize_hardware_ft(model, args.include_hw_design)
    _emit(export_ft(tree), args.out)
    census = branch_census(tree)
    print(
        f"synthesized: {census.hw_stochastic} hw stochastic, {census.dependency} dependency, "
        f"{census.sw_design} sw design, {census.hw_design} hw design",
        file=sys.stderr,
    )
    return 0


def cmd_integrate(args) -> int:
    model = _expanded(args.model)
    if args.ft:
        tree = import_ft(Path(args.ft).read_text(encoding="utf-8"))
    else:
        tree = synthesize_hardware_ft(model, args.include_hw_design)
    structure = extract_control_structure(model)
    instances = apply_applicability(enumerate_candidates(structure), model)
    integrated = integrate_software(tree, instances)
    _emit(export_ft(integrated), args.out)
    print(f"integrated {len(instances)} software instances", file=sys.stderr)
    return 0


def cmd_ccf(args) -> int:
    model = _expanded(args.model)
    structure = extract_control_structure(model)
    instances = apply_applicability(enumerate_candidates(structure), model)
    groups = detect_ccf_groups(model, instances)
    if args.tree_out:
        tree = _tree_from(args, model)
        injected = inject_ccf_events(tree, groups)
        Path(args.tree_out).write_text(export_ft(injected), encoding="utf-8")
    if args.format == "csv":
        _emit(ccf_csv(groups), args.out)
    elif args.format == "json":
        payload = [
            {
                "id": g.id,
                "type": g.ccf_type,
                "scope": g.scope.value,
                "trigger": g.trigger,
                "failure_type": g.failure_type.letter if g.failure_type else None,
                "members": g.members,
            }
            for g in groups
        ]
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        counts = {1: 0, 2: 0, 3: 0, 4: 0}
        for group in groups:
            counts[group.ccf_type] += 1
        lines = [f"Type {t} sCCF: {counts[t]}" for t in (1, 2, 3, 4)]
        lines += [f"{g.id}  trigger {g.trigger}  members {len(g.members)}" for g in groups]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_cutsets(args) -> int:
    model = _expanded(args.model)
    if args.ft:
        tree = import_ft(Path(args.ft).read_text(encoding="utf-8"))
    else:
        structure = extract_control_structure(model)
        instances = apply_applicability(enumerate_candidates(structure), model)
        hardware = synthesize_hardware_ft(model, args.include_hw_design)
        integrated = integrate_software(hardware, instances)
        groups = detect_ccf_groups(model, instances)
        tree = inject_ccf_events(integrated, groups)
    collection = minimal_cut_sets(tree, args.max_order)
    first = first_order_cut_sets(collection, tree)
    if args.format == "csv":
        _emit(cutsets_csv(collection, tree), args.out)
    else:
        lines = []
        for cut in collection.sets:
            lines.append(f"order {len(cut)}: {' '.join(cut)}")
        lines.append(f"Minimal cut sets: {len(collection)}")
        for order, count in collection.order_index().items():
            lines.append(f"Order {order}: {count}")
        lines.append(f"First-order software cut sets: {len(first.software)}")
        lines.append(f"First-order hardware cut sets: {len(first.hardware)}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_report(args) -> int:
    model = _load_model(args.model)
    options = PipelineOptions(include_hw_design=args.include_hw_design, max_order=args.max_order)
    try:
        result = analyze_model(model, options)
    except ValidationFailed as exc:
        print(str(exc.report), file=sys.stderr)
        return 1
    _emit(render_summary(result.summary_input(), args.format), args.out)
    return 0


def cmd_pipeline(args) -> int:
    options = PipelineOptions(include_hw_design=args.include_hw_design, max_order=args.max_order)
    try:
        result, paths = run_pipeline(Path(args.model), Path(args.out_dir), options)
    except ValidationFailed as exc:
        print(str(exc.report), file=sys.stderr)
        return 1
    for path in paths:
        print(f"wrote {path}")
    print(
        f"analysis complete: {len(result.instances)} instances, {len(result.groups)} CCF groups, "
        f"{len(result.collection)} minimal cut sets"
    )
    return 0


def cmd_verify_golden(args) -> int:
    model = _load_model(args.model)
    try:
        result = analyze_model(model)
    except ValidationFailed as exc:
        print(str(exc.report), file=sys.stderr)
        return 1
    golden = load_golden(Path(args.golden))
    report = verify_golden(result, golden)
    for field_result in report.fields:
        code = "32" if field_result.ok else "31"
        print(_style(str(field_result), code, sys.stdout))
    if report.ok:
        print(_style(f"golden OK ({len(report.fields)} fields)", "32", sys.stdout))
        return 0
    print(_style(f"golden FAILED ({len(report.mismatches())} mismatches)", "31", sys.stdout))
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resha",
        description="Model-driven hazard analysis for redundant control architectures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("model", help="model document (.resha)")
        return p

    add("validate", cmd_validate, "check a model document")

    p = add("stpa", cmd_stpa, "enumerate unsafe control actions and information flows")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out", help="write output to a file instead of stdout")

    p = add("synth", cmd_synth, "synthesize the hardware fault tree")
    p.add_argument("--include-hw-design", action="store_true")
    p.add_argument("--out", help="write fault-tree JSON to a file")

    p = add("integrate", cmd_integrate, "attach software instances to the fault tree")
    p.add_argument("--ft", help="hardware fault-tree JSON from a previous synth run")
    p.add_argument("--include-hw-design", action="store_true")
    p.add_argument("--out", help="write fault-tree JSON to a file")

    p = add("ccf", cmd_ccf, "detect common cause failure groups")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--ft", help="integrated fault-tree JSON to inject into")
    p.add_argument("--include-hw-design", action="store_true")
    p.add_argument("--tree-out", help="also write the injected fault-tree JSON here")
    p.add_argument("--out", help="write group listing to a file")

    p = add("cutsets", cmd_cutsets, "compute minimal cut sets")
    p.add_argument("--ft", help="injected fault-tree JSON from a previous ccf run")
    p.add_argument("--include-hw-design", action="store_true")
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", help="write output to a file")

    p = add("report", cmd_report, "render the analysis summary")
    p.add_argument("--format", choices=("md", "txt"), default="md")
    p.add_argument("--include-hw-design", action="store_true")
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--out", help="write summary to a file")

    p = add("pipeline", cmd_pipeline, "run every stage and write all artifacts")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--include-hw-design", action="store_true")
    p.add_argument("--max-order", type=int, default=None)

    p = add("verify-golden", cmd_verify_golden, "check pinned expected values")
    p.add_argument("golden", help="golden JSON file")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

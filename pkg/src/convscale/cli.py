"""``convscale`` command line.

Exit codes: 0 success, 1 bad input (missing file, parse or validation
error, shape error), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from convscale import document, tables, zoo
from convscale.analyzer import profile
from convscale.interpreter import ShapeError, StructuralMismatchError, execute, reconcile
from convscale.ir import InvalidSpecError, ensure_valid
from convscale.scaling import CompoundConfig, ScaleTriple, apply_scale, triple_from_compound
from convscale.search import (
    SearchSpec,
    constant_evaluator,
    flops_objective_evaluator,
    grid_search,
    peak_evaluator,
    sweep_families,
    sweep_to_csv,
    sweep_to_document,
)

EVALUATORS = ("constant", "peak", "flops-objective")


class CliError(Exception):
    """Input problem reported with exit code 1."""


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{path}: file not found")
    return p.read_text(encoding="utf-8")


def _load_spec(path: str):
    try:
        spec = document.deserialize(_read_text(path))
    except document.ParseError as exc:
        raise CliError(f"{path}: parse error: {exc}") from None
    ensure_valid(spec)
    return spec


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_generate(args) -> int:
    try:
        spec = zoo.get(args.model)
    except KeyError as exc:
        raise CliError(exc.args[0]) from None
    _emit(document.serialize(spec), args.out)
    return 0


def _cmd_zoo(args) -> int:
    for name in zoo.names():
        print(name)
    return 0


def _cmd_scale(args, parser) -> int:
    triple_given = any(v is not None for v in (args.d, args.w, args.r))
    compound_given = any(v is not None for v in (args.alpha, args.beta, args.gamma, args.phi))
    if triple_given and compound_given:
        parser.error("scale: --d/--w/--r and --alpha/--beta/--gamma/--phi are mutually exclusive")
    spec = _load_spec(args.spec)
    try:
        if compound_given:
            cfg = CompoundConfig(
                args.alpha if args.alpha is not None else 1.0,
                args.beta if args.beta is not None else 1.0,
                args.gamma if args.gamma is not None else 1.0,
                args.phi if args.phi is not None else 1.0,
            )
            triple = triple_from_compound(cfg)
        else:
            triple = ScaleTriple(args.d or 1.0, args.w or 1.0, args.r or 1.0)
    except ValueError as exc:
        raise CliError(f"scale: {exc}") from None
    scaled = apply_scale(spec, triple)
    if args.name:
        scaled = scaled.replace(name=args.name)
    _emit(document.serialize(scaled), args.out)
    return 0


def _cmd_profile(args) -> int:
    report = profile(_load_spec(args.spec))
    if args.format == "csv":
        _emit(report.to_csv(), args.out)
    elif args.format == "doc":
        _emit(report.to_document(), args.out)
    else:
        _emit(report.summary() + "\n", args.out)
    return 0


def _load_json(path: str) -> dict:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: parse error: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise CliError(f"{path}: config must be a JSON object")
    return doc


def _resolve_base(ref: str, config_path: str):
    if ref in zoo.names():
        return zoo.get(ref)
    return _load_spec(str(Path(config_path).parent / ref))


def _cmd_search(args) -> int:
    doc = _load_json(args.config)
    try:
        s = SearchSpec.from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise CliError(f"{args.config}: {exc}") from None
    base = _resolve_base(doc.get("base", "efficientnet-b0"), args.config)
    if args.evaluator == "constant":
        evaluator = constant_evaluator()
    elif args.evaluator == "peak":
        evaluator = peak_evaluator(base, tuple(args.peak), s.phi_for_eval)
    else:
        evaluator = flops_objective_evaluator()
    result = grid_search(base, s, evaluator, workers=args.workers)
    _emit(result.to_csv() if args.format == "csv" else result.to_document(), args.out)
    return 0


def _cmd_sweep(args) -> int:
    spec = _load_spec(args.spec)
    doc = _load_json(args.config) if args.config else {}
    try:
        configs = [CompoundConfig(c["alpha"], c["beta"], c["gamma"], c.get("phi", 1.0)) for c in doc.get("configs", [])]
        ratios = tuple(float(x) for x in doc.get("flops_ratios", (2.0, 4.0, 8.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{args.config}: bad sweep config: {exc}") from None
    rows = sweep_families(spec, configs, ratios)
    _emit(sweep_to_csv(rows) if args.format == "csv" else sweep_to_document(rows), args.out)
    return 0


def _cmd_verify(args) -> int:
    spec = _load_spec(args.spec)
    try:
        result = reconcile(execute(spec), profile(spec))
    except (ShapeError, StructuralMismatchError) as exc:
        raise CliError(f"verify: {exc}") from None
    print(f"{spec.name}: {result}")
    return 0 if result.equal else 1


def _cmd_reproduce(args) -> int:
    rows = tables.all_rows()
    _emit(tables.render_csv(rows) if args.format == "csv" else tables.render_text(rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convscale", description="ConvNet IR, compound scaling and cost analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a zoo model as a spec document")
    p.add_argument("model")
    p.add_argument("-o", "--out")

    p = sub.add_parser("zoo", help="zoo utilities")
    p.add_argument("action", choices=["list"])

    p = sub.add_parser("scale", help="scale a spec by (d, w, r) or by compound coefficients")
    p.add_argument("spec")
    for flag in ("d", "w", "r", "alpha", "beta", "gamma", "phi"):
        p.add_argument(f"--{flag}", type=float)
    p.add_argument("--name", help="name for the scaled network")
    p.add_argument("-o", "--out")

    p = sub.add_parser("profile", help="static parameter / FLOPS / memory report")
    p.add_argument("spec")
    p.add_argument("--format", choices=["text", "csv", "doc"], default="text")
    p.add_argument("-o", "--out")

    p = sub.add_parser("search", help="grid search for compound coefficients")
    p.add_argument("config")
    p.add_argument("--evaluator", choices=EVALUATORS, default="peak")
    p.add_argument("--peak", type=float, nargs=3, default=(1.2, 1.1, 1.15), metavar=("ALPHA", "BETA", "GAMMA"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["doc", "csv"], default="doc")
    p.add_argument("-o", "--out")

    p = sub.add_parser("sweep", help="single-dimension vs compound scaling sweep")
    p.add_argument("spec")
    p.add_argument("config", nargs="?")
    p.add_argument("--format", choices=["csv", "doc"], default="csv")
    p.add_argument("-o", "--out")

    p = sub.add_parser("verify", help="reconcile analyzer against the reference interpreter")
    p.add_argument("spec")

    p = sub.add_parser("reproduce-tables", help="recreate the published cost tables")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("-o", "--out")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "generate": _cmd_generate,
        "zoo": _cmd_zoo,
        "scale": lambda a: _cmd_scale(a, parser),
        "profile": _cmd_profile,
        "search": _cmd_search,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
        "reproduce-tables": _cmd_reproduce,
    }
    try:
        return handlers[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvalidSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())

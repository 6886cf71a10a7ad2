"""Command line: analyze, trace, atlas, examples.

Exit codes: 0 success, 1 usage or IO error, 2 numerical failure, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .activesets import InfeasiblePointError
from .atlas import AtlasSizeError, atlas
from .exprdsl import ExprDomainError, ExprSyntaxError
from .homotopy import Schedule, index_persistence_audit, multiplier_limits, scholtes_path
from .model import (
    DEFAULT_ZERO_TOL,
    ModelError,
    PointXY,
    RegularizationParams,
    build_reform,
    build_scholtes,
    builtin_problem_path,
    load_problem,
)
from .regression import run_examples
from .stationarity import classify_R, classify_S

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _csv(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def _load_reform(args):
    path = args.problem
    if path.startswith("builtin:"):
        path = builtin_problem_path(path.split(":", 1)[1])
    pf = load_problem(path)
    params = pf.params
    if args.c is not None or args.epsilon is not None:
        c = _csv(args.c) if args.c is not None else params.c
        eps = args.epsilon if args.epsilon is not None else params.epsilon
        params = RegularizationParams(c, eps)
    return build_reform(pf.problem, params)


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _split_point(values, n, flag):
    if len(values) != 2 * n:
        raise UsageError(f"{flag} needs 2n = {2 * n} values, got {len(values)}")
    return PointXY(values[:n], values[n:])


def cmd_analyze(args) -> int:
    reform = _load_reform(args)
    point = _split_point(_csv(args.point), reform.n, "--point")
    if args.side == "S":
        if args.t is None:
            raise UsageError("--side S needs --t")
        report = classify_S(build_scholtes(reform, args.t), point, args.tol)
    else:
        if args.t is not None:
            raise UsageError("--t only applies to --side S")
        report = classify_R(reform, point, args.tol)
    if args.format == "json":
        _emit(args, json.dumps(report.to_dict(), indent=2))
    else:
        _emit(args, report.to_text())
    return EXIT_OK if report.stationary.ok else EXIT_MISMATCH


def cmd_trace(args) -> int:
    reform = _load_reform(args)
    start = _split_point(_csv(args.start), reform.n, "--start")
    try:
        schedule = Schedule(args.t0, args.theta, args.tmin)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    trace = scholtes_path(reform, start, schedule, tol=args.tol)
    audit = index_persistence_audit(trace)
    limits = None
    if trace.complete and trace.limit is not None and trace.limit.report is not None \
            and sum(r.report is not None for r in trace.records) >= 3:
        limits = multiplier_limits(trace)
    if args.format == "json":
        extra = {"audit": audit.to_dict(),
                 "multiplier_limits": None if limits is None else limits.to_dict()}
        _emit(args, trace.to_jsonl() + json.dumps(extra) + "\n")
    else:
        lines = [f"{'t':>12} {'status':>20} {'residual':>10} {'QI':>3}  x, y"]
        for r in trace.records:
            qi = "-" if r.report is None else str(r.report.QI)
            lines.append(f"{r.t:12.3e} {r.status:>20} {r.kkt_residual:10.2e} {qi:>3}  "
                         f"{np.array2string(r.point.x, precision=8)}, {np.array2string(r.point.y, precision=8)}")
        if not trace.complete:
            lines.append(f"aborted: {trace.message}")
        if trace.limit is not None:
            lines.append(f"limit: {trace.limit.message}")
            if trace.limit.report is not None:
                lines.append(trace.limit.report.to_text())
        if limits is not None:
            lines.append("multiplier limits: " + ("match" if limits.verdict.ok else "; ".join(limits.verdict.failures)))
        lines.append(f"audit: {audit.status}: {audit.reason}")
        _emit(args, "\n".join(lines))
    return EXIT_OK if trace.complete else EXIT_NUMERIC


def cmd_atlas(args) -> int:
    reform = _load_reform(args)
    res = atlas(reform)
    if args.format == "json":
        _emit(args, json.dumps(res.to_dict(), indent=2))
    else:
        lines = [f"{len(res.entries)} T-stationary points from {res.candidates} candidate patterns",
                 "TI histogram: " + ", ".join(f"TI={k}: {v}" for k, v in res.ti_histogram().items())]
        for p, r in res.entries:
            lines.append(f"  x = {np.array2string(p.x, precision=8)}, y = {np.array2string(p.y, precision=8)}, "
                         f"TI = {r.TI}, nondegenerate = {r.nondegenerate}")
        lines.append("points per x-projection:")
        for x, k in res.x_projection_counts():
            lines.append(f"  {list(x)}: {k}")
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_examples(args) -> int:
    checks = run_examples()
    failed = [c for c in checks if not c.ok]
    if args.format == "json":
        _emit(args, json.dumps({"passed": not failed, "checks": [c.__dict__ for c in checks]}, indent=2))
    else:
        lines = [c.line() for c in checks]
        lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
        _emit(args, "\n".join(lines))
    return EXIT_OK if not failed else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--output", help="write to this file instead of stdout")
    prob = argparse.ArgumentParser(add_help=False)
    prob.add_argument("problem", help="problem file (YAML), or builtin:NAME")
    prob.add_argument("--c", help="override c, comma-separated")
    prob.add_argument("--epsilon", type=float, help="override epsilon")
    prob.add_argument("--tol", type=float, default=DEFAULT_ZERO_TOL, help="activity tolerance")

    parser = argparse.ArgumentParser(prog="scholtes-ccop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", parents=[common, prob], help="classify a point of R or S(t)")
    p.add_argument("--point", required=True, help="x1,..,xn,y1,..,yn")
    p.add_argument("--side", choices=("R", "S"), required=True)
    p.add_argument("--t", type=float)
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("trace", parents=[common, prob], help="track KKT points of S(t) as t decreases")
    p.add_argument("--start", required=True, help="x1,..,xn,y1,..,yn")
    p.add_argument("--t0", type=float, default=Schedule.t0)
    p.add_argument("--theta", type=float, default=Schedule.theta)
    p.add_argument("--tmin", type=float, default=Schedule.t_min)
    p.set_defaults(func=cmd_trace)
    p = sub.add_parser("atlas", parents=[common, prob], help="enumerate the T-stationary points of R")
    p.set_defaults(func=cmd_atlas)
    p = sub.add_parser("examples", parents=[common], help="reproduce the built-in worked examples")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ModelError, ExprSyntaxError, OSError, yaml.YAMLError, AtlasSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasiblePointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ExprDomainError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

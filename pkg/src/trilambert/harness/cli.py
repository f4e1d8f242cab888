"""Command-line entry point.

Exit codes: 0 success, 2 validity violation in strict mode,
3 domain or numeric error, 4 bad input file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ScenarioError, ThreeBodyError, ValidityViolation
from ..lambert_w import Branch, lambertw, w_residual
from ..model import to_com_frame
from ..validity import check_preconditions
from .runner import _clean, _diagnostic_params, write_outputs
from .runner import run_scenario
from .scenario import MODES, demo_scenario, load_scenario

EXIT_OK = 0
EXIT_STRICT = 2
EXIT_NUMERIC = 3
EXIT_INPUT = 4

_SOLVE_MODES = ("paper_closed_form", "semi_analytic")
_INTEGRATE_MODES = ("oracle_newton", "oracle_paper", "surrogate_full", "surrogate_radial")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trilambert", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambertw", help="evaluate a real Lambert-W branch")
    p.add_argument("branch", choices=[b.value for b in Branch])
    p.add_argument("z", type=float)

    for name, helptext in (
        ("solve", "closed-form or semi-analytic solution"),
        ("integrate", "numerical reference integration"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--scenario", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--strict", action="store_true", default=None)

    p = sub.add_parser("compare", help="run two modes and compare positions")
    p.add_argument("--scenario", required=True)
    p.add_argument("--modes", required=True, help="A,B (B is the reference)")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true", default=None)

    p = sub.add_parser("validate", help="check the validity conditions of a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--strict", action="store_true", default=None)

    p = sub.add_parser("demo", help="write the golden example scenario")
    p.add_argument("--out", help="file to write (default: stdout)")
    return ap


def _cmd_lambertw(args) -> int:
    w = lambertw(args.z, Branch(args.branch))
    print(f"W = {w!r}")
    print(f"residual = {w_residual(w, args.z)!r}")
    return EXIT_OK


def _pick_mode(requested: str, allowed: tuple, fallback: str) -> str:
    return requested if requested in allowed else fallback


def _cmd_run(args, modes) -> int:
    sc = load_scenario(args.scenario)
    if args.command == "solve":
        modes = (_pick_mode(sc.solver.mode, _SOLVE_MODES, "paper_closed_form"),)
    elif args.command == "integrate":
        modes = (_pick_mode(sc.solver.mode, _INTEGRATE_MODES, "oracle_newton"),)
    threshold = getattr(args, "threshold", None)
    try:
        result = run_scenario(sc, modes, threshold, strict=args.strict)
    except ValidityViolation as exc:
        result = getattr(exc, "result", None)
        if result is not None:
            write_outputs(args.out, result)
        print(f"validity violation: {exc}", file=sys.stderr)
        return EXIT_STRICT
    for path in write_outputs(args.out, result):
        print(path)
    return EXIT_OK


def _cmd_compare(args) -> int:
    modes = tuple(m.strip() for m in args.modes.split(","))
    if len(modes) != 2 or any(m not in MODES for m in modes):
        raise ScenarioError(f"--modes needs two of {list(MODES)}, got {args.modes!r}")
    return _cmd_run(args, modes)


def _cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    strict = sc.solver.strict if args.strict is None else args.strict
    sys_ = to_com_frame(sc.system_state())
    params, errors = _diagnostic_params(sys_, sc.solver)
    rep = check_preconditions(sys_, sc.solver.angular_rate_threshold, sc.solver.r_max)
    out = {
        "preconditions": rep.to_dict(),
        "params": [None if p is None else p.to_dict() for p in params],
        "param_errors": [None if e is None else f"{type(e).__name__}: {e}" for e in errors],
    }
    print(json.dumps(_clean(out), indent=2, sort_keys=True))
    bad = any(e is not None for e in errors) or not rep.all_ok
    return EXIT_STRICT if strict and bad else EXIT_OK


def _cmd_demo(args) -> int:
    text = demo_scenario().dumps()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "lambertw":
            return _cmd_lambertw(args)
        if args.command in ("solve", "integrate"):
            return _cmd_run(args, None)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_demo(args)
    except ScenarioError as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ThreeBodyError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

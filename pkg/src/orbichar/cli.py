"""Command-line front end: ``orbichar <command> [flags]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .chain_core import ChainError, CoefficientRing, cohomology
from .cheeger_simons import cs_cohomology
from .checks import (
    ERROR,
    FAIL,
    PASS,
    CheckResult,
    check_gerbe,
    curvature_report,
    periods_report,
    ses_report,
    transgression_table,
    transport_table,
    verify,
)
from .deligne import DeligneComplex
from .orbifold import EquivariantComplex
from .scenarios import BUILTINS, SPACES, DEFAULT_MAX_CELLS, ScenarioError, ValidationError, builtin, dump_scenario, load_scenario

COMMANDS = ("cohomology", "check-gerbe", "curvature", "periods", "transgress", "transport", "verify", "ses", "examples")
DEFAULT_SEED = 20240229
CONVENTIONS = {
    "units": "cycles: a value x stands for the phase exp(2 pi i x)",
    "sign": "right action x.(gh) = (x.g).h; total differential = bar + (-1)^p inner",
    "rationals": "p/q strings reduced to [0,1) when circle valued",
}


def parse_degrees(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"degrees must look like a..b, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad degree range {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orbichar", description="Exact differential-character checks on finite global quotients.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", help="scenario JSON path or a built-in name")
    p.add_argument("--space", help="built-in space for `cohomology` (" + ", ".join(sorted(SPACES)) + ")")
    p.add_argument("--coeff", default="Z", choices=("Z", "Q", "Q/Z"), help="coefficients for Borel cohomology")
    p.add_argument("--theory", default="borel", choices=("borel", "deligne", "deligne-u1", "cs"))
    p.add_argument("--degrees", type=parse_degrees, help="degree range a..b")
    p.add_argument("--q", type=int, help="weight q")
    p.add_argument("--truncation", type=int, help="nerve truncation p_max")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--report", default="text", choices=("text", "json"))
    p.add_argument("--timing", action="store_true", help="add wall-clock timing (breaks byte-for-byte determinism)")
    p.add_argument("--name", help="`examples`: emit only this built-in")
    p.add_argument("--out", help="`examples`: write each built-in to DIR/<name>.json")
    return p


def _max_cells() -> int:
    raw = os.environ.get("ORBI_MAX_CELLS", str(DEFAULT_MAX_CELLS))
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"ORBI_MAX_CELLS must be an integer, got {raw!r}") from None


def resolve_scenario(arg: str | None):
    if arg is None:
        raise ValidationError("--scenario is required for this command")
    if not os.path.exists(arg) and arg in BUILTINS:
        sc = builtin(arg)
        _check_size(sc.orbifold)
        return sc
    return load_scenario(arg)


def _check_size(base: EquivariantComplex) -> None:
    cells = sum(base.complex.count(k) for k in range(base.complex.dim + 1))
    if cells * base.group.order > _max_cells():
        raise ValidationError(f"complex too large for ORBI_MAX_CELLS={_max_cells()}")


def _cohomology(args) -> tuple[str, EquivariantComplex, list[CheckResult]]:
    if args.space:
        if args.space not in SPACES:
            raise ValidationError(f"unknown space {args.space!r}; choose from {', '.join(sorted(SPACES))}")
        base = EquivariantComplex(SPACES[args.space](), name=args.space)
        name = args.space
        q_default, deg_default = 2, (0, 4)
    else:
        sc = resolve_scenario(args.scenario)
        base, name = sc.orbifold, sc.name
        q_default, deg_default = sc.q, sc.degrees
    _check_size(base)
    lo, hi = args.degrees or tuple(deg_default)
    q = args.q if args.q is not None else q_default
    p_max = args.truncation if args.truncation is not None else hi + 2
    if p_max < hi + 1:
        raise ValidationError(f"--truncation {p_max} too small for degree {hi}; need at least {hi + 1}")
    r = CheckResult(f"cohomology-{args.theory}")
    groups = {}
    if args.theory == "borel":
        ring = {"Z": CoefficientRing.INTEGERS, "Q": CoefficientRing.RATIONALS, "Q/Z": CoefficientRing.RATIONALS_MOD_1}[args.coeff]
        total = base.nerve(p_max).total
        for n in range(lo, hi + 1):
            groups[str(n)] = str(cohomology(total, n, ring))
        r.values["coefficients"] = args.coeff
    elif args.theory in ("deligne", "deligne-u1"):
        dc = DeligneComplex(base, q, p_max + 1 if args.theory == "deligne-u1" else p_max)
        for n in range(lo, hi + 1):
            # the circle-valued complex in degree n is the integral one in degree n + 1
            groups[str(n)] = str(dc.cohomology(n + 1 if args.theory == "deligne-u1" else n))
        r.values["q"] = q
    else:
        for n in range(lo, hi + 1):
            groups[str(n)] = str(cs_cohomology(base, q, n, p_max))
        r.values["q"] = q
    r.values["groups"] = groups
    r.values["truncation"] = p_max
    return name, base, [r]


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "examples":
            return _examples(args, out)
        if args.command == "cohomology":
            name, _, results = _cohomology(args)
            truncation = results[0].values["truncation"]
        else:
            sc = resolve_scenario(args.scenario)
            name = sc.name
            truncation = args.truncation if args.truncation is not None else 4
            if args.command == "check-gerbe":
                results = [check_gerbe(sc)]
            elif args.command == "curvature":
                results = [curvature_report(sc)]
            elif args.command == "periods":
                results = [periods_report(sc, truncation)]
            elif args.command == "transgress":
                results = [transgression_table(sc)]
            elif args.command == "transport":
                results = [transport_table(sc)]
            elif args.command == "ses":
                q = args.q if args.q is not None else sc.q
                truncation = args.truncation if args.truncation is not None else q + 2
                results = [ses_report(sc, q, truncation)]
            else:
                results = verify(sc, args.seed)
    except (ScenarioError, ChainError, ValueError) as exc:
        print(f"orbichar: invalid input: {exc}", file=sys.stderr)
        return 2
    results = sorted(results, key=lambda r: r.name)
    status = FAIL if any(r.status in (FAIL, ERROR) for r in results) else PASS
    report = {
        "engine": {"name": "orbichar", "version": __version__},
        "conventions": {**CONVENTIONS, "truncation": truncation},
        "command": args.command,
        "scenario": name,
        "seed": args.seed,
        "status": status,
        "checks": [r.to_json() for r in results],
    }
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 3)
    out.write(render(report, args.report))
    return 0 if status == PASS else 1


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    lines: list[str] = []
    _text(report, 0, lines)
    return "\n".join(lines) + "\n"


def _text(obj, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                _text(v, indent + 1, lines)
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}-")
                _text(v, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(f"{pad}{_scalar(obj)}")


def _scalar(v) -> str:
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return json.dumps(v) if not isinstance(v, str) else v


def _examples(args, out) -> int:
    names = sorted(BUILTINS)
    if args.name:
        if args.name not in BUILTINS:
            print(f"orbichar: invalid input: unknown built-in {args.name!r}", file=sys.stderr)
            return 2
        names = [args.name]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for n in names:
            with open(os.path.join(args.out, f"{n}.json"), "w") as fh:
                fh.write(dump_scenario(builtin(n)) + "\n")
            out.write(f"{os.path.join(args.out, n + '.json')}\n")
        return 0
    if args.name:
        out.write(dump_scenario(builtin(args.name)) + "\n")
    else:
        for n in names:
            out.write(f"{n}: {builtin(n).description}\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

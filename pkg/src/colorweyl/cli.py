"""Command line front end: validate, build, verify and example.

Exit codes: 0 consistent, 1 certified refutation, 2 invalid input, 3 evidence only.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import EXAMPLES, build_instance, emit_config, example_config, parse_config
from .foundation import ConstructionError
from .report import emit_report
from .theorems import CHECK_ORDER, run_checks

EXIT_OK, EXIT_REFUTED, EXIT_INVALID, EXIT_EVIDENCE = 0, 1, 2, 3


def _load(path: str):
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    spec = parse_config(text)
    return spec, build_instance(spec, p.stem)


def cmd_validate(args) -> int:
    spec, inst = _load(args.config)
    A = inst.algebra
    print(f"ok: {inst.name} over {inst.field.name}")
    print(f"  dim A = {inst.dim_A}, generators = {', '.join(g.name for g in spec.gens)}")
    print(f"  D = {', '.join(inst.D.names)}, dim F1 = {inst.F1.dim}")
    if inst.window is not None:
        print(f"  polynomial window mode (envelope dim {A.dim}); index set infinite")
    else:
        print(f"  index set size = {inst.jset.size}")
    return EXIT_OK


def cmd_build(args) -> int:
    _, inst = _load(args.config)
    inst.require_finite()
    AD = inst.AD
    print(f"{inst.name} over {inst.field.name}")
    print(f"  dim A        {inst.algebra.dim}")
    print(f"  script D     {', '.join(inst.script_D.names)}")
    print(f"  index set    {inst.jset.size}")
    print(f"  dim A[D]     {AD.dim}")
    print(f"  dim W        {inst.W.dim}")
    print(f"  dim center   {inst.Z.dim}")
    return EXIT_OK


def _selection(spec, args) -> list:
    declared = {c.id: c.params() for c in spec.checks}
    if args.checks:
        ids = [s.strip() for s in args.checks.split(",") if s.strip()]
        for cid in ids:
            if cid not in CHECK_ORDER:
                raise ConstructionError("UNKNOWN_CHECK", f"unknown check {cid!r}; choose from {', '.join(CHECK_ORDER)}")
    else:
        ids = [c.id for c in spec.checks]
    out = []
    for cid in ids:
        params = dict(declared.get(cid, {}))
        for key in ("budget", "trials", "cutoff"):
            val = getattr(args, key)
            if val is not None:
                params[key] = val
        out.append((cid, params))
    return out


def cmd_verify(args) -> int:
    spec, inst = _load(args.config)
    report = run_checks(inst, _selection(spec, args), rng_seed=args.rng_seed)
    if args.json:
        Path(args.json).write_text(emit_report(report, "json"), encoding="utf-8")
    sys.stdout.write(emit_report(report, args.format))
    return report.exit_code


def cmd_example(args) -> int:
    text = emit_config(example_config(args.name, n=args.n, field=args.field))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colorweyl",
        description="Build Weyl-type algebras A[D] over graded color-commutative algebras and check their structure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a config and build the instance")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", help="materialise A[D] and print its dimensions")
    p.add_argument("config")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="run structural checks and print a report")
    p.add_argument("config")
    p.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECK_ORDER)}")
    p.add_argument("--json", metavar="PATH", help="also write the JSON report here")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--budget", type=int, help="override the exhaustive enumeration budget")
    p.add_argument("--trials", type=int, help="override the random seed count")
    p.add_argument("--cutoff", type=int, help="level cutoff for infinite index sets")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="print a corpus config")
    p.add_argument("name", choices=EXAMPLES)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--field", default="gf3")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConstructionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"error: IO: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

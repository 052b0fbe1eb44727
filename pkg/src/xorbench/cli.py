"""Command-line interface.

Subcommands: gen, solve, analyze, validate, export. Exit codes: 0 success,
1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xorbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a planted instance ensemble")
    p.add_argument("--sizes", required=True, help="comma list of QUBO sizes n (even)")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="run all incomplete plan cells")
    p.add_argument("--plan", required=True, help="plan JSON file")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", action="store_true", default=True)
    p.add_argument("--no-resume", dest="resume", action="store_false")

    p = sub.add_parser("analyze", help="TTS curves and scaling fits from run logs")
    p.add_argument("--logs", required=True, help="benchmark output directory")
    p.add_argument("--quantiles", default="0.25,0.5,0.75")
    p.add_argument("--fp", default="1", help="parallelization factor, expression in n")
    p.add_argument("--grid", default="log:1:1e5:21", help="t_f grid spec")
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="check instance-file invariants")
    p.add_argument("--instances", required=True)

    p = sub.add_parser("export", help="re-export analysis JSON as CSV")
    p.add_argument("--analysis", required=True, help="analysis directory")
    p.add_argument("--format", choices=["csv"], default="csv")
    return parser


def cmd_gen(args) -> int:
    sizes = [int(v) for v in args.sizes.split(",")]
    manifest = bench.generate_ensemble(args.out, sizes, args.count, args.seed)
    total = sum(len(v) for v in manifest["sizes"].values())
    print(f"generated {total} instances over sizes {sizes} -> {args.out}/instances")
    return EXIT_OK


def cmd_solve(args) -> int:
    with open(args.plan) as fh:
        plan = json.load(fh)
    out_dir = plan["out_dir"]
    stats = bench.run_plan(plan, out_dir, workers=args.workers, resume=args.resume)
    print(f"plan cells: {stats['cells']}, executed: {stats['executed']}, "
          f"skipped (already done): {stats['skipped']}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    quantiles = [float(v) for v in args.quantiles.split(",")]
    result = bench.analyze(args.logs, quantiles, fp_expr=args.fp,
                           grid_spec=args.grid, resamples=args.resamples,
                           rng_seed=args.seed)
    out_dir = args.out or args.logs
    bench.write_analysis(result, out_dir)
    print(f"wrote {len(result['curves'])} curves, {len(result['fits'])} fits, "
          f"{len(result['gaps'])} gaps -> {out_dir}/analysis")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = bench.validate_ensemble(args.instances)
    for name, passed in sorted(report["checks"].items()):
        print(f"{name}: {passed}/{report['instances']} pass")
    if report["failures"]:
        for iid, check in report["failures"]:
            print(f"FAIL {check}: {iid}")
        print(f"{len(report['failures'])} failures")
        return EXIT_DATA
    print("all checks passed")
    return EXIT_OK


def cmd_export(args) -> int:
    curves_path = os.path.join(args.analysis, "curves.json")
    with open(curves_path) as fh:
        curves = json.load(fh)
    bench.export_csv({"curves": curves}, os.path.join(args.analysis, "curves.csv"))
    print(f"wrote {args.analysis}/curves.csv")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handlers = {"gen": cmd_gen, "solve": cmd_solve, "analyze": cmd_analyze,
                "validate": cmd_validate, "export": cmd_export}
    try:
        return handlers[args.command](args)
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

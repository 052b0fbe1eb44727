#!/usr/bin/env python3
"""Desk-scale end-to-end benchmark demo (about a minute single-threaded).

Generates a small planted ensemble, runs parallel tempering and the
quasi-greedy search on it, and writes TTS curves plus a CSV under OUT/analysis.
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from xorbench import bench  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out")
    parser.add_argument("--sizes", default="16,24,32")
    parser.add_argument("--count", type=int, default=8, help="instances per size")
    parser.add_argument("--runs", type=int, default=30, help="runs per instance")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    sizes = [int(v) for v in args.sizes.split(",")]
    bench.generate_ensemble(args.out, sizes, args.count, args.seed)
    print(f"generated {args.count} instances per size {sizes}")

    plan = {
        "master_seed": args.seed,
        "out_dir": args.out,
        "sizes": sizes,
        "solvers": [
            {"solver_id": "pt",
             "params": {"num_replicas": 16, "max_steps": 20_000},
             "runs_per_instance": args.runs},
            {"solver_id": "qg",
             "params": {"max_steps": 100_000},
             "runs_per_instance": args.runs},
        ],
    }
    with open(os.path.join(args.out, "plan.json"), "w") as fh:
        json.dump(plan, fh, indent=1)
    stats = bench.run_plan(plan, args.out, workers=args.workers)
    print(f"cells {stats['cells']}, executed {stats['executed']}, "
          f"skipped {stats['skipped']}")

    result = bench.analyze(args.out, [0.5], grid_spec="log:1:20000:25",
                           resamples=500)
    bench.write_analysis(result, args.out)
    for c in result["curves"]:
        o = c["opt"]
        print(f"{c['solver_id']:>3} n={c['size']:<3} median optTTS "
              f"{o['tts']:.1f} +- {o['sigma']:.1f} steps at t_f={o['t_f']:.1f}"
              f"{'  [boundary]' if o['boundary_flag'] else ''}")
    for f in result["fits"]:
        print(f"{f['solver_id']:>3} q={f['quantile']}: log10 optTTS ~ "
              f"{f['alpha']:.4f} * n + {f['beta']:.3f} "
              f"(alpha 2-sigma {f['alpha_2sigma']:.4f}, window {f['window']})")


if __name__ == "__main__":
    main()

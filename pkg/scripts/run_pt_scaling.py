#!/usr/bin/env python3
"""Full parallel-tempering scaling run over n in {32, ..., 96} (hours).

Fits log10 median optTTS = alpha * n + beta over the AUTO window and reports
alpha with a 2-sigma interval. Steps are PT steps, not wall-clock time, so
alpha is comparable across machines while beta is not. Resumable: rerunning
with the same seed and output directory skips completed cells.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from xorbench import bench  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="pt_scaling_out")
    parser.add_argument("--sizes", default="32,40,48,56,64,72,80,88,96")
    parser.add_argument("--count", type=int, default=50, help="instances per size")
    parser.add_argument("--runs", type=int, default=100, help="runs per instance")
    parser.add_argument("--max-steps", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--quantiles", default="0.25,0.5,0.75")
    args = parser.parse_args()

    sizes = [int(v) for v in args.sizes.split(",")]
    if not os.path.exists(os.path.join(args.out, "instances", "manifest.json")):
        bench.generate_ensemble(args.out, sizes, args.count, args.seed)
        print(f"generated {args.count} instances per size {sizes}")

    plan = {
        "master_seed": args.seed,
        "out_dir": args.out,
        "sizes": sizes,
        "solvers": [{"solver_id": "pt",
                     "params": {"max_steps": args.max_steps},
                     "runs_per_instance": args.runs}],
    }
    stats = bench.run_plan(plan, args.out, workers=args.workers)
    print(f"cells {stats['cells']}, executed {stats['executed']}, "
          f"skipped {stats['skipped']}")

    quantiles = [float(v) for v in args.quantiles.split(",")]
    result = bench.analyze(args.out, quantiles,
                           grid_spec=f"log:1:{args.max_steps}:41", resamples=1000)
    bench.write_analysis(result, args.out)
    if not result["fits"]:
        print("no fit: need finite optTTS at >= 3 sizes "
              f"({len(result['gaps'])} gaps; see analysis/curves.json)")
        return
    for f in result["fits"]:
        print(f"q={f['quantile']}: alpha = {f['alpha']:.5f} "
              f"+- {f['alpha_2sigma']:.5f} (2-sigma), beta = {f['beta']:.3f}, "
              f"window n = {f['window']}")


if __name__ == "__main__":
    main()

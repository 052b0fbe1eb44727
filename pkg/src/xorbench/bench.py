"""Benchmark orchestration: ensembles on disk, solver plans, run logs, analysis.

Layout under an output directory:

    instances/n<k>/<instance_id>.json   one instance per file
    instances/manifest.json             sizes, ids, content hashes
    logs/<solver_id>.jsonl              one first-passage record per line
    params/<solver_id>_<hash>.json      full parameter set per params_hash
    analysis/curves.json / fits.json / curves.csv

Every run cell (instance_id, solver_id, params_hash, seed) gets its own seed
derived by content hash from the master seed, so re-runs and added cells
never perturb existing results; completed cells are skipped on resume.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import tts as tts_mod
from .instances import (
    brute_force_unique_solutions,
    generate_instance,
    gf2_eliminate,
    instance_from_dict,
    instance_to_dict,
    instance_to_json,
    ising_energy,
    ising_to_qubo,
    planted_spin_config,
    to_ising,
)
from .gf2 import SINGULAR, rows_from_clauses
from .solvers import (
    DauParams,
    PtParams,
    QgParams,
    SbParams,
    dau_run,
    params_hash,
    pt_run,
    quasigreedy_run,
    sb_run,
)

PARAM_TYPES = {"pt": PtParams, "dau": DauParams, "sb": SbParams, "qg": QgParams}


def cell_seed(master_seed: int, instance_id: str, solver_id: str, p_hash: str, run_index: int) -> int:
    payload = f"{master_seed}:{instance_id}:{solver_id}:{p_hash}:{run_index}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little") >> 1


def instance_seed(master_seed: int, n: int, index: int) -> int:
    payload = f"{master_seed}:gen:{n}:{index}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little") >> 1


# ---------------------------------------------------------------------------
# generation


def generate_ensemble(out_dir: str, sizes, count: int, master_seed: int) -> dict:
    """Write `count` instances per size n (n = 2m) and a hash manifest."""
    manifest = {"master_seed": master_seed, "count": count, "sizes": {}}
    inst_root = os.path.join(out_dir, "instances")
    for n in sizes:
        if n % 2 or n < 8:
            raise ValueError(f"sizes must be even and >= 8, got {n}")
        size_dir = os.path.join(inst_root, f"n{n}")
        os.makedirs(size_dir, exist_ok=True)
        entries = []
        for k in range(count):
            inst = generate_instance(n // 2, instance_seed(master_seed, n, k))
            text = instance_to_json(inst)
            path = os.path.join(size_dir, f"{inst.instance_id}.json")
            with open(path, "w") as fh:
                fh.write(text)
            entries.append({
                "instance_id": inst.instance_id,
                "file_sha256": hashlib.sha256(text.encode()).hexdigest(),
            })
        manifest["sizes"][str(n)] = entries
    with open(os.path.join(inst_root, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return manifest


def load_instances(instances_dir: str) -> dict:
    """{instance_id: (n, XorsatInstance)} for every instance file under the dir."""
    found = {}
    for root, _, files in os.walk(instances_dir):
        for name in files:
            if not name.endswith(".json") or name == "manifest.json":
                continue
            with open(os.path.join(root, name)) as fh:
                d = json.load(fh)
            inst = instance_from_dict(d)
            found[inst.instance_id] = (d["n"], inst)
    return found


# ---------------------------------------------------------------------------
# validation


def validate_ensemble(instances_dir: str, exhaustive_max_m: int = 10,
                      random_configs: int = 100, rng_seed: int = 0) -> dict:
    """Run the construction invariants over every instance file; returns a report."""
    rng = np.random.Generator(np.random.Philox(np.uint64(rng_seed)))
    report = {"instances": 0, "failures": [], "checks": {
        "regularity": 0, "rank": 0, "planted_energy": 0, "qubo_equiv": 0,
        "qubo_range": 0, "uniqueness": 0,
    }}
    manifest_path = os.path.join(instances_dir, "manifest.json")
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        for n, entries in manifest["sizes"].items():
            for entry in entries:
                path = os.path.join(instances_dir, f"n{n}", entry["instance_id"] + ".json")
                with open(path) as fh:
                    text = fh.read()
                if hashlib.sha256(text.encode()).hexdigest() != entry["file_sha256"]:
                    report["failures"].append((entry["instance_id"], "manifest_hash"))
    loaded = {}
    for root, _, files in os.walk(instances_dir):
        for name in files:
            if not name.endswith(".json") or name == "manifest.json":
                continue
            with open(os.path.join(root, name)) as fh:
                d = json.load(fh)
            try:
                inst = instance_from_dict(d)
            except (ValueError, KeyError, TypeError):
                report["instances"] += 1
                report["failures"].append((name[:-len(".json")], "parse"))
                continue
            loaded[inst.instance_id] = (d["n"], inst)
    for iid, (n, inst) in sorted(loaded.items()):
        report["instances"] += 1
        fails = []
        counts = np.zeros(inst.m, dtype=int)
        for i1, i2, i3, _ in inst.clauses:
            if len({i1, i2, i3}) != 3:
                fails.append("regularity")
            counts[[i1, i2, i3]] += 1
        if not np.all(counts == 3) or len(inst.clauses) != inst.m:
            fails.append("regularity")
        rows = rows_from_clauses(inst.clauses, inst.m)
        b = [c[3] for c in inst.clauses]
        rank, sol = gf2_eliminate(rows, b, inst.m)
        if rank != inst.m or sol == SINGULAR or tuple(sol) != inst.planted:
            fails.append("rank")
        ising = to_ising(inst)
        if ising_energy(ising, planted_spin_config(inst)) != ising.ground_energy:
            fails.append("planted_energy")
        qubo = ising_to_qubo(ising)
        from .instances import qubo_value
        for _ in range(random_configs):
            x = rng.integers(0, 2, ising.n)
            if qubo_value(qubo, x) + qubo.offset != ising_energy(ising, 1 - 2 * x):
                fails.append("qubo_equiv")
                break
        if qubo.q and not all(-30 <= v <= 16 for v in qubo.q.values()):
            fails.append("qubo_range")
        if inst.m <= exhaustive_max_m:
            sols = brute_force_unique_solutions(inst)
            if len(sols) != 1 or tuple(sols[0]) != inst.planted:
                fails.append("uniqueness")
        for name in report["checks"]:
            if name not in fails and not (name == "uniqueness" and inst.m > exhaustive_max_m):
                report["checks"][name] += 1
        for f in fails:
            report["failures"].append((iid, f))
    return report


# ---------------------------------------------------------------------------
# solving


def _params_from_dict(solver_id: str, params: dict):
    cls = PARAM_TYPES[solver_id]
    kwargs = dict(params)
    if solver_id == "qg" and "flip_prob" in kwargs:
        kwargs["flip_prob"] = tuple(kwargs["flip_prob"])
    return cls(**kwargs)


def _run_cell(args):
    solver_id, inst_dict, params_dict, seed = args
    inst = instance_from_dict(inst_dict)
    params = _params_from_dict(solver_id, params_dict)
    if solver_id == "qg":
        rec = quasigreedy_run(inst, params, seed)
    else:
        ising = to_ising(inst)
        run = {"pt": pt_run, "dau": dau_run, "sb": sb_run}[solver_id]
        rec = run(ising, params, seed, instance_id=inst.instance_id)
    return rec


def plan_cells(plan: dict, instances: dict):
    """Expand a plan into (instance_id, solver_id, params_dict, p_hash, seed) cells."""
    master_seed = plan["master_seed"]
    sizes = set(plan["sizes"])
    cells = []
    for job in plan["solvers"]:
        solver_id = job["solver_id"]
        params = _params_from_dict(solver_id, job.get("params", {}))
        p_hash = params_hash(params)
        runs = job.get("runs_per_instance", 100)
        for iid, (n, _) in sorted(instances.items()):
            if n not in sizes:
                continue
            for k in range(runs):
                seed = cell_seed(master_seed, iid, solver_id, p_hash, k)
                cells.append((iid, solver_id, job.get("params", {}), p_hash, seed))
    return cells


def completed_keys(logs_dir: str) -> set:
    done = set()
    if not os.path.isdir(logs_dir):
        return done
    for name in os.listdir(logs_dir):
        if not name.endswith(".jsonl"):
            continue
        with open(os.path.join(logs_dir, name)) as fh:
            for line in fh:
                if not line.strip():
                    continue
                d = json.loads(line)
                done.add((d["instance_id"], d["solver_id"], d["params_hash"], d["seed"]))
    return done


def run_plan(plan: dict, out_dir: str, workers: int = 1, resume: bool = True) -> dict:
    """Execute all incomplete plan cells; append JSON Lines logs per solver."""
    instances = load_instances(os.path.join(out_dir, "instances"))
    logs_dir = os.path.join(out_dir, "logs")
    params_dir = os.path.join(out_dir, "params")
    os.makedirs(logs_dir, exist_ok=True)
    os.makedirs(params_dir, exist_ok=True)
    cells = plan_cells(plan, instances)
    done = completed_keys(logs_dir) if resume else set()
    todo = [c for c in cells if (c[0], c[1], c[3], c[4]) not in done]

    for job in plan["solvers"]:
        params = _params_from_dict(job["solver_id"], job.get("params", {}))
        p_hash = params_hash(params)
        sidecar = os.path.join(params_dir, f"{job['solver_id']}_{p_hash}.json")
        if not os.path.exists(sidecar):
            with open(sidecar, "w") as fh:
                json.dump({"solver_id": job["solver_id"], "params_hash": p_hash,
                           "params": job.get("params", {})}, fh, sort_keys=True, indent=1)
                fh.write("\n")

    job_args = [( c[1], instance_to_dict(instances[c[0]][1]), c[2], c[4]) for c in todo]
    results = []
    if workers <= 1:
        for args in job_args:
            results.append(_run_cell(args))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, job_args, chunksize=8))
    handles = {}
    try:
        for cell, rec in zip(todo, results):
            solver_id = cell[1]
            if solver_id not in handles:
                handles[solver_id] = open(os.path.join(logs_dir, f"{solver_id}.jsonl"), "a")
            line = json.dumps(rec.to_log_dict(cell[3]), sort_keys=True, separators=(",", ":"))
            handles[solver_id].write(line + "\n")
    finally:
        for fh in handles.values():
            fh.close()
    return {"cells": len(cells), "executed": len(todo), "skipped": len(cells) - len(todo)}


# ---------------------------------------------------------------------------
# analysis


def parse_fp_expr(expr: str):
    """Parallelization factor as a function of n: a constant or an expression
    in n such as 'floor(1024/n)'."""
    allowed = {"n": 0, "floor": math.floor, "min": min, "max": max}
    code = compile(expr, "<fp>", "eval")
    for name in code.co_names:
        if name not in allowed:
            raise ValueError(f"name {name!r} not allowed in f_p expression")

    def f_p(n: int) -> float:
        val = eval(code, {"__builtins__": {}}, {"n": n, "floor": math.floor,
                                                "min": min, "max": max})
        if val < 1:
            raise ValueError(f"f_p({n}) = {val} < 1")
        return float(val)

    return f_p


def parse_grid_spec(spec: str) -> np.ndarray:
    """Runtime grid: 'log:<lo>:<hi>:<count>' or a comma list of values."""
    if spec.startswith("log:"):
        _, lo, hi, count = spec.split(":")
        return np.geomspace(float(lo), float(hi), int(count))
    return np.array([float(v) for v in spec.split(",")])


def read_logs(logs_dir: str):
    """All log lines grouped by (solver_id, params_hash, instance_id)."""
    from .solvers.common import FirstPassageRecord
    groups: dict = {}
    for name in sorted(os.listdir(logs_dir)):
        if not name.endswith(".jsonl"):
            continue
        with open(os.path.join(logs_dir, name)) as fh:
            for line in fh:
                if not line.strip():
                    continue
                d = json.loads(line)
                rec = FirstPassageRecord(
                    solver_id=d["solver_id"], instance_id=d["instance_id"],
                    seed=d["seed"], steps_to_solution=d["steps"],
                    success=d["success"], cutoff_steps=d["cutoff"],
                    per_step_cost_ns=d.get("per_step_cost_ns"),
                    flags=tuple(d.get("flags", ())),
                )
                groups.setdefault((d["solver_id"], d["params_hash"], d["instance_id"]),
                                  []).append(rec)
    return groups


def analyze(out_dir: str, quantiles, fp_expr: str = "1", grid_spec: str = "log:1:1e5:21",
            resamples: int = 1000, rng_seed: int = 0) -> dict:
    """Full TTS pipeline: success counts on the grid, bootstrap curves per
    (size, solver, quantile), and scaling fits per (solver, quantile)."""
    instances = load_instances(os.path.join(out_dir, "instances"))
    size_of = {iid: n for iid, (n, _) in instances.items()}
    groups = read_logs(os.path.join(out_dir, "logs"))
    f_p = parse_fp_expr(fp_expr)
    grid = parse_grid_spec(grid_spec)

    by_cell: dict = {}
    for (solver_id, p_hash, iid), recs in groups.items():

        n = size_of.get(iid)
        if n is None:
            continue
        by_cell.setdefault((solver_id, p_hash, n), {})[iid] = recs

    curves = []
    gaps = []
    for (solver_id, p_hash, n), inst_map in sorted(by_cell.items()):
        fp_n = f_p(n)
        for q in quantiles:
            means, sigmas = [], []
            for t_f in grid:
                counts = []
                for recs in inst_map.values():
                    try:
                        counts.append(tts_mod.success_counts_at(recs, t_f))
                    except ValueError:
                        continue
                if not counts:
                    gaps.append({"solver_id": solver_id, "n": n, "t_f": t_f,
                                 "reason": "no_informative_runs"})
                    means.append(math.inf)
                    sigmas.append(math.inf)
                    continue
                mean, sigma, _ = tts_mod.bootstrap_tts(
                    counts, t_f, q, fp_n, resamples=resamples,
                    rng_seed=cell_seed(rng_seed, f"analysis{t_f}", solver_id, p_hash, n))
                means.append(mean)
                sigmas.append(sigma)
            try:
                o_tf, o_tts, o_sig, boundary = tts_mod.opt_tts(grid, means, sigmas)
            except ValueError:
                gaps.append({"solver_id": solver_id, "n": n, "quantile": q,
                             "reason": "all_infinite"})
                continue
            curves.append({
                "solver_id": solver_id, "params_hash": p_hash, "size": n,
                "quantile": q, "f_p": fp_n,
                "grid": [{"t_f": float(t), "tts_mean": m, "tts_sigma": s}
                         for t, m, s in zip(grid, means, sigmas)],
                "opt": {"t_f": o_tf, "tts": o_tts, "sigma": o_sig,
                        "boundary_flag": boundary},
            })

    fits = []
    by_fit: dict = {}
    for c in curves:
        by_fit.setdefault((c["solver_id"], c["params_hash"], c["quantile"]), []).append(c)
    for (solver_id, p_hash, q), cs in sorted(by_fit.items()):
        pts = []
        for c in cs:
            o = c["opt"]
            if not math.isfinite(o["tts"]) or o["tts"] <= 0:
                continue
            sigma_log = max(o["sigma"] / (o["tts"] * math.log(10)), 1e-12)
            pts.append((c["size"], math.log10(o["tts"]), sigma_log))
        if len(pts) < 3:
            gaps.append({"solver_id": solver_id, "quantile": q, "reason": "too_few_sizes"})
            continue
        fit = tts_mod.scaling_fit(pts, window_policy="AUTO", quantile=q)
        fits.append({
            "solver_id": solver_id, "params_hash": p_hash, "quantile": q,
            "alpha": fit.alpha, "alpha_2sigma": fit.alpha_2sigma,
            "beta": fit.beta, "beta_2sigma": fit.beta_2sigma,
            "window": list(fit.window),
        })
    return {"curves": curves, "fits": fits, "gaps": gaps}


def write_analysis(result: dict, out_dir: str):
    analysis_dir = os.path.join(out_dir, "analysis")
    os.makedirs(analysis_dir, exist_ok=True)
    with open(os.path.join(analysis_dir, "curves.json"), "w") as fh:
        json.dump(result["curves"], fh, sort_keys=True, indent=1)
        fh.write("\n")
    with open(os.path.join(analysis_dir, "fits.json"), "w") as fh:
        json.dump(result["fits"], fh, sort_keys=True, indent=1)
        fh.write("\n")
    export_csv(result, os.path.join(analysis_dir, "curves.csv"))


def export_csv(result: dict, path: str):
    """One row per (curve, grid point), numerically identical to the JSON."""
    with open(path, "w") as fh:
        fh.write("solver_id,params_hash,size,quantile,f_p,t_f,tts_mean,tts_sigma,"
                 "opt_t_f,opt_tts,opt_sigma,boundary_flag\n")
        for c in result["curves"]:
            o = c["opt"]
            for g in c["grid"]:
                fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in (
                    c["solver_id"], c["params_hash"], c["size"], c["quantile"],
                    c["f_p"], g["t_f"], g["tts_mean"], g["tts_sigma"],
                    o["t_f"], o["tts"], o["sigma"], o["boundary_flag"],
                )) + "\n")

import csv
import json
import os

import numpy as np
import pytest

from xorbench import bench, cli


def make_plan(out_dir, sizes=(16,), runs=6, solvers=None):
    if solvers is None:
        solvers = [{"solver_id": "pt",
                    "params": {"num_replicas": 8, "max_steps": 20_000},
                    "runs_per_instance": runs}]
    return {"master_seed": 7, "out_dir": str(out_dir), "sizes": list(sizes),
            "solvers": solvers}


@pytest.fixture(scope="module")
def bench_dir(tmp_path_factory):
    """A small solved benchmark shared by the read-only tests."""
    out = tmp_path_factory.mktemp("bench")
    bench.generate_ensemble(str(out), [16], 4, master_seed=3)
    plan = make_plan(out)
    bench.run_plan(plan, str(out), workers=1)
    return out


class TestGenerate:
    def test_layout_and_manifest(self, tmp_path):
        manifest = bench.generate_ensemble(str(tmp_path), [16, 24], 3, master_seed=1)
        assert set(manifest["sizes"]) == {"16", "24"}
        for n, entries in manifest["sizes"].items():
            assert len(entries) == 3
            for e in entries:
                path = tmp_path / "instances" / f"n{n}" / f"{e['instance_id']}.json"
                assert path.exists()
        assert (tmp_path / "instances" / "manifest.json").exists()

    def test_byte_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        bench.generate_ensemble(str(a), [16], 3, master_seed=5)
        bench.generate_ensemble(str(b), [16], 3, master_seed=5)
        for root, _, files in os.walk(a / "instances"):
            rel = os.path.relpath(root, a)
            for name in files:
                with open(os.path.join(root, name), "rb") as fh:
                    left = fh.read()
                with open(b / rel / name, "rb") as fh:
                    right = fh.read()
                assert left == right, name

    def test_different_seeds_differ(self, tmp_path):
        m1 = bench.generate_ensemble(str(tmp_path / "a"), [16], 2, master_seed=1)
        m2 = bench.generate_ensemble(str(tmp_path / "b"), [16], 2, master_seed=2)
        ids1 = {e["instance_id"] for e in m1["sizes"]["16"]}
        ids2 = {e["instance_id"] for e in m2["sizes"]["16"]}
        assert ids1 != ids2

    def test_odd_size_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            bench.generate_ensemble(str(tmp_path), [15], 1, master_seed=0)


class TestValidate:
    def test_clean_ensemble_passes(self, bench_dir):
        report = bench.validate_ensemble(str(bench_dir / "instances"))
        assert report["instances"] == 4
        assert report["failures"] == []
        assert report["checks"]["regularity"] == 4
        assert report["checks"]["uniqueness"] == 4

    def test_corrupted_file_caught(self, tmp_path):
        bench.generate_ensemble(str(tmp_path), [16], 2, master_seed=9)
        inst_dir = tmp_path / "instances" / "n16"
        victim = sorted(inst_dir.glob("*.json"))[0]
        d = json.loads(victim.read_text())
        # flip one parity bit: breaks the planted solution and the manifest hash
        c = list(d["clauses"][0])
        c[3] ^= 1
        d["clauses"][0] = c
        victim.write_text(json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n")
        report = bench.validate_ensemble(str(tmp_path / "instances"))
        kinds = {k for _, k in report["failures"]}
        assert "manifest_hash" in kinds


class TestRunPlan:
    def test_log_schema(self, bench_dir):
        log = bench_dir / "logs" / "pt.jsonl"
        lines = [json.loads(s) for s in log.read_text().splitlines()]
        assert len(lines) == 4 * 6
        for d in lines:
            assert set(d) == {"solver_id", "instance_id", "seed", "params_hash",
                              "steps", "cutoff", "success", "per_step_cost_ns",
                              "flags"}
            assert d["solver_id"] == "pt"
            assert d["success"] == (d["steps"] is not None)

    def test_params_sidecar(self, bench_dir):
        sidecars = list((bench_dir / "params").glob("pt_*.json"))
        assert len(sidecars) == 1
        d = json.loads(sidecars[0].read_text())
        assert d["params"]["num_replicas"] == 8
        assert sidecars[0].name == f"pt_{d['params_hash']}.json"

    def test_resume_skips_completed(self, bench_dir):
        plan = make_plan(bench_dir)
        before = (bench_dir / "logs" / "pt.jsonl").read_bytes()
        stats = bench.run_plan(plan, str(bench_dir), workers=1)
        assert stats["executed"] == 0 and stats["skipped"] == stats["cells"]
        assert (bench_dir / "logs" / "pt.jsonl").read_bytes() == before

    def test_resume_extends_runs(self, tmp_path):
        bench.generate_ensemble(str(tmp_path), [16], 2, master_seed=3)
        bench.run_plan(make_plan(tmp_path, runs=3), str(tmp_path))
        stats = bench.run_plan(make_plan(tmp_path, runs=5), str(tmp_path))
        # only the 2 new runs per instance execute; old cells keep their seeds
        assert stats["executed"] == 2 * 2
        lines = (tmp_path / "logs" / "pt.jsonl").read_text().splitlines()
        keys = [tuple(json.loads(s)[k] for k in ("instance_id", "seed")) for s in lines]
        assert len(keys) == len(set(keys)) == 10

    def test_workers_identical_results(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            bench.generate_ensemble(str(d), [16], 2, master_seed=3)
        bench.run_plan(make_plan(a, runs=4), str(a), workers=1)
        bench.run_plan(make_plan(b, runs=4), str(b), workers=3)
        left = sorted((a / "logs" / "pt.jsonl").read_text().splitlines())
        right = sorted((b / "logs" / "pt.jsonl").read_text().splitlines())
        assert left == right

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            bench.generate_ensemble(str(d), [16], 2, master_seed=4)
            bench.run_plan(make_plan(d, runs=4), str(d), workers=1)
        assert ((a / "logs" / "pt.jsonl").read_bytes()
                == (b / "logs" / "pt.jsonl").read_bytes())

    def test_all_solvers_run(self, tmp_path):
        bench.generate_ensemble(str(tmp_path), [16], 1, master_seed=6)
        solvers = [
            {"solver_id": "pt", "params": {"num_replicas": 8, "max_steps": 20_000},
             "runs_per_instance": 2},
            {"solver_id": "dau", "params": {"num_replicas": 8, "max_steps": 500_000},
             "runs_per_instance": 2},
            {"solver_id": "sb", "params": {"dt": 0.25, "num_steps": 20_000},
             "runs_per_instance": 2},
            {"solver_id": "qg", "params": {"max_steps": 100_000},
             "runs_per_instance": 2},
        ]
        bench.run_plan(make_plan(tmp_path, solvers=solvers), str(tmp_path))
        for sid in ("pt", "dau", "sb", "qg"):
            lines = (tmp_path / "logs" / f"{sid}.jsonl").read_text().splitlines()
            assert len(lines) == 2, sid


class TestAnalysisHelpers:
    def test_fp_constant(self):
        f = bench.parse_fp_expr("4")
        assert f(32) == 4.0

    def test_fp_expression(self):
        f = bench.parse_fp_expr("floor(1024/n)")
        assert f(48) == 21.0

    def test_fp_forbidden_name(self):
        with pytest.raises(ValueError):
            bench.parse_fp_expr("__import__('os')")

    def test_fp_below_one(self):
        with pytest.raises(ValueError):
            bench.parse_fp_expr("floor(10/n)")(48)

    def test_grid_log(self):
        g = bench.parse_grid_spec("log:1:100:3")
        assert np.allclose(g, [1, 10, 100])

    def test_grid_list(self):
        assert np.allclose(bench.parse_grid_spec("5,10,20"), [5, 10, 20])


class TestAnalyze:
    def test_curves_and_exports(self, bench_dir):
        result = bench.analyze(str(bench_dir), [0.5], grid_spec="log:10:20000:8",
                               resamples=200)
        assert len(result["curves"]) == 1
        c = result["curves"][0]
        assert c["solver_id"] == "pt" and c["size"] == 16 and c["quantile"] == 0.5
        assert len(c["grid"]) == 8
        assert c["opt"]["tts"] <= min(g["tts_mean"] for g in c["grid"]) + 1e-12

        bench.write_analysis(result, str(bench_dir))
        adir = bench_dir / "analysis"
        curves = json.loads((adir / "curves.json").read_text())
        with open(adir / "curves.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == sum(len(c["grid"]) for c in curves)
        # CSV floats round-trip to exactly the JSON values
        for row, g in zip(rows, curves[0]["grid"]):
            assert float(row["t_f"]) == g["t_f"]
            assert float(row["tts_mean"]) == g["tts_mean"]
            assert float(row["tts_sigma"]) == g["tts_sigma"]

    def test_deterministic(self, bench_dir):
        a = bench.analyze(str(bench_dir), [0.5], grid_spec="log:10:20000:6",
                          resamples=100)
        b = bench.analyze(str(bench_dir), [0.5], grid_spec="log:10:20000:6",
                          resamples=100)
        assert a == b

    def test_too_few_sizes_reported_as_gap(self, bench_dir):
        result = bench.analyze(str(bench_dir), [0.5], grid_spec="log:10:20000:6",
                               resamples=100)
        assert any(g["reason"] == "too_few_sizes" for g in result["gaps"])
        assert result["fits"] == []


class TestCli:
    def test_gen_validate_roundtrip(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        assert cli.main(["gen", "--sizes", "16", "--count", "2",
                         "--seed", "4", "--out", out]) == cli.EXIT_OK
        assert cli.main(["validate", "--instances", out + "/instances"]) == cli.EXIT_OK
        assert "all checks passed" in capsys.readouterr().out

    def test_solve_analyze_export(self, tmp_path, capsys):
        out = tmp_path / "run"
        cli.main(["gen", "--sizes", "16", "--count", "2", "--seed", "4",
                  "--out", str(out)])
        plan_path = tmp_path / "plan.json"
        plan_path.write_text(json.dumps(make_plan(out, runs=3)))
        assert cli.main(["solve", "--plan", str(plan_path)]) == cli.EXIT_OK
        assert cli.main(["analyze", "--logs", str(out), "--quantiles", "0.5",
                         "--grid", "log:10:20000:6", "--resamples", "100"]) == cli.EXIT_OK
        csv_path = out / "analysis" / "curves.csv"
        before = csv_path.read_bytes()
        csv_path.unlink()
        assert cli.main(["export", "--analysis", str(out / "analysis")]) == cli.EXIT_OK
        assert csv_path.read_bytes() == before

    def test_validate_detects_corruption(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        cli.main(["gen", "--sizes", "16", "--count", "2", "--seed", "4", "--out", out])
        victim = sorted((tmp_path / "run" / "instances" / "n16").glob("*.json"))[0]
        victim.write_text(victim.read_text().replace('"m":8', '"m":8', 1))
        d = json.loads(victim.read_text())
        c = list(d["clauses"][0])
        c[3] ^= 1
        d["clauses"][0] = c
        victim.write_text(json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n")
        assert cli.main(["validate", "--instances", out + "/instances"]) == cli.EXIT_DATA

    def test_missing_plan_is_data_error(self, tmp_path):
        assert cli.main(["solve", "--plan", str(tmp_path / "nope.json")]) == cli.EXIT_DATA

    def test_bad_json_is_data_error(self, tmp_path):
        p = tmp_path / "plan.json"
        p.write_text("{not json")
        assert cli.main(["solve", "--plan", str(p)]) == cli.EXIT_DATA

    def test_usage_error(self):
        assert cli.main(["gen", "--count", "2"]) == cli.EXIT_USAGE
        assert cli.main([]) == cli.EXIT_USAGE

    def test_bad_fp_expression_is_data_error(self, bench_dir):
        assert cli.main(["analyze", "--logs", str(bench_dir),
                         "--fp", "__import__('os')"]) == cli.EXIT_DATA

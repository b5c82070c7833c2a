import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

sys.path.insert(0, os.environ["SPPA_MODULE_DIR"])

import sppa  # noqa: E402

BENCH = os.environ["BENCH_BIN"]


def test_soft_threshold_matches_numpy():
    rng = np.random.default_rng(0)
    v = rng.normal(size=40)
    expected = np.sign(v) * np.maximum(np.abs(v) - 0.3, 0.0)
    np.testing.assert_allclose(sppa.soft_threshold(v, 0.3), expected, atol=1e-15)


def test_project_simplex_is_a_projection():
    rng = np.random.default_rng(1)
    v = rng.normal(size=25)
    p = sppa.project_simplex(v)
    assert p.min() >= 0.0
    assert math.isclose(p.sum(), 1.0, abs_tol=1e-12)
    np.testing.assert_allclose(sppa.project_simplex(p), p, atol=1e-12)


def test_prox_least_squares_solves_the_normal_equations():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(5, 3))
    b = rng.normal(size=5)
    v = rng.normal(size=3)
    t = 0.7
    x = sppa.prox_least_squares(A, b, t, v)
    expected = np.linalg.solve(A.T @ A + np.eye(3) / t, A.T @ b + v / t)
    np.testing.assert_allclose(x, expected, atol=1e-10)


def test_schedule_values_and_validation():
    s = sppa.make_schedule("constant_index", 2.0)
    assert s.name == "constant_index"
    for k in range(6):
        assert math.isclose(s.A(k), k * (k + 1))
        assert math.isclose(s.a(k), 2.0 * (k + 1))
        assert math.isclose(s.b(k), k / 2.0)
        assert math.isclose(s.c(k), 2.0 * (k + 2))
    valid, first_violation, condition = sppa.validate_schedule(s, 200)
    assert valid
    assert first_violation == -1
    assert condition == ""


def test_run_experiment_summary_and_monitors():
    cfg = {"problem": "quadratic_l1", "n": 20, "seed": 3,
           "solver": "sppa_monotone", "iters": 200}
    summary = json.loads(sppa.run_experiment(json.dumps(cfg)))
    assert summary["problem"] == "quadratic_l1 0x20 seed 3"
    assert summary["guarantee_mode"] is True
    assert summary["monitors"]
    for name, mon in summary["monitors"].items():
        assert mon["pass"], name


def test_config_error_is_a_value_error():
    with pytest.raises(ValueError):
        sppa.run_experiment('{"volume": 11}')


def test_fit_slope_on_a_synthetic_trace():
    lines = ["k,metric,value"]
    for k in range(1, 101):
        lines.append(f"{k},residual_sq,{3.0 / (k * k):.17g}")
    slope = sppa.fit_slope("\n".join(lines) + "\n")
    assert math.isclose(slope, -2.0, abs_tol=1e-6)


def test_instance_reference_round_trip():
    text = sppa.gen_instance("quadratic_l1", 0, 12, 5)
    assert sppa.objective(text, np.zeros(12)) == 0.0
    xstar, fstar, certified = sppa.reference(text, 1000)
    assert certified <= 1e-12
    assert math.isclose(sppa.objective(text, xstar), fstar, rel_tol=1e-12)


# ---- CLI ----


def write_config(tmp_path, extra=None):
    cfg = {"problem": "quadratic_l1", "n": 20, "seed": 3,
           "solver": "sppa_monotone", "iters": 300}
    cfg.update(extra or {})
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def run_bench(args, env_extra=None):
    env = {k: v for k, v in os.environ.items() if k != "BENCH_SEED"}
    env.update(env_extra or {})
    return subprocess.run([BENCH] + args, capture_output=True, text=True, env=env)


def test_cli_run_writes_summary_and_trace(tmp_path):
    trace = tmp_path / "trace.csv"
    cfg = write_config(tmp_path, {"out": str(trace)})
    proc = run_bench(["run", "--config", str(cfg)])
    assert proc.returncode == 0, proc.stderr
    summary = json.loads(proc.stdout)
    assert summary["iters"] == 300
    assert summary["final_residual_sq"] >= 0.0
    header = trace.read_text().splitlines()[0]
    assert header == "k,metric,value"

    fit = run_bench(["slope", "--trace", str(trace)])
    assert fit.returncode == 0, fit.stderr
    float(fit.stdout.strip())


def test_cli_runs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    a = run_bench(["run", "--config", str(cfg)])
    b = run_bench(["run", "--config", str(cfg)])
    assert a.returncode == 0 and b.returncode == 0
    assert a.stdout == b.stdout


def test_cli_rejects_bad_configs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"volume": 11}')
    assert run_bench(["run", "--config", str(bad)]).returncode == 2
    assert run_bench(["run", "--config", str(tmp_path / "missing.json")]).returncode == 2
    assert run_bench(["run"]).returncode == 2


def test_cli_seed_env_override(tmp_path):
    cfg = write_config(tmp_path)
    proc = run_bench(["run", "--config", str(cfg)], {"BENCH_SEED": "7"})
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["problem"] == "quadratic_l1 0x20 seed 7"
    bad = run_bench(["run", "--config", str(cfg)], {"BENCH_SEED": "soon"})
    assert bad.returncode == 2


def test_cli_sweep_prints_one_summary_per_value(tmp_path):
    cfg = write_config(tmp_path, {"iters": 150})
    proc = run_bench(["sweep", "--config", str(cfg), "--param", "C",
                      "--values", "0.5,1"])
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.splitlines()
    summaries = [json.loads(line) for line in lines[:2]]
    assert {s["problem"] for s in summaries} == {"quadratic_l1 0x20 seed 3"}
    assert any("C" in line for line in lines[2:])

import json
import os
import subprocess
import sys

CLI = [sys.executable, "-m", "lensflow"]


def run_cli(args, cwd, env_extra=None):
    env = dict(os.environ, SOURCE_DATE_EPOCH="0")
    if env_extra:
        env.update(env_extra)
    return subprocess.run(CLI + args, cwd=cwd, env=env,
                          capture_output=True, text=True)


def test_critical_json(tmp_path):
    res = run_cli(["critical", "--out", str(tmp_path)], cwd=tmp_path)
    assert res.returncode == 0
    payload = json.loads((tmp_path / "critical_n2k1.json").read_text())
    assert payload["n"] == 2 and payload["k"] == 1
    assert abs(payload["c"] - 0.5276195198969628) < 1e-12
    assert payload["r1"] < payload["r2"]


def test_solve_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        res = run_cli(["solve", "--out", str(out), "--quiet"], cwd=tmp_path)
        assert res.returncode == 0
    assert (a / "profile_n2k1.csv").read_bytes() == (b / "profile_n2k1.csv").read_bytes()
    # manifests differ only in the --out path embedded in the command line
    ma = json.loads((a / "manifest_solve_n2k1.json").read_text())
    mb = json.loads((b / "manifest_solve_n2k1.json").read_text())
    ma.pop("command"), mb.pop("command")
    assert ma == mb


def test_flow_summary(tmp_path):
    res = run_cli(["flow", "--mode", "mcf", "--r0", "2.0",
                   "--out", str(tmp_path)], cwd=tmp_path)
    assert res.returncode == 0
    summary = json.loads((tmp_path / "flow_mcf_n2k1_r0_2_summary.json").read_text())
    assert summary["target"] == "S_infinity"
    assert abs(summary["T_prime_ode"] - summary["T_prime_quadrature"]) < 1e-6
    head = (tmp_path / "flow_mcf_n2k1_r0_2.csv").read_text().splitlines()[0]
    assert head == "t,sigma,R,h,lambda,A2"


def test_table1_markdown(tmp_path):
    res = run_cli(["table1", "--out", str(tmp_path), "--quiet"], cwd=tmp_path)
    assert res.returncode == 0
    md = (tmp_path / "table1_n2k1.md").read_text()
    assert "T' = T" in md and "T' = infinity" in md
    report = json.loads((tmp_path / "table1_n2k1.json").read_text())
    assert [row["rmcf"]["collapse_to"] for row in report["rows"]] == \
        ["S0", "S0", "S_infinity", "S_infinity", "S_infinity"]


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mode = mcf\nr0 = 2.0\nsamples = 16\n")
    res = run_cli(["flow", "--config", str(cfg), "--r0", "3.0",
                   "--out", str(tmp_path), "--quiet"], cwd=tmp_path)
    assert res.returncode == 0
    # flag beat the file for r0; the file supplied mode and samples
    summary = json.loads((tmp_path / "flow_mcf_n2k1_r0_3_summary.json").read_text())
    assert summary["r0"] == 3.0
    assert summary["samples"] == 16


def test_outdir_env_var(tmp_path):
    dest = tmp_path / "envout"
    res = run_cli(["critical", "--quiet"], cwd=tmp_path,
                  env_extra={"LENSFLOW_OUTDIR": str(dest)})
    assert res.returncode == 0
    assert (dest / "critical_n2k1.json").exists()


def test_plot_artifacts(tmp_path):
    res = run_cli(["plot", "--out", str(tmp_path), "--quiet"], cwd=tmp_path)
    assert res.returncode == 0
    for stem in ("lambda_n2k1", "normA2_n2k1", "trajectory_rmcf_n2k1"):
        assert (tmp_path / f"{stem}.png").stat().st_size > 0
        dat = (tmp_path / f"{stem}.dat").read_text().splitlines()
        assert len(dat) > 50  # sweeps carry 400 points, trajectories 64


def test_usage_errors(tmp_path):
    assert run_cli(["bogus"], cwd=tmp_path).returncode == 64
    assert run_cli(["flow", "--nope"], cwd=tmp_path).returncode == 64
    assert run_cli([], cwd=tmp_path).returncode == 64


def test_domain_error_exit_code(tmp_path):
    res = run_cli(["solve", "--n", "2", "--k", "5", "--out", str(tmp_path)],
                  cwd=tmp_path)
    assert res.returncode == 2
    assert "error" in res.stderr


def test_missing_r0_exit_code(tmp_path):
    res = run_cli(["flow", "--mode", "mcf", "--out", str(tmp_path)], cwd=tmp_path)
    assert res.returncode == 2


def test_json_log(tmp_path):
    res = run_cli(["critical", "--json", "--out", str(tmp_path)], cwd=tmp_path)
    assert res.returncode == 0
    manifest = json.loads(res.stdout)
    assert manifest["timestamp"] == "1970-01-01T00:00:00Z"
    assert "critical_n2k1.json" in manifest["outputs"]


def test_quiet_suppresses_listing(tmp_path):
    res = run_cli(["critical", "--quiet", "--out", str(tmp_path)], cwd=tmp_path)
    assert res.returncode == 0
    assert res.stdout == ""

import json
import os
import subprocess
import sys

import pytest

from spherelab.cli import main
from spherelab.reporting import (CSV_HEADER, ExperimentReport, config_hash,
                                 emit_plotdata, load_config, resolve_config)


def run_cli(args):
    return main(args)


def test_unknown_subcommand_exits_2(capsys):
    assert run_cli(["frobnicate"]) == 2
    capsys.readouterr()


def test_malformed_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[run\nseed=1")
    out = tmp_path / "out"
    code = run_cli(["kernel-diag", "--config", str(bad), "--out", str(out)])
    assert code == 2
    assert not out.exists() or not any(out.iterdir())
    capsys.readouterr()


def test_unknown_config_key_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nbananas = 7\n")
    assert run_cli(["kernel-diag", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_kernel_diag_run_and_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli(["kernel-diag", "--out", str(out)])
    assert code == 0
    assert (out / "manifest.json").exists()
    csv_path = out / "kernel-diag.csv"
    body = csv_path.read_text()
    assert body.splitlines()[0] == ",".join(CSV_HEADER)
    payload = json.loads((out / "kernel-diag.json").read_text())
    assert payload["verdict"] == "PASS"
    assert payload["provenance"]["seed"] == 20240817
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_hash"] == payload["provenance"]["config_hash"]
    captured = capsys.readouterr()
    assert "[PASS] kernel-diag" in captured.out


def test_reruns_are_byte_identical(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli(["kernel-diag", "--out", str(out1)]) == 0
    assert run_cli(["kernel-diag", "--out", str(out2)]) == 0
    assert (out1 / "kernel-diag.csv").read_bytes() == (out2 / "kernel-diag.csv").read_bytes()
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["config_hash"] == m2["config_hash"]
    capsys.readouterr()


def test_fail_verdict_exits_1(tmp_path, capsys):
    # a single-scale grid cannot support the order fit: honest FAIL
    code = run_cli(["kernel-diag", "--k-grid", "16", "--out", str(tmp_path / "o")])
    assert code == 1
    capsys.readouterr()


def test_manifest_written_before_failure(tmp_path, capsys):
    out = tmp_path / "o"
    run_cli(["kernel-diag", "--k-grid", "16", "--out", str(out)])
    assert (out / "manifest.json").exists()
    capsys.readouterr()


def test_emit_plotdata(tmp_path, capsys):
    out = tmp_path / "o"
    code = run_cli(["kernel-diag", "--out", str(out), "--emit-plotdata"])
    assert code == 0
    plots = sorted(p.name for p in out.glob("kernel-diag__*.csv"))
    assert plots == ["kernel-diag__beta-reeb.csv", "kernel-diag__diag-ratio.csv"]
    header = (out / plots[0]).read_text().splitlines()[0]
    assert header == "k,value,reference,error"
    capsys.readouterr()


def test_emit_plotdata_empty_report_warns(tmp_path):
    report = ExperimentReport("empty")
    with pytest.warns(UserWarning):
        paths = emit_plotdata(report, tmp_path)
    assert paths == []
    assert not list(tmp_path.glob("*.csv"))


def test_env_var_output_dir(tmp_path, capsys):
    env = dict(os.environ, SPHERELAB_OUT=str(tmp_path / "envout"),
               PYTHONPATH=os.pathsep.join(sys.path))
    proc = subprocess.run(
        [sys.executable, "-m", "spherelab.cli", "kernel-diag", "--k-grid", "16,32"],
        capture_output=True, text=True, env=env, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "envout" / "kernel-diag.csv").exists()


def test_all_smoke_run(tmp_path, capsys):
    # plumbing smoke: every experiment runs, reports and manifest land on
    # disk; statistical verdicts at this tiny scale are not asserted
    out = tmp_path / "all"
    code = run_cli(["all", "--k-grid", "16,32", "--trials", "100",
                    "--level", "10", "--out", str(out)])
    assert code in (0, 1)
    assert (out / "manifest.json").exists()
    for name in ["kernel-diag", "embed-check", "lp-closed", "lp-boundary",
                 "expectation-cr", "equi-cr", "variance-cr", "equi-domain",
                 "expectation-domain"]:
        assert (out / f"{name}.csv").exists(), name
        assert (out / f"{name}.json").exists(), name
    capsys.readouterr()


def test_config_file_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[grid]\nk_grid = 16,32\n\n[run]\nseed = 7\n")
    parser = load_config(cfg)
    resolved = resolve_config(parser)
    assert resolved["grid.k_grid"] == "16,32"
    assert resolved["run.seed"] == "7"
    h1 = config_hash(resolved)
    assert h1 == config_hash(resolve_config(load_config(cfg)))
    out = tmp_path / "out"
    assert run_cli(["kernel-diag", "--config", str(cfg), "--out", str(out)]) == 0
    capsys.readouterr()

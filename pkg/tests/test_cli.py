"""CLI tests: parsing, JSON reports, exit codes, determinism."""

import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from zakbench.cli import CommandError, CommandSpec, main, parse_command, run

F = Fraction


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "zakbench", *args],
        capture_output=True, text=True, timeout=300,
    )
    return proc


def test_parse_rejects_misaligned_sample_rate():
    with pytest.raises(CommandError, match="721 not divisible by 6"):
        parse_command(["invariance", "--window", "example1", "--Q", "1",
                       "--P", "3", "--N", "721", "--L", "64",
                       "--shift", "1/2,0"])


def test_parse_rejects_misaligned_omega_resolution():
    with pytest.raises(CommandError, match="not divisible by 3"):
        parse_command(["zak", "--window", "chi", "--N", "48", "--L", "16",
                       "--shift", "0,1/3"])


def test_parse_rejects_malformed_rational():
    with pytest.raises(CommandError, match="malformed"):
        parse_command(["zak", "--window", "chi", "--shift", "0.5;0"])


def test_parse_rejects_unknown_window():
    with pytest.raises(CommandError, match="unknown window"):
        parse_command(["zak", "--window", "mystery"])


def test_parse_requires_lattice_for_bounds():
    with pytest.raises(CommandError, match="lattice"):
        parse_command(["bounds", "--window", "chi", "--N", "48"])


def test_command_spec_json_round_trip():
    spec = parse_command(["invariance", "--window", "example1", "--Q", "1",
                          "--P", "3", "--N", "720", "--L", "64",
                          "--shift", "1/2,0", "--certificates"])
    assert spec.shift_u == F(1, 2)
    assert CommandSpec.from_json(spec.to_json()) == spec


def test_zak_report_structure(tmp_path):
    out = os.fspath(tmp_path / "report.json")
    csv = os.fspath(tmp_path / "grid.csv")
    spec = parse_command(["zak", "--window", "chi", "--N", "48", "--L", "16",
                          "--shift", "1/2,1/4", "--csv", csv, "--out", out])
    doc = run(spec)
    assert doc.exit_code == 0
    report = json.loads(open(out).read())
    assert report["schema"] == "zakbench/1"
    assert report["results"]["unitarity_defect"] == 0.0
    assert report["results"]["covariance_defect"] == 0.0
    assert report["command"]["shift_u"] == "1/2"
    lines = open(csv).read().splitlines()
    assert lines[0] == "x,omega,re,im"
    assert len(lines) == 1 + 48 * 16


def test_invariance_report_residual():
    spec = parse_command(["invariance", "--window", "example1", "--Q", "1",
                          "--P", "3", "--N", "48", "--L", "16",
                          "--shift", "1/2,0"])
    doc = run(spec)
    assert doc.results["residual"] == pytest.approx(4 / 9, abs=1e-12)
    assert doc.results["member"] is False


def test_bounds_via_alpha_beta():
    spec = parse_command(["bounds", "--window", "gaussian", "--N", "240",
                          "--L", "20", "--alpha", "1", "--beta", "3/2"])
    doc = run(spec)
    assert doc.results["lattice"] == {"Q": 2, "P": 3, "density": "2/3"}
    assert 0.0 < doc.results["lower"] < doc.results["upper"]


def test_reports_are_deterministic():
    args = ["invariance", "--window", "example1-corrected", "--Q", "1",
            "--P", "3", "--N", "48", "--L", "16", "--shift", "1/2,0",
            "--certificates"]
    a = run(parse_command(args)).to_json(include_timing=False)
    b = run(parse_command(args)).to_json(include_timing=False)
    assert a == b
    assert "timing" not in a


def test_construct_report():
    spec = parse_command(["construct", "--spec", "corrected", "--N", "48",
                          "--L", "16"])
    doc = run(spec)
    assert doc.exit_code == 0
    assert doc.results["shift_recursion_defect"] == 0.0
    assert doc.results["measured_support"] == ["1/6", "3/2"]


def test_cli_error_exit_code_is_2():
    proc = run_cli("invariance", "--window", "example1", "--Q", "1",
                   "--P", "3", "--N", "721", "--L", "64", "--shift", "1/2,0")
    assert proc.returncode == 2
    assert "721 not divisible by 6" in proc.stderr
    assert proc.stdout == ""


def test_cli_certify_exit_codes():
    ok = run_cli("certify", "--window", "chi", "--Q", "1", "--P", "1",
                 "--N", "48", "--L", "16", "--shift", "0,1", "--sign", "+1")
    assert ok.returncode == 0
    assert json.loads(ok.stdout)["results"]["status"] == "certified"
    bad = run_cli("certify", "--window", "chi", "--Q", "1", "--P", "1",
                  "--N", "48", "--L", "16", "--shift", "0,1", "--sign", "-1")
    assert bad.returncode == 3
    assert json.loads(bad.stdout)["results"]["divisibility"]["passed"] is False


def test_cli_spread_smoke():
    proc = run_cli("spread", "--window", "gaussian", "--N", "240", "--L", "20",
                   "--pad", "4")
    assert proc.returncode == 0
    results = json.loads(proc.stdout)["results"]
    assert results["product"] == pytest.approx(1 / (16 * 3.14159265358979**2),
                                               abs=1e-5)


def test_cli_threads_env(tmp_path):
    env = dict(os.environ, ZAKBENCH_THREADS="1")
    proc = subprocess.run(
        [sys.executable, "-m", "zakbench", "zak", "--window", "chi",
         "--N", "48", "--L", "16"],
        capture_output=True, text=True, env=env, timeout=300,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["provenance"]["threads_cap"] == "1"


def test_cli_rejects_bad_threads_env():
    env = dict(os.environ, ZAKBENCH_THREADS="zero")
    proc = subprocess.run(
        [sys.executable, "-m", "zakbench", "zak", "--window", "chi",
         "--N", "48", "--L", "16"],
        capture_output=True, text=True, env=env, timeout=300,
    )
    assert proc.returncode == 2
    assert "ZAKBENCH_THREADS" in proc.stderr


def test_main_returns_2_on_command_error():
    assert main(["zak", "--window", "nope"]) == 2


def test_window_spec_file_input(tmp_path):
    from zakbench.constructions import WindowSpec

    path = tmp_path / "w.json"
    path.write_text(WindowSpec("bspline", 48, order=2).to_json())
    spec = parse_command(["zak", "--window", f"@{path}", "--N", "48",
                          "--L", "16"])
    doc = run(spec)
    assert doc.results["exact_path"] is True
    # The hat vanishes at its endpoints, so the first nonzero sample sits
    # one grid step inside the analytic support [0, 2].
    assert doc.results["measured_support"] == ["1/48", "2"]

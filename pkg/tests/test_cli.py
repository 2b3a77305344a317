import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from harnack_fde import __version__
from harnack_fde.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_json_and_rerun(capsys, tmp_path):
    argv = ["constants", "--d", "3", "--m", "0.8333333333333334", "-o", str(tmp_path / "a.json")]
    assert main(argv) == EXIT_OK
    first = (tmp_path / "a.json").read_bytes()
    obj = json.loads(first)
    assert obj["invocation"] == {"program": "harnack-fde", "version": __version__, "argv": argv}
    # replaying the recorded argv reproduces the artifact byte for byte
    assert main(obj["invocation"]["argv"]) == EXIT_OK
    assert (tmp_path / "a.json").read_bytes() == first


def test_constants_csv(capsys):
    code, out, _ = run(["constants", "--d", "2", "--m", "0.75", "--format", "csv"], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {"kbar", "sigma", "A_d"} <= {r["name"] for r in rows}


def test_tstar(capsys):
    code, out, _ = run(["tstar", "--d", "3", "--m", "0.8333333333333334", "--eps", "1e-4",
                        "--A", "1", "--G", "2", "--M-over", "10"], capsys)
    assert code == EXIT_OK
    obj = json.loads(out)
    t = next(e for e in obj["entries"] if e["name"] == "t_star")
    assert t["value"]["level"] == 2 and t["configured"]
    again = run(["tstar", "--d", "3", "--m", "0.8333333333333334", "--eps", "1e-4",
                 "--A", "1", "--G", "2", "--M-over", "10"], capsys)[1]
    assert again == out


def test_sigma_and_gn(capsys):
    code, out, _ = run(["sigma", "--d", "2"], capsys)
    assert code == EXIT_OK and json.loads(out)["value"] > 0
    code, out, _ = run(["gn-disk"], capsys)
    obj = json.loads(out)
    assert code == EXIT_OK and abs(obj["a_star"] - 7.52449) < 1e-3
    code, out, _ = run(["gn-disk", "--sweep", "6", "9", "4", "--format", "csv"], capsys)
    assert code == EXIT_OK and out.splitlines()[0] == "a,s" and len(out.splitlines()) == 5


def test_simulate(capsys, tmp_path):
    code, out, _ = run(["simulate", "--config", str(CONFIGS / "barenblatt_d3.json"),
                        "--snapshot-dir", str(tmp_path)], capsys)
    assert code == EXIT_OK
    obj = json.loads(out)
    assert max(obj["barenblatt_linf_relative_error"]) <= 0.01
    assert obj["relative_mass_drift"] <= 1e-6
    assert len(list(tmp_path.glob("snapshot_t*.csv"))) == len(obj["times"])


def test_verify_pass_and_fail(capsys, tmp_path):
    code, out, err = run(["verify", "--suite", "truncation", "--config",
                          str(CONFIGS / "verify_suite.json")], capsys)
    assert code == EXIT_OK and json.loads(out)["passed"] and err == ""
    # an entropy case outside the tube of its claimed target must fail, not crash
    bad = {"entropy": [], "truncation": [], "scenarios": [{
        "name": "forced failure", "d": 3, "m": 0.8333333333333334,
        "grid": {"r_max": 20.0, "N": 200}, "times": [0.1], "t_end": 0.1,
        "initial": {"type": "indicator", "params": {"radius": 1.0}},
        "checks": {"local_upper": [{"R": 1.0, "t": 0.1}]}}]}
    import harnack_fde.suites as suites
    real = suites.local_constants

    def tiny(d, m):
        kbar, kappa, kstar = real(d, m)
        return 1e-9, kappa, kstar
    suites.local_constants = tiny
    try:
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(bad))
        code, out, err = run(["verify", "--suite", "bounds", "--config", str(p)], capsys)
    finally:
        suites.local_constants = real
    assert code == EXIT_FAIL and "FAIL local_upper" in err
    assert not json.loads(out)["passed"]


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["constants", "--d", "3"],
    ["constants", "--d", "3", "--m", "0.2"],
    ["constants", "--d", "0", "--m", "0.5"],
    ["tstar", "--d", "3", "--m", "0.8333333333333334", "--eps", "0.5"],
    ["tstar", "--d", "8", "--m", "0.95", "--eps", "1e-4"],
    ["tstar", "--d", "3", "--m", "0.9", "--eps", "1e-4", "--C-over", "0.5"],
    ["simulate", "--config", "/nonexistent.json"],
    ["verify", "--suite", "nope", "--config", "x.json"],
    ["sigma", "--d", "2", "--format", "csv"],
])
def test_usage_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == EXIT_USAGE
    assert out == ""


def test_version_and_module_entry():
    proc = subprocess.run([sys.executable, "-m", "harnack_fde", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == __version__
    proc = subprocess.run([sys.executable, "-m", "harnack_fde", "sigma"], capture_output=True,
                          text=True)
    assert proc.returncode == EXIT_USAGE

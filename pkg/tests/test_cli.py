import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qmetropolis.cli import main, parse_beta, parse_mode, parse_range


def run(args, capsys):
    code = main(args)
    return code, capsys.readouterr()


def test_parsers():
    assert math.isinf(parse_beta("inf"))
    assert parse_beta("0.5") == 0.5
    assert parse_mode("median:5") == ("median", 5)
    assert parse_mode("realistic")[0] == "realistic"
    assert parse_range("2-6") == [2, 3, 4, 5, 6]
    assert parse_range("4") == [4]


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["gap-scan"],
    ["gap-scan", "--g", "0.5", "--n", "6-2"],
    ["pe-hist", "--phase", "1.5"],
    ["verify", "nope"],
    ["run", "--ham", "xx"],
    ["run", "--beta", "-1"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _ = run(argv, capsys)
    assert code == 2


@pytest.mark.parametrize("suite", ["db", "jordan", "pe", "jw", "pfail"])
def test_verify_suites_pass(suite, capsys):
    code, out = run(["verify", suite, "--seed", "1"], capsys)
    assert code == 0
    report = json.loads(out.out)
    assert report["passed"] is True and report["suite"] == suite


def test_gap_scan_small(tmp_path, capsys):
    path = tmp_path / "gap.csv"
    code, _ = run(["gap-scan", "--n", "2-3", "--g", "0.5", "--beta", "inf", "--out", str(path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert [r["N"] for r in rows] == ["2", "3"]
    assert float(rows[0]["inverse_gap"]) == pytest.approx(2.0)
    assert float(rows[1]["inverse_gap"]) == pytest.approx(4.0)
    assert set(rows[0]) == {"N", "gap", "inverse_gap", "dim", "mode", "truncation_tail"}
    manifest = json.loads((tmp_path / "gap.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "gap-scan"
    assert manifest["seed"] == 0
    assert manifest["config"]["beta"] == "inf"
    assert {"version", "started", "finished", "outputs"} <= set(manifest)


def test_gap_scan_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["gap-scan", "--n", "2-4", "--g", "0.3", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_is_deterministic(tmp_path, capsys):
    outs = []
    for name in ("x", "y"):
        p = tmp_path / f"{name}.json"
        traj = tmp_path / f"{name}.csv"
        argv = ["run", "--ham", "h2", "--r", "1", "--beta", "1", "--m", "300", "--seed", "9",
                "--out", str(p), "--trajectory", str(traj)]
        assert main(argv) == 0
        outs.append((p.read_bytes(), traj.read_bytes()))
    assert outs[0] == outs[1]
    data = json.loads(outs[0][0])
    assert data["estimates"][0]["m"] == 300
    header = outs[0][1].decode().splitlines()[0]
    assert header == "step,level_or_hash,energy_bin,outcome,n_reject_used"


def test_pe_hist(capsys):
    code, out = run(["pe-hist", "--phase", "2.5", "--r", "3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.out)))
    probs = [float(r["probability"]) for r in rows]
    assert len(probs) == 8 and sum(probs) == pytest.approx(1.0)
    assert probs[2] == pytest.approx(probs[3])
    code, out = run(["pe-hist", "--phase", "2.5", "--r", "3", "--mode", "median:5"], capsys)
    assert code == 0


def test_channel_report(capsys):
    code, out = run(["channel", "--ham", "h2", "--r", "1", "--beta", "inf"], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert rep["beta"] == "inf"
    assert rep["gibbs_distance"] < 1e-8


def test_hamiltonian_file(tmp_path, capsys):
    from qmetropolis.hamiltonians import build_xx_chain

    path = tmp_path / "h.json"
    build_xx_chain(2, 0.5).save(path)
    code, out = run(["channel", "--ham", str(path), "--beta", "1", "--updates", "x1"], capsys)
    assert code == 0
    assert json.loads(out.out)["d"] == 4


def test_demo_heisenberg(capsys):
    code, out = run(["demo-heisenberg", "--m", "2000", "--seed", "3"], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert abs(rep["z_score"]) < 4
    assert rep["gibbs_prediction"] == pytest.approx(math.exp(-2) / (3 + math.exp(-2)))


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qmetropolis.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.1.0"

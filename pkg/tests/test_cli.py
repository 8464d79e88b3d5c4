from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qent.cli import main

HEADER = "t,channel,N_max,regression_slope,last_ratio,fekete_upper,truncated"
CYCLIC = str(Path(__file__).parent / "data" / "cyclic.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_entropy_csv(capsys):
    code, out, _ = run(capsys, "entropy", "--quiver", "a2", "--functor", "nu", "--generator", "P1+P2",
                       "--channels", "hom_A", "--tmin", "0", "--tmax", "1", "--tstep", "0.5", "--nmax", "24")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == HEADER
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["t"]) for r in rows] == [0.0, 0.5, 1.0]
    for r in rows:
        assert abs(float(r["regression_slope"]) - float(r["t"]) / 3) < 0.02
        assert r["truncated"] == "false" and r["N_max"] == "24"


def test_entropy_sigma_exact(capsys):
    code, out, _ = run(capsys, "entropy", "--quiver", "a3", "--functor", "Sigma", "--channels", "delta_hat,hom_A",
                       "--tmin", "-1", "--tmax", "1", "--tstep", "1", "--nmax", "6")
    assert code == 0
    for r in csv.DictReader(io.StringIO(out)):
        assert float(r["regression_slope"]) == pytest.approx(float(r["t"]), abs=1e-12)


def test_entropy_json_mirrors_csv(capsys):
    args = ["entropy", "--quiver", "a2", "--functor", "nu", "--tmin", "0", "--tmax", "0.5", "--nmax", "30"]
    _, csv_out, _ = run(capsys, *args)
    code, json_out, _ = run(capsys, *args, "--format", "json")
    assert code == 0
    data = json.loads(json_out)
    csv_rows = list(csv.DictReader(io.StringIO(csv_out)))
    assert len(data["rows"]) == len(csv_rows)
    for rec, row in zip(data["rows"], csv_rows):
        assert set(HEADER.split(",")) <= set(rec)
        assert rec["channel"] == row["channel"]
        assert rec["N_max"] == int(row["N_max"])
        assert rec["regression_slope"] == pytest.approx(float(row["regression_slope"]))
        assert len(rec["a"]) == rec["N_max"]
        assert all(v > 0 for v in rec["a"])


def test_byte_identical_outputs(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["entropy", "--quiver", "a3", "--functor", "nu * Sigma", "--tmin", "-1", "--tmax", "1",
                     "--nmax", "6", "--seed", "3", "-o", str(p)]) in (0, 2)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_tolerance_warning_exit_2(capsys):
    code, out, err = run(capsys, "entropy", "--quiver", "a3", "--functor", "nu", "--tmin", "0.5", "--tmax", "0.5",
                         "--nmax", "8", "--tolerance", "1e-9")
    assert code == 2
    assert out.startswith(HEADER) and "disagree" in err


def test_malformed_functor_exit_1(capsys):
    code, out, err = run(capsys, "entropy", "--quiver", "a2", "--functor", "nu ** 2")
    assert code == 1 and out == ""
    assert "ParseError" in err and "column" in err


def test_usage_error_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["entropy", "--quiver", "a2"])
    assert info.value.code == 1


@pytest.mark.parametrize("argv", [
    ["entropy", "--quiver", "a2", "--functor", "nu", "--tmin", "1", "--tmax", "0"],
    ["entropy", "--quiver", "a2", "--functor", "nu", "--nmax", "1"],
    ["entropy", "--quiver", "a2", "--functor", "nu", "--channels", "bogus"],
    ["entropy", "--quiver", "missing.json", "--functor", "nu"],
    ["filtration", "--quiver", "a2", "--object", "P9"],
])
def test_bad_config_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "qent: error" in err


def test_filtration_examples(capsys):
    _, out, _ = run(capsys, "filtration", "--quiver", "a2", "--object", "S1", "--kind", "t")
    assert [e["weight"] for e in json.loads(out)["entries"]] == [1]
    _, out, _ = run(capsys, "filtration", "--quiver", "a2", "--object", "S1", "--kind", "cot")
    assert [e["weight"] for e in json.loads(out)["entries"]] == [1, 1]
    _, out, _ = run(capsys, "filtration", "--quiver", "a2", "--object", "P1[3]", "--kind", "t")
    assert json.loads(out)["entries"] == [{"degree": 3, "weight": 2}]


def test_delta_command(capsys):
    code, out, _ = run(capsys, "delta", "--quiver", "a2", "--object", "P1+P2", "--t", "0", "1")
    assert code == 0
    vals = json.loads(out)["values"]
    assert vals[0]["delta_hat"] == pytest.approx(3) and vals[1]["delta_check"] == pytest.approx(2)
    assert all(v["delta_check"] >= v["delta_check_lower"] for v in vals)


def test_duality_command(capsys):
    code, out, _ = run(capsys, "duality", "--quiver", "a2", "--functor", "nu", "--tmin", "-1", "--tmax", "1", "--nmax", "30")
    assert code == 0
    assert out.splitlines()[0] == "t,h_A,h_B_inverse_at_minus_t,gap,exact_A,exact_B"
    code, _, err = run(capsys, "duality", "--quiver", "a2", "--functor", "T[S1]")
    assert code == 1 and "NonInvertibleFunctor" in err


@pytest.mark.parametrize("name", ["a2", "kronecker"])
def test_check_passes(capsys, name):
    code, out, _ = run(capsys, "check", "--quiver", name, "--samples", "10")
    assert code == 0, out


def test_check_cyclic_quiver(capsys):
    code, _, err = run(capsys, "check", "--quiver", CYCLIC)
    assert code == 1 and "CycleDetected" in err


def run_module(*argv, env=None):
    return subprocess.run([sys.executable, "-m", "qent", *argv], capture_output=True, text=True,
                          env={**os.environ, **(env or {})})


def test_prime_env_var():
    args = ("entropy", "--quiver", "a2", "--functor", "nu", "--nmax", "30", "--format", "json")
    proc = run_module(*args, env={"QENT_PRIME": "1000033"})
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["field"].endswith("1000033")
    proc = run_module(*args, env={"QENT_PRIME": "12"})
    assert proc.returncode == 1 and "qent: error" in proc.stderr


def test_rational_mode(capsys):
    code, out, _ = run(capsys, "entropy", "--quiver", "a2_rational", "--functor", "nu", "--nmax", "30", "--format", "json")
    assert code == 0
    assert json.loads(out)["field"] == "Q"

import csv
import io
import json
import subprocess
import sys

import numpy as np
from scipy.integrate import trapezoid
import pytest

from mrsolve.cli import main

PINNED = ["--m", "1", "--alpha", "0.1", "--q", "1", "--v1", "0.5", "--v2", "-0.2"]
BINDING = ["--m", "1", "--alpha", "0.1", "--q", "1", "--v1", "0.02", "--v2", "-0.2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_binding(capsys):
    code, out, _ = run(capsys, "spectrum", *BINDING, "--levels", "3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1
    assert list(doc) == ["schema", "parameters", "mode", "beta2_convention", "levels"]
    assert list(doc["levels"][0]) == ["n", "E", "epsilon2", "gamma", "c", "provenance", "residual"]
    assert [lv["n"] for lv in doc["levels"]] == [0, 1, 2]
    assert doc["levels"][0]["E"] == pytest.approx(0.2917843792497508, rel=1e-12)


def test_spectrum_pinned_is_empty(capsys):
    code, out, _ = run(capsys, "spectrum", *PINNED, "--levels", "3")
    assert code == 2 and json.loads(out)["levels"] == []


def test_bad_q(capsys):
    code, out, err = run(capsys, "spectrum", "--q", "0")
    assert code == 1 and out == ""
    assert "q out of range" in json.loads(err)["error"]["message"]


def test_unknown_flag(capsys):
    code, _, err = run(capsys, "spectrum", "--bogus", "1")
    assert code == 1 and json.loads(err)["error"]["type"] == "UsageError"


def test_determinism(capsys):
    a = run(capsys, "spectrum", *BINDING, "--mode", "symbolic-aim")[1]
    b = run(capsys, "spectrum", *BINDING, "--mode", "symbolic-aim")[1]
    assert a == b and '"provenance": "symbolic-aim"' in a


def test_wavefunction_csv(capsys, tmp_path):
    out = tmp_path / "psi.csv"
    code, _, _ = run(capsys, "wavefunction", *BINDING, "--n", "1", "--samples", "512", "--out", str(out))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["x", "s", "psi", "psi_normalized"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (512, 4)
    assert np.all(np.diff(data[:, 0]) > 0) and np.all(np.diff(data[:, 1]) < 0)
    assert trapezoid(data[:, 3] ** 2, data[:, 0]) == pytest.approx(1.0, abs=1e-3)


def test_wavefunction_json_and_missing_level(capsys):
    code, out, _ = run(capsys, "wavefunction", *BINDING, "--n", "0", "--samples", "4", "--format", "json")
    assert code == 0 and len(json.loads(out)["samples"]) == 4
    code, out, err = run(capsys, "wavefunction", *BINDING, "--n", "9")
    assert code == 2 and json.loads(err)["error"]["type"] == "MissingLevel"


def test_preset_matches_general(capsys):
    _, a, _ = run(capsys, "preset", "rosen-morse", "--v1", "0.05", "--v2", "0.01", "--alpha", "0.1")
    _, b, _ = run(capsys, "spectrum", "--q", "-1", "--v1", "-0.05", "--v2", "0.01", "--alpha", "0.1")
    da, db = json.loads(a), json.loads(b)
    assert da["levels"] == db["levels"] and da["levels"]
    assert da["preset"]["name"] == "rosen-morse" and da["parameters"] == db["parameters"]
    _, a, _ = run(capsys, "preset", "eckart", "--v1", "0.02", "--v2", "0.2", "--alpha", "0.1")
    _, b, _ = run(capsys, "spectrum", *BINDING)
    assert json.loads(a)["levels"] == json.loads(b)["levels"]


def test_preset_errors(capsys):
    code, _, err = run(capsys, "preset", "poschl-teller", "--v2", "0.1")
    assert code == 1 and "V2 = 0" in err
    code, _, err = run(capsys, "preset", "morse")
    assert code == 1


def test_verify_default_and_printed(capsys):
    code, out, _ = run(capsys, "verify")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    code, out, _ = run(capsys, "verify", "--beta2-convention", "printed")
    doc = json.loads(out)
    assert code == 3
    oracle = next(c for c in doc["checks"] if c["name"] == "spectrum-vs-oracle")
    assert not oracle["passed"]
    assert min(r["relative_error"] for r in oracle["levels"]) > 10 * oracle["tolerance"]


def test_verify_preset_subset(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "poschl-teller")
    doc = json.loads(out)
    assert code == 0 and [c["name"] for c in doc["checks"]] == ["preset-identity-poschl-teller"]


def test_thread_cap(capsys, monkeypatch):
    monkeypatch.setenv("MR_SOLVE_THREADS", "1")
    code, out, _ = run(capsys, "spectrum", *BINDING, "--levels", "5")
    assert code == 0 and len(json.loads(out)["levels"]) == 3


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mrsolve.cli", "spectrum", *PINNED],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2

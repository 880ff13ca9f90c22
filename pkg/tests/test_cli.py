import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hyperinfo.cli import alpha_grid, lambda_grid, main

CAP_QUARTER = 0.18872187554086717


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"dict": "n=1\n10\n", "one": "n=2\n1111\n", "maj3": "n=3\n11101000\n",
                       "parity3": "n=3\n10010110\n", "bad_len": "n=2\n101\n", "bad_head": "x\n10\n"}.items():
        paths[name] = tmp_path / f"{name}.txt"
        paths[name].write_text(text)
    return paths


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_mi_dictator(files, capsys):
    code, out, _ = run(["mi", files["dict"], "--alpha", "0.25"], capsys)
    assert code == 0
    d = json.loads(out)
    assert abs(d["total_mi"] - CAP_QUARTER) < 1e-12
    assert abs(d["sum_coord_mi"] - CAP_QUARTER) < 1e-12


def test_mi_csv(files, capsys):
    code, out, _ = run(["mi", files["maj3"], "--alpha", "0.1", "--format", "csv"], capsys)
    rows = dict(csv.reader(io.StringIO(out)))
    assert code == 0 and rows["quantity"] == "value" and float(rows["z_2"]) == 0.5


def test_spectrum_constant(files, capsys):
    code, out, _ = run(["spectrum", files["one"]], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["mask", "coeff"]
    assert [r for r in rows[1:] if float(r[1]) != 0.0] == [["0", "1"]]
    code, out, _ = run(["spectrum", files["one"], "--format", "json"], capsys)
    assert json.loads(out)["coeffs"] == [1.0, 0.0, 0.0, 0.0]


def test_verify_thm2_n3(capsys):
    code, out, _ = run(["verify-thm2", "--n", "3", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 10
    assert all(float(r["margin"]) >= 0.0 for r in rows)


def test_verify_ck_json(capsys):
    code, out, _ = run(["verify-ck", "--n", "2", "--alpha-grid", "0.1:0.3:0.1"], capsys)
    d = json.loads(out)
    assert code == 0 and d["alpha_grid"] == [0.1, 0.2, 0.3] and d["violation_count"] == 0


def test_compress(files, tmp_path, capsys):
    final = tmp_path / "final.txt"
    code, out, _ = run(["compress", files["parity3"], "--alpha", "0.2", "--final", final], capsys)
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and recs and all(r["L_after"] >= r["L_before"] - 1e-12 for r in recs)
    assert final.read_text().startswith("n=3\n")


def test_oq1_curves(capsys):
    code, out, _ = run(["oq1-curves", "--k-points", "5", "--rho-grid", "0.1:0.9:0.4"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 15
    assert all(float(r["margin_vs_M1"]) >= -1e-12 for r in rows)
    code, out, _ = run(["oq1-curves", "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["passed"] is True


def test_highnoise_scan(capsys):
    argv = ["highnoise-scan", "--family", "maj3", "--lambda-grid", "log:1e-3:1e-1:6"]
    code, out, _ = run(argv, capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows and set(rows[0]) == {"lambda", "quantity", "value"}
    assert rows[0]["quantity"].startswith("maj3:")
    code, out, _ = run(argv + ["--format", "json"], capsys)
    fits = {f["quantity"]: f for f in json.loads(out)["fits"]}
    assert abs(fits["maj3:ez2_minus_lambda_l1"]["slope"] - 3) < 0.1
    assert set(fits["maj3:ez4"]) == {"quantity", "slope", "intercept", "r2", "n_points", "window"}


def test_thresholds(capsys):
    code, out, _ = run(["thresholds"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 26
    assert all(float(r["ratio"]) < 1 for r in rows)
    code, out, _ = run(["thresholds", "--format", "json"], capsys)
    assert json.loads(out)["ratio_below_one"] is True


def test_concentration(capsys):
    code, out, _ = run(["concentration", "--n", "3", "--alpha", "0.25", "--tau", "0.5"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) >= 2
    assert list(rows[0]) == ["class_id", "table", "orbit_size", "mu", "mi", "xi", "xi_over_lambda"]


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["mi", "--alpha", "0.25"],
    ["verify-ck", "--n", "0"],
    ["verify-ck", "--n", "7"],
    ["verify-ck", "--n", "2", "--alpha-grid", "0.3:0.1:0.1"],
    ["thresholds", "--lambda-grid", "log:0.1:0.01:5"],
    ["concentration", "--n", "5", "--alpha", "0.2"],
    ["concentration", "--n", "3", "--alpha", "0.2", "--tau", "2"],
    ["highnoise-scan", "--family", "nope"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err


def test_malformed_files(files, tmp_path, capsys):
    out = tmp_path / "o.json"
    for name in ("bad_len", "bad_head"):
        code, _, err = run(["mi", files[name], "--alpha", "0.2", "--out", out], capsys)
        assert code == 2 and "hyperinfo mi" in err
    code, _, _ = run(["spectrum", tmp_path / "missing.txt", "--out", out], capsys)
    assert code == 2
    assert not out.exists()
    code, _, _ = run(["mi", files["dict"], "--alpha", "0.7"], capsys)
    assert code == 2


def test_resource_guard(capsys):
    code, _, err = run(["verify-thm2", "--n", "5"], capsys)
    assert code == 3 and "resource guard" in err


def test_checkpoint_error(tmp_path, capsys):
    ck = tmp_path / "ck.json"
    ck.write_text("garbage")
    out = tmp_path / "r.json"
    code, _, err = run(["verify-ck", "--n", "2", "--checkpoint", ck, "--out", out], capsys)
    assert code == 4 and "checkpoint" in err and not out.exists()


def test_checkpoint_resume_identical(tmp_path, capsys):
    ck, a, b = tmp_path / "ck.json", tmp_path / "a.json", tmp_path / "b.json"
    run(["verify-thm2", "--n", "3", "--out", a], capsys)
    run(["verify-thm2", "--n", "3", "--checkpoint", ck, "--checkpoint-every", "3", "--shards", "2", "--out", b],
        capsys)
    assert a.read_bytes() == b.read_bytes()
    # rerun resumes from the finished checkpoint
    run(["verify-thm2", "--n", "3", "--checkpoint", ck, "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_outputs_deterministic(tmp_path, capsys):
    for argv in (["highnoise-scan", "--lambda-grid", "log:1e-2:1e-1:4", "--seed", "5"],
                 ["verify-ck", "--n", "3"], ["thresholds"]):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(argv + ["--out", a], capsys)[0] == 0
        assert run(argv + ["--out", b], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()


def test_seed_changes_random_family(tmp_path, capsys):
    base = ["highnoise-scan", "--family", "random5", "--lambda-grid", "log:1e-2:1e-1:4"]
    _, x, _ = run(base + ["--seed", "1"], capsys)
    _, y, _ = run(base + ["--seed", "2"], capsys)
    assert x != y


def test_grid_parsers():
    assert alpha_grid("0.05:0.45:0.05") == tuple(round(0.05 * k, 12) for k in range(1, 10))
    assert alpha_grid("0.1,0.2") == (0.1, 0.2)
    g = lambda_grid("log:1e-3:1e-1:3")
    assert np.allclose(g, [1e-3, 1e-2, 1e-1])
    assert np.allclose(lambda_grid("lin:0.1:0.3:3"), [0.1, 0.2, 0.3])


def test_console_module(files):
    res = subprocess.run([sys.executable, "-m", "hyperinfo.cli", "mi", str(files["dict"]), "--alpha", "0.25"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and abs(json.loads(res.stdout)["total_mi"] - CAP_QUARTER) < 1e-12

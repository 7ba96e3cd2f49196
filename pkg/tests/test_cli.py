import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rearrangement import cli
from rearrangement.cli import RunConfig, exit_code, main
from rearrangement.curves import GridCurve, make_grid, read_curve_csv, write_curve_csv
from rearrangement.errors import CriticalValueError, InfeasibleBandError, InputError


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def curve_csv(tmp_path):
    u = make_grid()
    path = tmp_path / "curve.csv"
    write_curve_csv(GridCurve(u, 5 * (u + np.sin(2 * np.pi * u) / np.pi)), path)
    return path


@pytest.fixture(scope="module")
def sample_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "sample.csv"
    assert main(["simulate", "--n", "1500", "--seed", "4", "--out", str(path)]) == 0
    return path


def test_rearrange_and_isotonize(tmp_path, curve_csv):
    assert main(["rearrange", "--in", str(curve_csv), "--out", str(tmp_path / "r.csv")]) == 0
    r = read_curve_csv(tmp_path / "r.csv")
    assert np.all(np.diff(r.values) >= 0)
    assert main(["isotonize", "--in", str(curve_csv), "--out", str(tmp_path / "i.csv")]) == 0
    assert np.all(np.diff(read_curve_csv(tmp_path / "i.csv").values) >= -1e-12)


def test_malformed_input_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("u,value\n0.5,oops\n")
    assert main(["rearrange", "--in", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
    rec = json.loads(capsys.readouterr().err.strip())
    assert rec["error"] == "InputError" and rec["exit_code"] == 2
    assert main(["rearrange", "--in", str(tmp_path / "missing.csv"), "--out", "x"]) == 2


def test_exit_code_mapping():
    assert exit_code(InputError("x")) == 2
    assert exit_code(ValueError("x")) == 2
    assert exit_code(CriticalValueError("x")) == 3
    assert exit_code(InfeasibleBandError("x")) == 4


def test_infeasible_band_exit_4(monkeypatch, capsys, tmp_path, curve_csv):
    def boom(args, cfg):
        raise InfeasibleBandError("empty")

    monkeypatch.setitem(cli.COMMANDS, "rearrange", boom)
    assert main(["rearrange", "--in", str(curve_csv), "--out", str(tmp_path / "o.csv")]) == 4
    assert json.loads(capsys.readouterr().err)["exit_code"] == 4


def test_numerical_failure_exit_3(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("y,x,z\n1.0,0,1\n2.0,1,1\n3.0,0,1\n")
    assert main(["fit", "--in", str(p), "--method", "abadie", "--out-dir", str(tmp_path)]) == 3


def test_demo_sine(tmp_path):
    assert main(["demo-sine", "--out-dir", str(tmp_path)]) == 0
    crit = json.loads((tmp_path / "sine_critical.json").read_text())
    np.testing.assert_allclose(sorted(crit["critical_values"]), [1.96, 3.04], atol=0.01)
    rows = _rows(tmp_path / "sine_cdf.csv")
    y = np.array([float(r["y"]) for r in rows])
    dens = np.array([float(r["density"]) for r in rows])
    F = np.array([float(r["F"]) for r in rows])
    assert np.all(np.diff(F) >= 0)
    # density jumps where the level crosses a critical value
    for cv in crit["critical_values"]:
        below, above = dens[y < cv][-1], dens[y > cv][0]
        assert abs(below - above) > 0.1
    q = _rows(tmp_path / "sine_curve.csv")
    assert np.all(np.diff([float(r["Q_rearranged"]) for r in q]) >= 0)


def test_simulate_fit_bands_test(tmp_path, sample_csv, capsys):
    for m in ("qr", "ivqr", "abadie"):
        assert main(["fit", "--in", str(sample_csv), "--method", m, "--out-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "ivqr_x1.csv")
    assert len(rows) == 99 and set(rows[0]) == {"u", "original", "rearranged", "isotonized"}
    assert main(["fit", "--in", str(sample_csv), "--taus", "0.1:0.9:0.1", "--out-dir", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "ivqr_x0.csv")) == 9

    args = ["--in", str(sample_csv), "--b", "100", "--seed", "1", "--net", "19"]
    assert main(["bands", *args, "--out-dir", str(tmp_path / "b")]) == 0
    band = _rows(tmp_path / "b" / "band_ivqr_x1.csv")
    lo = np.array([float(r["rearranged_lower"]) for r in band])
    assert np.all(np.diff(lo) >= 0)
    capsys.readouterr()
    assert main(["test-monotone", *args, "--out", str(tmp_path / "t.json")]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec == json.loads((tmp_path / "t.json").read_text())
    assert main(["bands", *args[:2], "--b", "20", "--out-dir", str(tmp_path)]) == 2


def test_montecarlo_cli(tmp_path, capsys):
    out = tmp_path / "ratios.csv"
    assert main(["montecarlo", "--reps", "6", "--n", "600", "--seed", "2", "--out", str(out)]) == 0
    rows = _rows(out)
    assert [r["function"] for r in rows] == ["distribution"] * 3 + ["quantile"] * 3
    assert all(float(v) <= 100 for r in rows for k, v in r.items() if k.endswith("rearranged"))
    assert json.loads(capsys.readouterr().out)["contraction_violations"] == 0


def test_functionals_cli(tmp_path, curve_csv):
    assert main(["functionals", "--curve", str(curve_csv), "--lorenz", "--smooth", "delta=0.05", "--out-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "functionals.csv")
    assert float(rows[-1]["lorenz"]) == 1.0
    assert main(["functionals", "--curve", str(curve_csv), "--smooth", "width=2", "--out-dir", str(tmp_path)]) == 2


def test_run_pipeline_deterministic(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "n": 1500, "b": 100, "mc_reps": 4, "mc_n": 600}))
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path / "b")]) == 0
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seeds"]["root"] == 3
    assert {"numpy", "scipy", "python"} <= set(manifest["versions"])
    for name, digest in manifest["files"].items():
        a = (tmp_path / "a" / name).read_bytes()
        assert hashlib.sha256(a).hexdigest() == digest
        assert a == (tmp_path / "b" / name).read_bytes()


@settings(max_examples=30)
@given(
    st.integers(0, 2**32),
    st.integers(2, 500),
    st.floats(0.51, 0.99),
    st.integers(2, 10_000),
    st.floats(400.0, 1e5),  # must exceed the default |cov_eps_v|
)
def test_run_config_json_round_trip(seed, k, level, b, sigma):
    cfg = RunConfig(seed=seed, net_size=k, level=level, b=b, dgp={"sigma_eps": sigma})
    back = RunConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.to_json() == cfg.to_json()


def test_run_config_rejects_bad_fields():
    with pytest.raises(InputError):
        RunConfig.from_dict({"seeed": 1})
    with pytest.raises(InputError):
        RunConfig(level=1.5)
    with pytest.raises(InputError):
        RunConfig(taus="0.9:0.1:0.1")
    with pytest.raises(InputError):
        RunConfig.from_json("{not json")


def test_console_entry_point(tmp_path, curve_csv):
    res = subprocess.run(
        [sys.executable, "-m", "rearrangement.cli", "rearrange", "--in", str(curve_csv), "--out", str(tmp_path / "o.csv")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    res = subprocess.run([sys.executable, "-m", "rearrangement.cli", "nope"], capture_output=True, text=True)
    assert res.returncode == 2

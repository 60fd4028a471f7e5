import json

import numpy as np
import pytest

from adaptedbw.cli import main
from adaptedbw.io import read_matrix_csv


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def pair(tmp_path):
    a = write(tmp_path / "a.json", {"d": 1, "T": 2, "L": [[1, 0], [0.5, 1]]})
    b = write(tmp_path / "b.json", {"d": 1, "T": 2, "L": [[1, 0], [-0.5, 1]]})
    return a, b


def test_distance(pair, capsys):
    assert main(["distance", *pair, "--check-decomposition"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["abw"] == pytest.approx(1.0, abs=1e-12)
    assert out["aw2"] == pytest.approx(1.0, abs=1e-12)
    assert out["mean_gap"] == 0.0


def test_distance_t_mismatch(pair, tmp_path, caplog):
    c = write(tmp_path / "c.json", {"d": 1, "T": 1, "L": [[1]]})
    assert main(["distance", pair[0], c]) == 1
    assert "T mismatch" in caplog.text


def test_malformed_input(tmp_path, caplog):
    bad = write(tmp_path / "bad.json", {"d": 1, "T": 2, "L": [[1, 3], [0, 1]]})
    assert main(["distance", bad, bad]) == 1
    assert "row 0 column 1" in caplog.text


def test_missing_file(tmp_path):
    assert main(["distance", str(tmp_path / "nope.json"), str(tmp_path / "x.json")]) == 1


@pytest.mark.parametrize("method", ["fixed-point", "columns", "oracle-1d"])
def test_barycenter(pair, tmp_path, method):
    out = tmp_path / method
    code = main(["barycenter", *pair, "--method", method, "--out", str(out), "--classical-compare"])
    assert code == 0
    bary = json.loads((out / "barycenter.json").read_text())
    np.testing.assert_allclose(bary["L"], np.eye(2), atol=1e-10)
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["converged"] and diag["method"] == method
    S = read_matrix_csv(out / "classical_covariance.csv")
    np.testing.assert_allclose(np.diag(S), [0.934, 1.199], atol=2e-3)
    assert (out / "comparison.csv").read_text().startswith("t,var_abw,var_bw")


def test_barycenter_weights_normalized(pair, tmp_path, caplog):
    assert main(["barycenter", *pair, "--weights", "1,3", "--out", str(tmp_path / "w")]) == 0
    diag = json.loads((tmp_path / "w" / "diagnostics.json").read_text())
    assert diag["weights"] == [0.25, 0.75]
    assert "normalizing" in caplog.text


def test_barycenter_bad_weights(pair, tmp_path):
    assert main(["barycenter", *pair, "--weights", "1,-1", "--out", str(tmp_path / "w")]) == 1
    assert main(["barycenter", *pair, "--weights", "1", "--out", str(tmp_path / "w")]) == 1


def test_not_converged_exit_code(tmp_path):
    rng = np.random.default_rng(5)
    paths = []
    for i in range(3):
        L = np.tril(rng.standard_normal((4, 4)))
        paths.append(write(tmp_path / f"p{i}.json", {"d": 1, "T": 4, "L": L.tolist()}))
    code = main(["barycenter", *paths, "--out", str(tmp_path / "o"), "--max-iter", "1", "--single-start"])
    assert code == 3


def test_ar1_then_simulate(tmp_path, capsys):
    spec = write(tmp_path / "s.json", {"alphas": [0, 0.5, 0.5], "sigmas": [1, 1, 1]})
    proc = tmp_path / "p.json"
    assert main(["ar1", spec, "--out", str(proc)]) == 0
    L = np.array(json.loads(proc.read_text())["L"])
    np.testing.assert_allclose(L[:, 0], [1.0, 0.5, 0.25])
    assert main(["simulate", str(proc), "--paths", "3", "--seed", "9"]) == 0
    first = capsys.readouterr().out
    assert main(["simulate", str(proc), "--paths", "3", "--seed", "9"]) == 0
    assert capsys.readouterr().out == first
    lines = first.splitlines()
    assert lines[0] == "path_id,t1,t2,t3"
    assert len(lines) == 4


def test_bad_seed(pair):
    assert main(["simulate", pair[0], "--seed", "-1"]) == 1


def test_thread_env(pair, monkeypatch):
    monkeypatch.setenv("ABW_THREADS", "1")
    assert main(["distance", *pair]) == 0
    monkeypatch.setenv("ABW_THREADS", "many")
    assert main(["distance", *pair]) == 1


def test_experiment_sec5(tmp_path):
    out = tmp_path / "sec5"
    assert main(["experiment", "sec5", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"]
    for name in ("adapted_barycenter.json", "classical_covariance.csv", "adapted_covariance.csv"):
        assert (out / name).exists()


def test_experiment_sec6_bundle(tmp_path):
    out = tmp_path / "sec6"
    assert main(["experiment", "sec6", "--out", str(out), "--paths", "3"]) == 0
    for name in ("variance.csv", "cov_abw.csv", "cov_abw.svg", "variance.svg", "paths.csv", "summary.json"):
        assert (out / name).exists()
    before = {f.name: f.read_bytes() for f in out.iterdir()}
    assert main(["experiment", "sec6", "--out", str(out), "--paths", "3"]) == 0
    after = {f.name: f.read_bytes() for f in out.iterdir()}
    assert after == before


def test_ar1_barycenter_with_itself(tmp_path):
    spec = write(tmp_path / "s.json", {"alphas": [0, -0.7, 0.4, 0.9], "sigmas": [1, 2, 0.5, 1]})
    proc = tmp_path / "p.json"
    main(["ar1", spec, "--out", str(proc)])
    assert main(["barycenter", str(proc), str(proc), "--out", str(tmp_path / "b")]) == 0
    L = np.array(json.loads(proc.read_text())["L"])
    Lb = np.array(json.loads((tmp_path / "b" / "barycenter.json").read_text())["L"])
    np.testing.assert_allclose(Lb @ Lb.T, L @ L.T, atol=1e-10)

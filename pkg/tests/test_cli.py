import csv
import json
import os

import numpy as np
import pytest

from effham import cli
from effham.plotting import read_embedded


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(f"run.output_dir = {tmp_path / 'out'}\n" + text)
    return str(p)


PERIODIC = """
env.potential.kind = periodic_cosine
env.potential.amplitudes = 1.0
"""


def test_sample_env_one_seed(tmp_path):
    assert cli.main(["sample-env", write(tmp_path, PERIODIC)]) == 0
    out = tmp_path / "out" / "sample-env"
    assert sorted(p.name for p in out.glob("env_seed*.json")) == ["env_seed0.json"]
    m = json.loads((out / "manifest.json").read_text())
    assert m["status"] == "ok" and len(m["config_hash"]) == 16 and "numpy" in m["versions"]


def test_sample_env_eight_seeds(tmp_path):
    cfg = write(tmp_path, "run.seeds = 0,1,2,3,4,5,6,7\nrun.plots = false\nenv.potential.kind = random_fourier\n")
    assert cli.main(["sample-env", cfg]) == 0
    assert len(list((tmp_path / "out" / "sample-env").glob("env_seed*.json"))) == 8


@pytest.mark.parametrize("text", ["env.potential.kind = random_fourier\nenv.potential.decay = 1.5\n",
                                  "theta.lambda_grid =\n", "bogus.key = 1\n"])
def test_config_errors_exit_2(tmp_path, text):
    assert cli.main(["lambda0", write(tmp_path, text)]) == 2


def test_unknown_command_and_missing_file(tmp_path):
    assert cli.main(["frobnicate", write(tmp_path, "")]) == 2
    assert cli.main(["lambda0", str(tmp_path / "missing.cfg")]) == 2


def test_effective_requires_theta_grid(tmp_path):
    assert cli.main(["effective", write(tmp_path, "")]) == 2
    m = json.loads((tmp_path / "out" / "effective" / "manifest.json").read_text())
    assert m["status"] == "config_error"


def test_numerical_error_exit_3(tmp_path):
    # a lambda grid entirely below the critical value admits no bounded solution
    cfg = write(tmp_path, PERIODIC + "theta.lambda_grid = -2, -1\n")
    assert cli.main(["theta-map", cfg]) == 3
    m = json.loads((tmp_path / "out" / "theta-map" / "manifest.json").read_text())
    assert m["error"]["stage"] == "theta_map"


def test_effective_p2_and_idempotence(tmp_path):
    cfg = write(tmp_path, "theta.theta_grid = -1, -0.5, 0, 0.5, 1\n")
    assert cli.main(["effective", cfg]) == 0
    out = tmp_path / "out" / "effective"
    with open(out / "effective.csv") as fh:
        rows = list(csv.DictReader(fh))
    th = np.array([float(r["theta"]) for r in rows])
    val = np.array([float(r["value"]) for r in rows])
    assert np.max(np.abs(val - th**2)) < 1e-3
    emb = read_embedded(out / "effective.svg")
    assert np.allclose(emb["value"], val)
    first = {p: (out / p).read_bytes() for p in os.listdir(out) if p != "manifest.json"}
    assert cli.main(["effective", cfg]) == 0
    assert first == {p: (out / p).read_bytes() for p in os.listdir(out) if p != "manifest.json"}


def test_parabolic_periodic_slope_csv(tmp_path):
    cfg = write(tmp_path, PERIODIC + "parabolic.theta = 0\nparabolic.t_end = 10\n")
    assert cli.main(["parabolic", cfg]) == 0
    text = (tmp_path / "out" / "parabolic" / "slope_seed0_theta0.csv").read_text()
    assert text.startswith("t,u_center,slope\n") and "\r" not in text


def test_bridge_and_eps_study(tmp_path):
    cfg = write(tmp_path, PERIODIC + "bridge.lambda = 0.2\nbridge.mu = -0.1, 0.5\nparabolic.eps_list = 0.25, 0.125\n")
    assert cli.main(["bridge", cfg]) == 0
    with open(tmp_path / "out" / "bridge" / "shoots.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["verdict"] for r in rows] == ["crossed", "crossed"] and rows[0]["satisfied"] == "True"
    assert cli.main(["eps-study", cfg]) == 0


def test_validate_end2end_summary(tmp_path, capsys):
    cfg = write(tmp_path, "validate.suite = end2end\n")
    assert cli.main(["validate", cfg]) == 0
    out = capsys.readouterr().out
    # no environment keys in the config: the built-in x-free environments are used
    for name in ("free_p2", "free_p3", "free_dwell"):
        assert f"| constant_coeff/{name} | pass |" in out
    assert out.count("\n") == 6
    assert (tmp_path / "out" / "validate" / "checks.json").exists()

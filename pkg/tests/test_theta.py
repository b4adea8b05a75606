import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effham import theta
from effham.env import from_string
from effham.errors import PreconditionError
from effham.validate import load_scalars
from conftest import cosine

P2 = from_string("p^2")
P3 = from_string("|p|^3")


@settings(max_examples=8)
@given(st.floats(0.05, 6.0))
def test_x_free_branches_closed_form(lam):
    s = theta.theta_of_lambda(P2, lam)
    assert s.theta_max == pytest.approx(math.sqrt(lam), abs=1e-8)
    assert s.theta_min == pytest.approx(-math.sqrt(lam), abs=1e-8)
    t = theta.theta_of_lambda(P3, lam)
    assert t.theta_max == pytest.approx(lam ** (1 / 3), abs=1e-7)


def test_cos_branch_against_frozen_oracle():
    mu = load_scalars()[("cos1", "mu_lam_2")]
    s = theta.theta_of_lambda(from_string("p^2", cosine([1.0])), 2.0)
    assert s.theta_max == pytest.approx(mu, abs=1e-4)
    assert s.theta_min == pytest.approx(-mu, abs=1e-4)


def _samples(vals, se=0.01):
    return [theta.ThetaSample(float(i), -v, v, se, [0], se, se, {0: -v}, {0: v}) for i, v in enumerate(vals)]


@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=8, unique=True))
def test_disjoint_detects_close_pairs(vals):
    vals = sorted(vals)
    bad = theta.check_disjoint(_samples(vals, 0.01))
    tol = 3 * math.hypot(0.01, 0.01)
    expect = [(i, j) for i in range(len(vals)) for j in range(i + 1, len(vals))
              if any(abs(a - b) <= tol for a in (-vals[i], vals[i]) for b in (-vals[j], vals[j]))]
    assert bad == expect


def test_monotone_flags_decrease():
    assert theta.check_monotone(_samples([1.0, 2.0, 3.0])) == []
    flags = theta.check_monotone(_samples([1.0, 3.0, 2.0]))
    assert len(flags) == 2 and all("not strictly monotone" in f for f in flags)


@given(st.floats(0.1, 0.9), st.floats(0.3, 2.0))
def test_bisect_finds_jump(at, height):
    f = lambda lam: math.sqrt(lam) + (height if lam > at else 0.0)  # noqa: E731
    pts = [(0.0, f(0.0)), (1.0, f(1.0))]
    out, jumps, demands = theta._bisect_jumps(pts, f, 0.05, 1e-6, 40)
    assert len(jumps) == 1 and not demands
    (l1, _), (l2, _) = jumps[0]
    assert l1 <= at <= l2 and l2 - l1 <= 1e-6
    assert all(abs(b[1] - a[1]) <= 0.05 for a, b in zip(out, out[1:]) if b[0] - a[0] > 1e-6)


def test_empty_grid_rejected():
    with pytest.raises(PreconditionError):
        theta.build_theta_map(P2, [])


def test_pipeline_fills_double_well_bottom():
    res = theta.effective_pipeline(from_string("(p^2-1)^2"), np.linspace(-1.5, 1.5, 7))
    exact = (res.curve.theta_grid**2 - 1) ** 2
    assert np.max(np.abs(res.curve.value - exact)) < 1e-3
    assert res.curve.flat_segments == [] or all(abs(s[2]) < 1e-3 for s in res.curve.flat_segments)
    assert any(g.status == "filled" for g in res.tmap.candidates)


def test_curve_csv(tmp_path):
    res = theta.effective_pipeline(P2, [-1.0, 0.0, 1.0])
    res.curve.to_csv(tmp_path / "c.csv")
    data = np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)
    assert np.allclose(data[:, 1], [1.0, 0.0, 1.0], atol=1e-4)
    res.tmap.to_csv(tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().startswith("lambda,theta_min,theta_max,stderr,n_seeds\n")


def test_poisson_wells_flat_bottom():
    """Rare deep wells pin the bottom: the gap is certified flat and the curve is constant on it."""
    from effham.env import FieldModel

    pb = FieldModel("poisson_bumps", {"density": 0.3, "width": 0.5, "height_lo": -1.0, "height_hi": -0.5})
    cfg = theta.ThetaConfig(lambda0_window=200.0)
    res = theta.effective_pipeline(from_string("p^2", pb), np.linspace(-0.6, 0.6, 7), seeds=(0, 1), cfg=cfg,
                                   n_lambda=10)
    flats = [g for g in res.tmap.candidates if g.status == "flat"]
    assert len(flats) == 1
    g = flats[0]
    assert g.theta1 < -0.1 and g.theta2 > 0.1
    assert abs(g.lambda_left - g.lambda_right) <= cfg.label_tol
    inside = (res.curve.theta_grid > g.theta1) & (res.curve.theta_grid < g.theta2)
    assert np.all(res.curve.value[inside] == g.label)
    assert np.all(res.curve.value[~inside] > g.label)
    assert any(e["verdict"] == "crossed" for e in g.evidence)

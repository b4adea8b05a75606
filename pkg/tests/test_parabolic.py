import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effham import parabolic
from effham.errors import PreconditionError
from effham.validate import random_lipschitz


@given(st.floats(-2.5, 2.5))
def test_linear_data_exact_for_x_free(r_p2, theta):
    g = parabolic.Grid1D.periodic_cells(1.0, 1, 1 / 32, theta)
    run = parabolic.solve_ehj(r_p2, g, 1.0, [0.25, 0.5, 0.75, 1.0])
    assert np.allclose(run.slope_series, theta**2, atol=1e-10)


@given(st.integers(0, 10_000), st.floats(-1.0, 1.0))
def test_comparison_random_pairs(r_cos, seed, theta):
    rng = np.random.default_rng(seed)
    g = parabolic.Grid1D.periodic_cells(1.0, 2, 1 / 32, theta)
    xe = np.append(g.x, g.x[-1] + g.dx)
    v = theta * g.x + random_lipschitz(rng, xe, 1.0)[:-1]
    w = v + np.abs(random_lipschitz(rng, xe, 0.5)[:-1])
    verdict = parabolic.comparison_check(r_cos, g, v, w, 0.5, nsamples=4)
    assert verdict.passed


@given(st.floats(-3, 3))
def test_constant_shift_commutes(r_cos, c):
    g = parabolic.Grid1D.periodic_cells(1.0, 1, 1 / 32, 0.3)
    u0 = 0.2 * np.sin(2 * np.pi * g.x)
    a = parabolic.solve_ehj(r_cos, g, 0.5, [0.5], u0=u0).u_final
    b = parabolic.solve_ehj(r_cos, g, 0.5, [0.5], u0=u0 + c).u_final
    assert np.allclose(b - a, c, atol=1e-10)


def test_effective_value_cos_matches_critical(r_cos):
    run = parabolic.effective_value(r_cos, 0.0, t_end=20.0)
    assert run.secant == pytest.approx(0.0126616, abs=1e-3)
    HL, HU, w = parabolic.estimate_HL_HU(run)
    assert HL <= HU and w == HU - HL


def test_linear_boundary_trust_region(r_cos):
    g = parabolic.Grid1D.around_zero(3.0, 1 / 32, 0.5)
    run = parabolic.solve_ehj(r_cos, g, 1.0, np.linspace(0.25, 1.0, 4))
    assert np.all(np.diff(run.trusted_halfwidth) < 0)


def test_epsilon_study_shrinks(r_cos):
    tab = parabolic.epsilon_study(r_cos, 0.0, [0.25, 0.125, 0.0625])
    assert np.all(np.diff(tab.diffs) < 0)
    with pytest.raises(PreconditionError):
        parabolic.epsilon_study(r_cos, 0.0, [0.1, 0.2])


def test_preconditions(r_cos):
    with pytest.raises(PreconditionError):
        parabolic.Grid1D(1.0, 0.0, 10)
    with pytest.raises(PreconditionError):
        parabolic.Grid1D(0.0, 1.0, 10, boundary="reflect")
    g = parabolic.Grid1D.periodic_cells(1.0, 1, 1 / 16)
    with pytest.raises(PreconditionError):
        parabolic.solve_ehj(r_cos, g, -1.0)
    with pytest.raises(PreconditionError):
        parabolic.comparison_check(r_cos, g, np.zeros(3), np.zeros(3), 1.0)


def test_spacetime_dump(r_cos, tmp_path):
    g = parabolic.Grid1D.periodic_cells(1.0, 1, 1 / 16, 0.1)
    run = parabolic.solve_ehj(r_cos, g, 0.4, [0.2, 0.4], record_every=0.1)
    p = tmp_path / "u.bin"
    run.dump_spacetime(p)
    side = json.loads((tmp_path / "u.bin.json").read_text())
    data = np.fromfile(p, dtype="<f8").reshape(side["shape"])
    assert np.array_equal(data[-1], run.u_final)
    run.to_csv(tmp_path / "s.csv")
    assert (tmp_path / "s.json").exists()

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effham import bridge, cell, oracles
from effham.env import from_string, sample_realization
from effham.errors import PreconditionError
from conftest import cosine


@pytest.fixture(scope="module")
def pair_p2():
    r = sample_realization(from_string("p^2"), 0)
    lo, hi = cell.extremal_pair(r, 1.0, (-30.0, 30.0))
    return r, lo, hi


@given(st.floats(-3.0, -0.05))
def test_descent_crossing_closed_form(pair_p2, mu):
    r, lo, hi = pair_p2
    b = bridge.shoot_descend(r, lo, hi, mu, 10.0)
    exact = oracles.riccati_blowdown_x(mu, 1.0) - oracles.riccati_blowdown_x(mu, -1.0)
    assert b.verdict == "crossed"
    assert b.crossing_x - b.start_x == pytest.approx(exact, abs=1e-6)


@given(st.floats(1.2, 5.0))
def test_ascent_crossing_closed_form(pair_p2, mu):
    r, lo, hi = pair_p2
    b = bridge.shoot_ascend(r, lo, hi, mu, 10.0)
    assert b.crossing_x - b.start_x == pytest.approx(oracles.riccati_rise_crossing(mu, -1.0, 1.0), abs=1e-6)


@given(st.floats(0.2, 0.8))
def test_confined_descent_converges(pair_p2, mu):
    r, lo, hi = pair_p2
    b = bridge.shoot_descend(r, lo, hi, mu, 20.0)
    assert b.verdict == "confined" and math.isinf(b.crossing_x)
    assert b.g[-1] == pytest.approx(math.sqrt(mu), abs=1e-7)
    assert b.min_gap_low > 0 and b.min_gap_up > 0


def test_preconditions(pair_p2):
    r, lo, hi = pair_p2
    with pytest.raises(PreconditionError):
        bridge.shoot_descend(r, lo, hi, 1.5, 10.0)
    with pytest.raises(PreconditionError):
        bridge.shoot_ascend(r, lo, hi, 0.5, 10.0)
    with pytest.raises(PreconditionError):
        bridge.shoot_descend(r, lo, hi, 0.5, 100.0)
    with pytest.raises(PreconditionError):
        bridge.shoot_descend(r, hi, hi, 0.5, 10.0)


@given(st.floats(0, 1), st.floats(0, 1))
def test_smoothstep(a, b):
    s = bridge.smoothstep5
    assert s(0.0) == 0.0 and s(1.0) == 1.0
    lo, hi = min(a, b), max(a, b)
    assert s(lo) <= s(hi) + 1e-15
    assert 0 <= bridge.smoothstep5_d(a) <= 15 / 8 + 1e-12


@pytest.mark.parametrize("eps", [0.2, 0.05])
def test_glue_residual_and_exactness(eps):
    r = sample_realization(from_string("p^2", cosine([1.0])), 0)
    lo, hi = cell.extremal_pair(r, 0.2, (-30.0, 30.0))
    mu = -0.2
    b = bridge.shoot_descend(r, lo, hi, mu, 10.0)
    with pytest.raises(PreconditionError):
        bridge.mollify_glue(r, hi, lo, bridge.shoot_descend(r, lo, hi, 0.1, 10.0), 0.1, eps)
    g = bridge.mollify_glue(r, hi, lo, b, mu, eps)
    assert g.satisfied and g.residual_min > mu - 2 * eps
    out = (g.x < g.cutoff["outer"][0]) | (g.x > g.cutoff["outer"][1])
    ref = np.where(g.x < b.start_x, hi.f, lo.f)
    assert np.array_equal(g.g_eps[out], ref[out])


def test_funnel_extremes_p2(pair_p2):
    r, lo, hi = pair_p2
    fx = bridge.funnel_extremes(r, lo, hi, 0.5, 10.0)
    assert fx.verdict == "confined"
    m_lo, m_hi = fx.means()
    assert m_lo == pytest.approx(-math.sqrt(0.5), abs=1e-8)
    assert m_hi == pytest.approx(math.sqrt(0.5), abs=1e-8)
    assert bridge.funnel_extremes(r, lo, hi, -0.5, 10.0).verdict == "crossed"


def test_gap_level_verdicts(pair_p2):
    r, lo, hi = pair_p2
    rep = bridge.detect_gap_level(r, lo, hi, [-0.5, 0.5, 1.0, 2.0], [5.0, 10.0])
    assert [v.verdict for v in rep] == ["crossed", "confined", "skipped", "crossed"]

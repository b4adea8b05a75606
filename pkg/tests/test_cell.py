import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effham import cell
from effham.env import from_string, sample_realization
from effham.errors import NumericalError, PreconditionError
from conftest import cosine


@given(st.floats(0.05, 5.0))
def test_x_free_extremals_are_constant_roots(lam):
    r = sample_realization(from_string("p^2"), 0)
    lo, hi = cell.extremal_pair(r, lam, (-10.0, 10.0))
    assert np.allclose(hi.f, math.sqrt(lam), atol=1e-9)
    assert np.allclose(lo.f, -math.sqrt(lam), atol=1e-9)


def test_band_for_p2(r_p2):
    b = cell.p_bounds(r_p2, 4.0, (-5.0, 5.0))
    assert b.p_plus == pytest.approx(2.0, abs=1e-9) and b.p_minus == pytest.approx(-2.0, abs=1e-9)
    assert cell.p_bounds(r_p2, -1.0, (-5.0, 5.0)).empty


def test_residual_and_ordering(r_cos):
    lo, hi = cell.extremal_pair(r_cos, 1.0, (-20.0, 20.0))
    assert hi.residual_sup < 1e-6 and lo.residual_sup < 1e-6
    assert cell.check_ordering(lo, hi).verdict == "below"
    # maximal solution on a periodic medium is periodic
    x = np.linspace(-3, 3, 50)
    assert np.allclose(hi.at(x), hi.at(x + 1.0), atol=1e-6)


@given(st.floats(0.05, 3.0), st.floats(0.01, 1.0))
def test_maximal_increases_with_level(lam, d):
    r = sample_realization(from_string("p^2", cosine([1.0])), 0)
    a = cell.bounded_solution_window(r, 0.0127 + lam, (-10.0, 10.0))
    b = cell.bounded_solution_window(r, 0.0127 + lam + d, (-10.0, 10.0))
    assert np.min(b.at(a.grid_x) - a.f) > 0


def test_below_critical_raises(r_cos):
    with pytest.raises(NumericalError):
        cell.bounded_solution_window(r_cos, 0.005, (-50.0, 50.0))


def test_lambda0_x_free_and_floor(r_p2, r_cos):
    assert abs(cell.estimate_lambda0(r_p2).value) < 1e-6
    est = cell.estimate_lambda0(r_cos)
    assert est.value >= est.lower_bound
    assert est.value == pytest.approx(0.0126616, abs=1e-5)


def test_insert_between_constant_funnel(r_p2):
    # constants 0.5 < 1 < 1.5 bracket sqrt(lam) with H(m) < lam < H(M)
    sol = cell.insert_between(r_p2, 0.5, 1.5, 1.0, (-5.0, 5.0))
    assert np.all((sol.f > 0.5) & (sol.f < 1.5))
    with pytest.raises(PreconditionError):
        cell.insert_between(r_p2, 1.5, 0.5, 1.0, (-5.0, 5.0))


def test_corrector_potential_residual(r_cos):
    hi = cell.bounded_solution_window(r_cos, 1.0, (-10.0, 10.0))
    pot = cell.corrector_potential(hi, r_cos)
    assert pot.residual_sup < 1e-5
    assert abs(np.interp(0.0, pot.x, pot.u)) < 1e-12


def test_extrema_count_periodic(r_cos):
    hi = cell.bounded_solution_window(r_cos, 1.0, (-5.0, 5.0))
    n = cell.extrema_diagnostic(hi)
    assert 16 <= n <= 24  # two per period over roughly ten periods

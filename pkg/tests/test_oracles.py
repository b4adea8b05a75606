import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from effham import oracles


def test_hill_and_fd_agree():
    V = oracles.cosine_potential([1.0], 1.0)
    e1 = oracles.hill_ground_energy([1.0], 1.0, nmodes=32)
    e2 = oracles.fd_ground_energy(V, 1.0, n=512)
    assert abs(e1 - e2) < 1e-4


def test_zero_potential_mu_is_sqrt():
    assert abs(oracles.hill_mu([0.0], 1.0, 2.0) - np.sqrt(2.0)) < 1e-10


@given(st.floats(0.1, 4.0), st.floats(-0.9, 3.0))
def test_riccati_decay_matches_ivp(lam, f0):
    f0 = max(f0, -0.9 * np.sqrt(lam))
    sol = solve_ivp(lambda x, f: lam - f**2, (0, 2), [f0], rtol=1e-11, atol=1e-12, dense_output=True)
    xs = np.linspace(0, 2, 7)
    assert np.allclose(oracles.riccati_decay(lam, f0, xs), sol.sol(xs)[0], atol=1e-7)


@given(st.floats(-3.0, -0.1), st.floats(-2.0, 2.0))
def test_blowdown_time(mu, f0):
    x = oracles.riccati_blowdown_x(mu, f0)
    sol = solve_ivp(lambda s, f: mu - f**2, (0, 0.999 * x), [f0], rtol=1e-10, atol=1e-12)
    assert sol.success and sol.y[0, -1] < -50

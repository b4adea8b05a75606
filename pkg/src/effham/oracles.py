"""Independent reference solutions for quadratic separable Hamiltonians.

For H = p^2 + V(x) with a = 1 the substitution f = phi'/phi turns the corrector
ODE into the linear problem phi'' = (lam - V) phi.  Bounded positive solutions
are phi = exp(mu x) psi(x) with psi periodic and positive, where lam = Lambda(mu)
is the principal eigenvalue of

    L_mu psi = psi'' + 2 mu psi' + (mu^2 + V) psi.

Lambda is even and convex in mu, Lambda(0) = -E0 is the critical value, and
for lam > -E0 the two roots +-mu(lam) are the means of the maximal and minimal
correctors.  Two routes are offered: a Fourier (Hill) matrix, spectrally
accurate for trigonometric V, and a periodic finite-difference matrix for any
callable V.  Neither shares code with the ODE solvers.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq


# ---------------------------------------------------------------- Fourier route


def hill_matrix(amps, period: float, mu: float, nmodes: int = 64):
    """Matrix of L_mu on e^{2 pi i n x / period}, |n| <= nmodes, for V = sum_k amps[k-1] cos(2 pi k x / period)."""
    n = np.arange(-nmodes, nmodes + 1)
    k = 2 * np.pi * n / period
    M = np.diag(-(k**2) + 2j * mu * k + mu**2).astype(complex)
    for j, A in enumerate(amps, start=1):
        off = 0.5 * A * np.ones(2 * nmodes + 1 - j)
        M += np.diag(off, j) + np.diag(off, -j)
    return M


def hill_lambda(amps, period: float, mu: float, nmodes: int = 64) -> float:
    """Principal (largest real part) eigenvalue of L_mu; real by Perron-Frobenius."""
    ev = np.linalg.eigvals(hill_matrix(amps, period, mu, nmodes))
    return float(np.max(ev.real))


def hill_ground_energy(amps, period: float = 1.0, nmodes: int = 64) -> float:
    """E0: bottom of the spectrum of -d^2/dx^2 - V on periodic functions."""
    return -hill_lambda(amps, period, 0.0, nmodes)


def hill_mu(amps, period: float, lam: float, nmodes: int = 64) -> float:
    """Positive root mu of Lambda(mu) = lam (lam above the critical value)."""
    l0 = hill_lambda(amps, period, 0.0, nmodes)
    if lam <= l0:
        return 0.0
    hi = np.sqrt(max(lam - l0, 0.0)) + np.sum(np.abs(amps)) + 1.0
    return brentq(lambda m: hill_lambda(amps, period, m, nmodes) - lam, 0.0, hi, xtol=1e-14, rtol=1e-15)


def hill_logderivative(amps, period: float, lam: float, x, branch: int = 1, nmodes: int = 64):
    """Bounded corrector mu + psi'/psi of the chosen branch (+1 maximal, -1 minimal), evaluated at x."""
    mu = branch * hill_mu(amps, period, lam, nmodes)
    M = hill_matrix(amps, period, mu, nmodes)
    ev, V = np.linalg.eig(M)
    i = int(np.argmax(ev.real))
    c = V[:, i]
    n = np.arange(-nmodes, nmodes + 1)
    k = 2 * np.pi * n / period
    x = np.asarray(x, float)
    E = np.exp(1j * np.outer(x, k))
    psi = E @ c
    dpsi = E @ (1j * k * c)
    # fix the complex phase so psi is real and positive
    ph = psi[np.argmax(np.abs(psi))]
    psi, dpsi = psi / ph, dpsi / ph
    return mu + (dpsi / psi).real


# ---------------------------------------------------------------- finite-difference route


def _fd_operator(V, period, n, mu):
    h = period / n
    x = h * np.arange(n)
    v = np.asarray(V(x), float)
    # fourth-order periodic stencils for psi'' and psi'
    d2 = np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]) / h**2
    d1 = np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]) / h
    M = np.zeros((n, n))
    idx = np.arange(n)
    for off, c2, c1 in zip(range(-2, 3), d2, d1):
        M[idx, (idx + off) % n] += c2 + 2 * mu * c1
    M[idx, idx] += mu**2 + v
    return x, M


def fd_lambda(V, period: float, mu: float = 0.0, n: int = 2048) -> float:
    _, M = _fd_operator(V, period, n, mu)
    if mu == 0.0:
        return float(sla.eigh(M, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])
    ev = sla.eigvals(M)
    return float(np.max(ev.real))


def fd_ground_energy(V, period: float = 1.0, n: int = 2048) -> float:
    """E0 of -d^2/dx^2 - V from a dense symmetric eigensolve on n periodic nodes."""
    return -fd_lambda(V, period, 0.0, n)


def fd_logderivative(V, period: float, mu: float, n: int = 2048):
    """(x, mu + psi'/psi) on the FD grid for the principal eigenfunction of L_mu."""
    x, M = _fd_operator(V, period, n, mu)
    ev, W = sla.eig(M)
    i = int(np.argmax(ev.real))
    psi = W[:, i].real
    psi = psi / psi[np.argmax(np.abs(psi))]
    h = period / n
    dpsi = (np.roll(psi, 2) - 8 * np.roll(psi, 1) + 8 * np.roll(psi, -1) - np.roll(psi, -2)) / (12 * h)
    return x, mu + dpsi / psi


def cosine_potential(amps, period: float = 1.0):
    amps = list(amps)

    def V(x):
        x = np.asarray(x, float)
        return sum(A * np.cos(2 * np.pi * k * x / period) for k, A in enumerate(amps, start=1))

    return V


# ---------------------------------------------------------------- constant-coefficient targets


def x_free_effective(H, theta):
    """For x-free H the effective Hamiltonian is H itself."""
    return np.asarray(H(np.asarray(theta, float)), float)


def riccati_decay(lam: float, f0: float, x):
    """Solution of f' = lam - f^2 with f(0) = f0 > -sqrt(lam), lam > 0 (closed form)."""
    s = np.sqrt(lam)
    x = np.asarray(x, float)
    c = (f0 - s) / (f0 + s)
    e = c * np.exp(-2 * s * x)
    return s * (1 + e) / (1 - e)


def riccati_blowdown_x(mu: float, f0: float) -> float:
    """First x > 0 where f' = mu - f^2 from f0 reaches -inf (mu < 0): arctan closed form."""
    w = np.sqrt(-mu)
    # f = -w tan(w x - arctan(f0 / w))  ->  -inf when the argument reaches pi/2
    return float((np.pi / 2 + np.arctan(f0 / w)) / w)


def riccati_rise_crossing(mu: float, f0: float, target: float) -> float:
    """x at which f' = mu - f^2 (mu > 0) rising from f0 < target < sqrt(mu) reaches target."""
    s = np.sqrt(mu)

    def inv(f):
        return np.arctanh(f / s) / s

    return float(inv(target) - inv(f0))

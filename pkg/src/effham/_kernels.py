"""Compiled inner loops.

Every Hamiltonian handled by the package has the separated form

    H(x, p) = sum_j c_j(x) * phi_j(p)        (optionally max'ed with |p|^4 - n)

so the loops below only see the x-coefficients ``C[j, k]`` tabulated on a grid
and a small table of momentum-function codes.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# momentum function codes
ONE = 0
POW = 1  # |p|^g
ABS = 2  # |p|
LIN = 3  # p
DWELL = 4  # (p^2 - 1)^2

NO_TRUNC = np.nan


@njit(cache=True, inline="always")
def phi(kind, g, p):
    if kind == ONE:
        return 1.0
    if kind == POW:
        if g == 2.0:
            return p * p
        return abs(p) ** g
    if kind == ABS:
        return abs(p)
    if kind == LIN:
        return p
    q = p * p - 1.0
    return q * q


@njit(cache=True, inline="always")
def dphi(kind, g, p):
    if kind == ONE:
        return 0.0
    if kind == POW:
        if g == 2.0:
            return 2.0 * p
        if p == 0.0:
            return 0.0
        return g * abs(p) ** (g - 1.0) * (1.0 if p > 0 else -1.0)
    if kind == ABS:
        if p == 0.0:
            return 0.0
        return 1.0 if p > 0 else -1.0
    if kind == LIN:
        return 1.0
    return 4.0 * p * (p * p - 1.0)


@njit(cache=True, nogil=True)
def ham(C, k, mk, mg, trunc, p):
    s = 0.0
    for j in range(mk.shape[0]):
        s += C[j, k] * phi(mk[j], mg[j], p)
    if trunc == trunc:  # not NaN
        q = p * p
        alt = q * q - trunc
        if alt > s:
            return alt
    return s


@njit(cache=True, nogil=True)
def ham_dp(C, k, mk, mg, trunc, p):
    if trunc == trunc:
        s = 0.0
        for j in range(mk.shape[0]):
            s += C[j, k] * phi(mk[j], mg[j], p)
        q = p * p
        if q * q - trunc > s:
            return 4.0 * p * q
    d = 0.0
    for j in range(mk.shape[0]):
        d += C[j, k] * dphi(mk[j], mg[j], p)
    return d


@njit(cache=True, inline="always")
def _rhs(C, A, k, mk, mg, trunc, lam, f):
    return (lam - ham(C, k, mk, mg, trunc, f)) / A[k]


@njit(cache=True, nogil=True)
def rk4_sweep(C, A, mk, mg, trunc, lam, i0, i1, f0, h, lo, hi, out):
    """Classical RK4 on the node grid x_i = x_0 + i*h between nodes i0 and i1.

    ``C`` and ``A`` are tabulated at half steps (column 2*i is node i).  The
    sweep runs backwards when i1 < i0.  Returns the first node index where the
    solution left [lo, hi] (or became NaN), or -1.
    """
    step = 1 if i1 >= i0 else -1
    hs = h * step
    f = f0
    out[i0] = f
    i = i0
    while i != i1:
        k = 2 * i
        k1 = _rhs(C, A, k, mk, mg, trunc, lam, f)
        k2 = _rhs(C, A, k + step, mk, mg, trunc, lam, f + 0.5 * hs * k1)
        k3 = _rhs(C, A, k + step, mk, mg, trunc, lam, f + 0.5 * hs * k2)
        k4 = _rhs(C, A, k + 2 * step, mk, mg, trunc, lam, f + hs * k3)
        f = f + hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        i += step
        out[i] = f
        if not (lo <= f <= hi):
            return i
    return -1


@njit(cache=True, nogil=True)
def funnel_sweep(C, A, mk, mg, trunc, lam, i0, i1, f0, h, low, up, out):
    """RK4 sweep that stops when the path touches ``low`` or ``up`` (node arrays).

    Returns (index, side) with side = -1 (hit low), +1 (hit up) or 0 (confined).
    """
    step = 1 if i1 >= i0 else -1
    hs = h * step
    f = f0
    out[i0] = f
    i = i0
    while i != i1:
        k = 2 * i
        k1 = _rhs(C, A, k, mk, mg, trunc, lam, f)
        k2 = _rhs(C, A, k + step, mk, mg, trunc, lam, f + 0.5 * hs * k1)
        k3 = _rhs(C, A, k + step, mk, mg, trunc, lam, f + 0.5 * hs * k2)
        k4 = _rhs(C, A, k + 2 * step, mk, mg, trunc, lam, f + hs * k3)
        f = f + hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        i += step
        out[i] = f
        if not (f == f):
            return i, -1
        if f <= low[i]:
            return i, -1
        if f >= up[i]:
            return i, 1
    return -1, 0


@njit(cache=True, nogil=True)
def ham_grid(C, mk, mg, trunc, P):
    """H at every (node, momentum) pair; C holds one column per node."""
    n = C.shape[1]
    m = P.shape[0]
    out = np.empty((n, m))
    for k in range(n):
        for i in range(m):
            out[k, i] = ham(C, k, mk, mg, trunc, P[i])
    return out


@njit(cache=True, nogil=True)
def ham_nodes(C, mk, mg, trunc, F):
    out = np.empty(F.shape[0])
    for k in range(F.shape[0]):
        out[k] = ham(C, k, mk, mg, trunc, F[k])
    return out


@njit(cache=True, nogil=True)
def ham_dp_nodes(C, mk, mg, trunc, F):
    out = np.empty(F.shape[0])
    for k in range(F.shape[0]):
        out[k] = ham_dp(C, k, mk, mg, trunc, F[k])
    return out


@njit(cache=True, nogil=True)
def ehj_steps(u, C, A, mk, mg, trunc, theta, dx, dt, nsteps, sigma_mode, d_fixed, safety, periodic, span):
    """Explicit monotone steps for u_t = a u_xx + H(x, u_x) on the nodes of ``u``.

    Ghost nodes: linear continuation with slope ``theta`` (periodic == 0) or the
    shifted periodic image u(x + span) = u(x) + theta * span (periodic == 1).

    Lax-Friedrichs numerical Hamiltonian
        Hhat = H(x_i, (p- + p+)/2) + (s_i/2) (p+ - p-),
    which is nondecreasing in u_{i+1} and u_{i-1} once s_i >= |dH/dp| - 2 a_i/dx.
    The dissipation bound d is 1.1 * max |dH/dp| over all one-sided slopes of
    the current step (the 10% margin covers the midpoint slope of nonconvex H), or ``d_fixed`` when positive (then the scheme is one
    fixed monotone map, as needed for comparison runs).
    sigma_mode 0 ("full"): s_i = d.  sigma_mode 1 ("reduced"): s_i = max(0, d - 2 a_i/dx).

    Returns (status, steps_done, d_max): 0 ok, 1 dt too large for the current
    d (caller shrinks dt), 2 NaN, 3 slope outside the fixed d.
    """
    n = u.shape[0]
    new = np.empty(n)
    pm = np.empty(n + 1)
    dmax = 0.0
    for it in range(nsteps):
        if periodic == 1:
            pm[0] = (u[0] - (u[n - 1] - theta * span)) / dx
            pm[n] = ((u[0] + theta * span) - u[n - 1]) / dx
        else:
            pm[0] = theta
            pm[n] = theta
        for i in range(1, n):
            pm[i] = (u[i] - u[i - 1]) / dx
        need = 0.0
        for i in range(n):
            k = 2 * i
            lo = pm[i]
            hi = pm[i + 1]
            v = abs(ham_dp(C, k, mk, mg, trunc, lo))
            if v > need:
                need = v
            v = abs(ham_dp(C, k, mk, mg, trunc, hi))
            if v > need:
                need = v
        if d_fixed > 0.0:
            if need > d_fixed:
                return 3, it, need
            d = d_fixed
        else:
            d = 1.1 * need
        if d > dmax:
            dmax = d
        for i in range(n):
            lo = pm[i]
            hi = pm[i + 1]
            k = 2 * i
            a = A[k]
            s = d
            if sigma_mode != 0:
                s = d - 2.0 * a / dx
                if s < 0.0:
                    s = 0.0
            if dt * (2.0 * a / (dx * dx) + s / dx) > safety:
                return 1, it, dmax
            v = u[i] + dt * (a * (hi - lo) / dx + ham(C, k, mk, mg, trunc, 0.5 * (lo + hi)) + 0.5 * s * (hi - lo))
            if not (v == v):
                return 2, it, dmax
            new[i] = v
        for i in range(n):
            u[i] = new[i]
    return 0, nsteps, dmax


@njit(cache=True, nogil=True)
def sublevel_edges(C, mk, mg, trunc, lam, R, npts, iters):
    """Extreme points of {p in [-R, R] : H(x_k, p) <= lam} at every node k.

    Scans inward from each end with ``npts`` steps, then bisects the bracket.
    NaN marks an empty sublevel set (on the scanned range).
    """
    n = C.shape[1]
    lo = np.full(n, np.nan)
    hi = np.full(n, np.nan)
    dp = 2.0 * R / npts
    for k in range(n):
        # largest p with H <= lam
        found = False
        p = R
        for _ in range(npts + 1):
            if ham(C, k, mk, mg, trunc, p) <= lam:
                found = True
                break
            p -= dp
        if not found:
            continue
        a, b = p, p + dp  # H(a) <= lam < H(b)
        if b > R:
            b = R
        for _ in range(iters):
            m = 0.5 * (a + b)
            if ham(C, k, mk, mg, trunc, m) <= lam:
                a = m
            else:
                b = m
        hi[k] = a
        p = -R
        for _ in range(npts + 1):
            if ham(C, k, mk, mg, trunc, p) <= lam:
                break
            p += dp
        a, b = p - dp, p  # H(a) > lam >= H(b)
        if a < -R:
            a = -R
        for _ in range(iters):
            m = 0.5 * (a + b)
            if ham(C, k, mk, mg, trunc, m) <= lam:
                b = m
            else:
                a = m
        lo[k] = b
    return lo, hi


@njit(cache=True, nogil=True)
def min_over_p(C, mk, mg, trunc, R, npts):
    """min_p H(x_k, p) on [-R, R] per node: grid scan then golden-section refinement."""
    n = C.shape[1]
    vals = np.empty(n)
    args = np.empty(n)
    dp = 2.0 * R / npts
    g = 0.5 * (np.sqrt(5.0) - 1.0)
    for k in range(n):
        best = np.inf
        pb = 0.0
        for i in range(npts + 1):
            p = -R + i * dp
            v = ham(C, k, mk, mg, trunc, p)
            if v < best:
                best = v
                pb = p
        a = pb - dp
        b = pb + dp
        c = b - g * (b - a)
        d = a + g * (b - a)
        fc = ham(C, k, mk, mg, trunc, c)
        fd = ham(C, k, mk, mg, trunc, d)
        for _ in range(60):
            if fc < fd:
                b = d
                d = c
                fd = fc
                c = b - g * (b - a)
                fc = ham(C, k, mk, mg, trunc, c)
            else:
                a = c
                c = d
                fc = fd
                d = a + g * (b - a)
                fd = ham(C, k, mk, mg, trunc, d)
        m = 0.5 * (a + b)
        v = ham(C, k, mk, mg, trunc, m)
        if v < best:
            best = v
            pb = m
        vals[k] = best
        args[k] = pb
    return vals, args

"""Monotone explicit solver for u_t = a(x) u_xx + H(x, u_x) with linear data theta x.

Centered second differences for the diffusion and a Lax-Friedrichs numerical
Hamiltonian for H.  Slopes of u(t, 0) / t at long times estimate the lower and
upper effective Hamiltonians.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .env import Realization
from .errors import NumericalError, PreconditionError

SIGMA_MODES = {"full": 0, "reduced": 1}


@dataclass
class Grid1D:
    """Spatial grid plus time-step policy.

    boundary "linear": ghost nodes continue u with slope theta; only
    |x| <= x_hi - c t is trusted.  boundary "periodic": u(x + span) = u(x) +
    theta span with span = x_hi - x_lo, exact when the environment is periodic
    with a period dividing span.
    """

    x_lo: float
    x_hi: float
    nx: int
    theta: float = 0.0
    dt: float | None = None
    cfl_safety: float = 0.9
    boundary: str = "linear"
    sigma_mode: str = "reduced"

    def __post_init__(self):
        if not self.x_hi > self.x_lo or self.nx < 3:
            raise PreconditionError("grid needs x_hi > x_lo and at least 3 nodes")
        if not 0 < self.cfl_safety < 1:
            raise PreconditionError("cfl_safety must lie in (0, 1)")
        if self.boundary not in ("linear", "periodic"):
            raise PreconditionError(f"unknown boundary {self.boundary!r}")
        if self.sigma_mode not in SIGMA_MODES:
            raise PreconditionError(f"unknown sigma mode {self.sigma_mode!r}")

    @property
    def span(self):
        return self.x_hi - self.x_lo

    @property
    def dx(self):
        return self.span / (self.nx if self.boundary == "periodic" else self.nx - 1)

    @property
    def x(self):
        return self.x_lo + self.dx * np.arange(self.nx)

    @classmethod
    def periodic_cells(cls, period: float, cells: int, dx: float, theta=0.0, **kw):
        """Periodic grid over ``cells`` periods centred so that x = 0 is a node."""
        n = int(round(cells * period / dx))
        half = 0.5 * cells * period
        g = cls(-half, half, n, theta, boundary="periodic", **kw)
        return g

    @classmethod
    def around_zero(cls, half_width: float, dx: float, theta=0.0, **kw):
        n = 2 * int(round(half_width / dx)) + 1
        return cls(-half_width, half_width, n, theta, **kw)

    def to_dict(self):
        return {k: getattr(self, k) for k in ("x_lo", "x_hi", "nx", "theta", "dt", "cfl_safety", "boundary", "sigma_mode")}


@dataclass
class ParabolicRun:
    grid: Grid1D
    seed: int
    theta: float
    times: np.ndarray
    u_center: np.ndarray
    slope_series: np.ndarray
    HL_est: float = math.nan
    HU_est: float = math.nan
    d_max: float = 0.0
    dt_used: float = 0.0
    lipschitz: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trusted_halfwidth: np.ndarray = field(default_factory=lambda: np.zeros(0))
    u_final: np.ndarray | None = None
    snapshots: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "u_center", "slope"])
            for row in zip(self.times, self.u_center, self.slope_series):
                w.writerow([repr(float(v)) for v in row])
        with open(str(path).rsplit(".", 1)[0] + ".json", "w") as fh:
            json.dump(self.header(), fh, indent=2)

    def header(self):
        return {
            "grid": self.grid.to_dict(),
            "seed": self.seed,
            "theta": self.theta,
            "sigma_policy": self.grid.sigma_mode,
            "dissipation_bound": self.d_max,
            "dt": self.dt_used,
            "cfl_safety": self.grid.cfl_safety,
            "HL_est": self.HL_est,
            "HU_est": self.HU_est,
            "notes": self.notes,
        }

    def dump_spacetime(self, path):
        """Snapshots as little-endian float64, row-major (time x space), with a JSON sidecar."""
        if not self.snapshots:
            raise PreconditionError("run was not recorded; pass record_every to solve_ehj")
        ts = np.array([t for t, _ in self.snapshots])
        data = np.vstack([u for _, u in self.snapshots]).astype("<f8")
        data.tofile(path)
        side = {"shape": list(data.shape), "dtype": "<f8", "order": "C (time x space)",
                "times": ts.tolist(), "x": self.grid.x.tolist()}
        with open(str(path) + ".json", "w") as fh:
            json.dump(side, fh)


def _initial_dt(r, grid, u, d_guess):
    a_max = float(np.max(r.eval_a(grid.x)))
    dx = grid.dx
    s = d_guess if grid.sigma_mode == "full" else max(0.0, d_guess - 2 * r.cls.a_min / dx)
    return grid.cfl_safety * 0.95 * dx * dx / (2 * a_max + dx * s)


def _slope_need(r, grid, u):
    x = grid.x
    p = np.diff(u) / grid.dx
    p = np.concatenate([[grid.theta], p, [grid.theta]])
    d = np.abs(r.eval_dH(np.concatenate([x, x]), np.concatenate([p[:-1], p[1:]])))
    return 1.1 * float(np.max(d))


class _Stepper:
    """Advances one or more fields with a shared time step (shared dt keeps comparisons exact)."""

    def __init__(self, r: Realization, grid: Grid1D, d_fixed: float = 0.0):
        self.r = r
        self.g = grid
        xh = grid.x_lo + 0.5 * grid.dx * np.arange(2 * grid.nx - 1)
        xh = np.concatenate([xh, [xh[-1] + 0.5 * grid.dx]])
        self.C, self.A = r.tabulate(xh)
        self.d_fixed = float(d_fixed)
        self.mode = SIGMA_MODES[grid.sigma_mode]
        self.periodic = 1 if grid.boundary == "periodic" else 0
        self.dt = grid.dt
        self.d_max = 0.0
        self.halvings = 0

    def advance(self, us, t0, t1):
        """Advance every array in ``us`` from t0 to t1 in place."""
        g, r = self.g, self.r
        if self.dt is None:
            d0 = self.d_fixed or max(_slope_need(r, g, u) for u in us)
            self.dt = _initial_dt(r, g, us[0], 1.25 * d0)
        t = t0
        while t < t1 - 1e-14 * max(1.0, abs(t1)):
            n = max(int(math.ceil((t1 - t) / self.dt - 1e-9)), 1)
            dt = (t1 - t) / n
            backups = [u.copy() for u in us]
            done = []
            ok = True
            for u in us:
                st, it, dm = K.ehj_steps(u, self.C, self.A, r.kinds, r.expos, r.trunc, float(g.theta), g.dx, dt,
                                         n, self.mode, self.d_fixed, g.cfl_safety, self.periodic, g.span)
                self.d_max = max(self.d_max, dm)
                done.append(it)
                if st == 2:
                    raise NumericalError("NaN in parabolic solution", where=f"t={t + it * dt:.6g}")
                if st == 3:
                    raise NumericalError("slope left the range covered by the fixed dissipation bound",
                                         where=f"t={t + it * dt:.6g}")
                if st == 1:
                    ok = False
                    break
            if ok:
                t = t1
            else:
                # the dissipation grew past the CFL budget: roll back the chunk, halve dt, retry
                for u, b in zip(us, backups):
                    u[:] = b
                self.dt = dt * 0.5
                self.halvings += 1
                if self.dt < 1e-14:
                    raise NumericalError("time step underflow", where=f"t={t:.6g}")
        return self.dt


def solve_ehj(r: Realization, grid: Grid1D, t_end: float, sample_times=None, u0=None, record_every=None,
              trust_speed=None) -> ParabolicRun:
    """Evolve u(0, x) = theta x (+ optional bounded perturbation u0) and record u(t, 0)."""
    if t_end <= 0:
        raise PreconditionError("t_end must be positive")
    ts = np.asarray(sample_times if sample_times is not None else np.linspace(t_end / 40, t_end, 40), float)
    if np.any(np.diff(ts) <= 0) or ts[0] <= 0 or ts[-1] > t_end + 1e-12:
        raise PreconditionError("sample_times must be increasing in (0, t_end]")
    x = grid.x
    u = grid.theta * x
    if u0 is not None:
        u = u + (u0(x) if callable(u0) else np.asarray(u0, float))
    u = np.ascontiguousarray(u, dtype=float)
    st = _Stepper(r, grid)
    i0 = int(np.argmin(np.abs(x)))
    uc, lips, trust, snaps = [], [], [], []
    t = 0.0
    if record_every:
        snaps.append((0.0, u.copy()))
    c = trust_speed
    for tk in ts:
        if record_every:
            # intermediate snapshots at the requested spacing
            while snaps[-1][0] + record_every < tk - 1e-12:
                tn = snaps[-1][0] + record_every
                st.advance([u], t, tn)
                t = tn
                snaps.append((t, u.copy()))
        st.advance([u], t, tk)
        t = tk
        if record_every:
            snaps.append((t, u.copy()))
        uc.append(float(np.interp(0.0, x, u)) if abs(x[i0]) > 1e-12 else float(u[i0]))
        speed = st.d_max if c is None else c
        hw = math.inf if grid.boundary == "periodic" else grid.x_hi - speed * t
        trust.append(hw)
        m = np.abs(x) <= (hw if math.isfinite(hw) else np.inf)
        if np.sum(m) >= 2:
            lips.append(float(np.max(np.abs(np.diff(u[m]))) / grid.dx))
        else:
            lips.append(math.nan)
    uc = np.array(uc)
    run = ParabolicRun(grid, r.seed, grid.theta, ts, uc, uc / ts, d_max=st.d_max, dt_used=st.dt,
                       lipschitz=np.array(lips), trusted_halfwidth=np.array(trust), u_final=u, snapshots=snaps)
    if st.halvings:
        run.notes.append(f"dt halved {st.halvings} times after dissipation growth")
    if grid.boundary == "linear" and trust[-1] <= 0:
        run.notes.append("x = 0 left the trusted region (domain of dependence) before t_end")
    if math.ceil(0.25 * len(ts)) >= 4:
        run.HL_est, run.HU_est, _ = estimate_HL_HU(run)
    return run


def estimate_HL_HU(run: ParabolicRun, tail_fraction: float = 0.25):
    """(HL, HU, width): min and max of u(t, 0)/t over the final tail_fraction of sample times."""
    if not 0 < tail_fraction <= 1:
        raise PreconditionError("tail_fraction must lie in (0, 1]")
    n = run.times.size
    k = int(math.ceil(tail_fraction * n))
    if k < 4:
        raise PreconditionError(f"only {k} tail samples; need at least 4")
    tail = run.slope_series[n - k :]
    lo, hi = float(tail.min()), float(tail.max())
    return lo, hi, hi - lo


def effective_value(r: Realization, theta: float, t_end: float = 50.0, dx: float = 1 / 64, cells: int = 1,
                    half_width=None, nsamples: int = 40, sigma_mode="reduced", correct_bias: bool = True):
    """Long-time slope estimate of the effective Hamiltonian at theta.

    Periodic media use the shifted-periodic grid over whole periods.  For other
    media a linear-ghost grid wide enough for the domain of dependence is used.
    With ``correct_bias`` the estimate is u(T,0)/T corrected for the bounded
    offset: (u(T) - u(T/2)) / (T/2), which removes the O(1/T) term.
    """
    per = r.period
    if per is not None and per > 0:
        grid = Grid1D.periodic_cells(per, cells, dx, theta, sigma_mode=sigma_mode)
    elif per == 0.0:
        grid = Grid1D.periodic_cells(1.0, 1, dx, theta, sigma_mode=sigma_mode)
    else:
        d = 1.1 * float(np.max(np.abs(r.eval_dH(0.0, np.linspace(theta - 3, theta + 3, 61)))))
        hw = half_width or (d * t_end + 20 * r.correlation_length)
        grid = Grid1D.around_zero(hw, dx, theta, sigma_mode=sigma_mode)
    ts = np.linspace(t_end / nsamples, t_end, nsamples)
    run = solve_ehj(r, grid, t_end, ts)
    if correct_bias:
        j = int(np.argmin(np.abs(ts - t_end / 2)))
        run.notes.append("bias-corrected slope (u(T) - u(T/2)) / (T - T/2) available as run.secant")
        run.secant = float((run.u_center[-1] - run.u_center[j]) / (ts[-1] - ts[j]))
    return run


# ---------------------------------------------------------------- epsilon study


@dataclass
class EpsilonTable:
    eps: np.ndarray
    values: np.ndarray  # u^eps(t_obs, 0)
    diffs: np.ndarray  # |u^eps - u^{eps/2}| for consecutive entries
    extrapolated: float
    t_obs: float
    notes: list = field(default_factory=list)


def epsilon_study(r: Realization, theta: float, eps_list, t_obs: float = 1.0, dx: float = 1 / 64, cells: int = 1,
                  half_width=None, max_nodes: int = 2_000_000) -> EpsilonTable:
    """u^eps(t_obs, 0) = eps * u(t_obs / eps, 0) for the unscaled equation with datum theta x."""
    eps = np.asarray(eps_list, float)
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise PreconditionError("eps_list must be positive and strictly decreasing")
    vals, notes = [], []
    per = r.period
    T = t_obs / eps[-1]
    ts = np.sort(t_obs / eps)
    if per is not None and per > 0:
        grid = Grid1D.periodic_cells(per, cells, dx, theta)
    elif per == 0.0:
        grid = Grid1D.periodic_cells(1.0, 1, dx, theta)
    else:
        d = 1.1 * float(np.max(np.abs(r.eval_dH(0.0, np.linspace(theta - 3, theta + 3, 61)))))
        hw = half_width or (d * T + 20 * r.correlation_length)
        grid = Grid1D.around_zero(hw, dx, theta)
        if grid.nx > max_nodes:
            keep = [e for e in eps if (d * t_obs / e + 20 * r.correlation_length) / dx * 2 <= max_nodes]
            notes.append(f"memory budget: truncated eps list to {len(keep)} entries")
            eps = np.asarray(keep)
            ts = np.sort(t_obs / eps)
            grid = Grid1D.around_zero(d * ts[-1] + 20 * r.correlation_length, dx, theta)
    # one run covers every horizon since the unscaled equation does not depend on eps
    run = solve_ehj(r, grid, float(ts[-1]), ts)
    by_t = dict(zip(np.round(run.times, 12), run.u_center))
    for e in eps:
        vals.append(e * by_t[round(t_obs / e, 12)])
    vals = np.array(vals)
    diffs = np.abs(np.diff(vals))
    # u^eps = L + c eps + o(eps): Richardson on the last pair
    ext = 2 * vals[-1] - vals[-2] if vals.size >= 2 else vals[-1]
    return EpsilonTable(eps, vals, diffs, float(ext), t_obs, notes)


# ---------------------------------------------------------------- comparison


@dataclass
class ComparisonVerdict:
    passed: bool
    initial_gap: float  # max(v0 - w0)
    max_gap: float  # max over nodes and sampled times of (v - w)
    slack: float


def comparison_check(r: Realization, grid: Grid1D, v0, w0, t_end: float, nsamples: int = 10,
                     slack: float | None = None) -> ComparisonVerdict:
    """Evolve v0 <= w0 with one fixed monotone scheme and check max(v - w) never exceeds max(v0 - w0)."""
    v = np.ascontiguousarray(np.asarray(v0, float).copy())
    w = np.ascontiguousarray(np.asarray(w0, float).copy())
    if v.shape != (grid.nx,) or w.shape != (grid.nx,):
        raise PreconditionError("data must live on the grid nodes")
    gap0 = float(np.max(v - w))
    scale = max(float(np.max(np.abs(v))), float(np.max(np.abs(w))), 1.0)
    tol = slack if slack is not None else 64 * np.finfo(float).eps * scale * max(1.0, t_end)
    d = max(_slope_need(r, grid, v), _slope_need(r, grid, w))
    while True:
        st = _Stepper(r, grid, d_fixed=1.5 * d)
        vv, ww = v.copy(), w.copy()
        try:
            worst = gap0
            for tk in np.linspace(t_end / nsamples, t_end, nsamples):
                t_prev = tk - t_end / nsamples
                st.advance([vv, ww], t_prev, tk)
                worst = max(worst, float(np.max(vv - ww)))
            break
        except NumericalError as e:
            if "fixed dissipation" not in str(e):
                raise
            d *= 2.0
    return ComparisonVerdict(worst <= gap0 + tol, gap0, worst, tol)


__all__ = [
    "Grid1D", "ParabolicRun", "solve_ehj", "estimate_HL_HU", "effective_value", "EpsilonTable",
    "epsilon_study", "ComparisonVerdict", "comparison_check",
]

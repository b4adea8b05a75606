"""Bounded solutions of the corrector ODE  a(x) f' + H(x, f) = lam.

The ODE is scalar, so trajectories never cross.  Above the admissible band
H > lam and f decreases; below it f also decreases.  Forward in x the region
above the bounded solutions therefore attracts, and backward in x the region
below attracts.  The maximal bounded solution is the pullback limit of a
forward sweep started at the band top, the minimal one is the pullback limit
of a backward sweep started at the band bottom.  Both sweeps run in their
stable direction, so the result is accurate to the RK4 truncation error.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from . import _kernels as K
from .env import Realization, truncate_superquadratic
from .errors import NumericalError, PreconditionError

DELTA = 1e-10  # band offset delta in p_bounds(lam + delta)
BOX_PAD = 1.0


# ---------------------------------------------------------------- band


@dataclass(frozen=True)
class AdmissibleBand:
    lam: float
    p_minus: float  # -inf when empty
    p_plus: float  # +inf when empty
    empty: bool = False
    argmin_x: float = float("nan")
    argmax_x: float = float("nan")


def coercivity_radius(r: Realization, lam: float) -> float:
    c = r.cls
    return ((max(lam, 0.0) + 1.0 / c.alpha0) / c.alpha0) ** (1.0 / c.gamma) + 1.0


def _edges_at(r, lam, xs, R):
    C, _ = r.tabulate(xs)
    while True:
        lo, hi = K.sublevel_edges(C, r.kinds, r.expos, r.trunc, lam, R, 400, 60)
        ends = r.eval_H(np.concatenate([xs, xs]), np.concatenate([np.full(xs.size, R), np.full(xs.size, -R)]))
        if np.all(ends > lam) or R > 1e6:
            return lo, hi
        R *= 2.0


def p_bounds(r: Realization, lam: float, x_window=(-10.0, 10.0), step=None) -> AdmissibleBand:
    """p^-_lam = inf_x inf{H(x,.) <= lam}, p^+_lam = sup_x sup{...}, over the window.

    Scans x at ``step`` (default resolution / 8) and refines around the best node.
    Results are memoized on the realization.
    """
    key = (float(lam), float(x_window[0]), float(x_window[1]), step)
    memo = r.__dict__.setdefault("_band_memo", {})
    if key not in memo:
        if len(memo) > 256:
            memo.clear()
        memo[key] = _p_bounds(r, lam, x_window, step)
    return memo[key]


def _p_bounds(r, lam, x_window, step):
    x0, x1 = x_window
    h = step or r.resolution / 8
    n = 1 if r.x_free else max(int(math.ceil((x1 - x0) / h)), 1)
    xs = np.linspace(x0, x1, n + 1)
    R = coercivity_radius(r, lam)
    lo, hi = _edges_at(r, lam, xs, R)
    if np.all(np.isnan(hi)):
        return AdmissibleBand(lam, -math.inf, math.inf, True)
    imax = int(np.nanargmax(hi))
    imin = int(np.nanargmin(lo))

    def refine(i, arr, sign):
        # maximize sign * edge(x) near the grid optimum
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, n)]
        best_x, best = xs[i], arr[i]
        if b <= a or r.x_free:
            return best_x, best

        def obj(x):
            l, u = _edges_at(r, lam, np.array([x]), R)
            v = u[0] if sign > 0 else l[0]
            return -sign * v if v == v else math.inf

        res = minimize_scalar(obj, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
        if res.fun < -sign * best:
            return float(res.x), -sign * float(res.fun)
        return best_x, best

    xp, pp = refine(imax, hi, +1)
    xm, pm = refine(imin, lo, -1)
    return AdmissibleBand(lam, float(pm), float(pp), False, xm, xp)


def safety_box(r: Realization, lam: float, x_window) -> tuple[float, float]:
    b = p_bounds(r, lam + 1.0, x_window)
    return b.p_minus - BOX_PAD, b.p_plus + BOX_PAD


# ---------------------------------------------------------------- single trajectories


@dataclass
class Trajectory:
    x: np.ndarray
    f: np.ndarray
    exited: bool
    exit_x: float = float("nan")
    method: str = "RK45"

    @property
    def blowup(self):
        return self.exited


def integrate_ivp(r: Realization, lam: float, x0: float, f0: float, direction: int, x_stop: float,
                  tol: float = 1e-10, box=None, max_step=None) -> Trajectory:
    """Adaptive integration of f' = (lam - H(x, f)) / a(x) from (x0, f0) toward x_stop.

    Stops early, with ``exited`` set, when f leaves ``box`` (default: the safety box).
    """
    if direction not in (1, -1) or (x_stop - x0) * direction < 0:
        raise PreconditionError("x_stop must lie in the integration direction")
    if box is None:
        lo_w, hi_w = sorted((x0, x_stop))
        box = safety_box(r, lam, (lo_w, hi_w))
    lo, hi = box

    def rhs(x, y):
        a = r.eval_a(x)
        h = r.eval_H(x, y[0])
        if not (a == a and h == h):
            raise NumericalError("NaN in environment coefficients", where=float(x))
        return [(lam - h) / a]

    def leave_lo(x, y):
        return y[0] - lo

    def leave_hi(x, y):
        return hi - y[0]

    leave_lo.terminal = leave_hi.terminal = True
    span = (x0, x_stop)
    ms = max_step or r.resolution / 8
    sol = solve_ivp(rhs, span, [f0], method="RK45", rtol=tol, atol=tol, events=(leave_lo, leave_hi),
                    max_step=ms, dense_output=False)
    method = "RK45"
    if sol.status == -1:
        # stiff fallback: implicit integrator
        sol = solve_ivp(rhs, span, [f0], method="Radau", rtol=tol, atol=tol, events=(leave_lo, leave_hi),
                        max_step=ms)
        method = "Radau"
        if sol.status == -1:
            raise NumericalError(f"step size underflow: {sol.message}", where=float(sol.t[-1]))
    exited = sol.status == 1
    ex = float(sol.t[-1]) if exited else float("nan")
    return Trajectory(sol.t, sol.y[0], exited, ex, method)


# ---------------------------------------------------------------- sweep grids


class SweepGrid:
    """Uniform node grid with coefficients tabulated at half steps.

    Nodes x_i = x_start + i h, i = 0..N.  The window [x_lo, x_hi] lies on
    nodes i_lo..i_hi; the rest is burn-in on both sides.
    """

    def __init__(self, r: Realization, window, burn: float, h: float):
        x_lo, x_hi = map(float, window)
        if not x_hi > x_lo:
            raise PreconditionError("empty window")
        m = max(int(math.ceil((x_hi - x_lo) / h)), 8)
        self.h = (x_hi - x_lo) / m
        nb = int(math.ceil(burn / self.h))
        self.r = r
        self.window = (x_lo, x_hi)
        self.i_lo, self.i_hi = nb, nb + m
        self.N = m + 2 * nb
        self.x_start = x_lo - nb * self.h
        self.x = self.x_start + self.h * np.arange(self.N + 1)
        self.x[self.i_lo] = x_lo
        self.x[self.i_hi] = x_hi
        half = self.x_start + 0.5 * self.h * np.arange(2 * self.N + 1)
        self.C, self.A = r.tabulate(half)
        if not (np.all(np.isfinite(self.C)) and np.all(np.isfinite(self.A))):
            raise NumericalError("NaN in environment coefficients")

    @property
    def xw(self):
        return self.x[self.i_lo : self.i_hi + 1]

    def node_C(self, sl=slice(None)):
        return np.ascontiguousarray(self.C[:, ::2][:, sl])

    def sweep(self, lam, i0, i1, f0, box):
        out = np.full(self.N + 1, np.nan)
        ex = K.rk4_sweep(self.C, self.A, self.r.kinds, self.r.expos, self.r.trunc, float(lam),
                         int(i0), int(i1), float(f0), self.h, float(box[0]), float(box[1]), out)
        return out, int(ex)


def choose_step(r: Realization, box, h_max=None) -> float:
    """RK4 step: resolve the coefficients and keep h * |dH/dp| / a well inside stability."""
    xs = np.linspace(-2 * r.correlation_length, 2 * r.correlation_length, 513)
    C, A = r.tabulate(xs)
    lip = 0.0
    for p in np.linspace(box[0], box[1], 65):
        d = np.abs(K.ham_dp_nodes(C, r.kinds, r.expos, r.trunc, np.full(xs.size, p)))
        lip = max(lip, float(np.max(d / A)))
    h = min(r.resolution / 32, 0.5 / max(lip, 1e-12), h_max or math.inf)
    return h


def default_window(r: Realization, periods: float = 200.0):
    half = 0.5 * periods * r.correlation_length
    return (-half, half)


# ---------------------------------------------------------------- corrector solutions


@dataclass
class CorrectorSolution:
    lam: float
    window: tuple
    grid_x: np.ndarray
    f: np.ndarray
    f_prime: np.ndarray
    residual_sup: float
    role: str
    band: tuple = (math.nan, math.nan)  # (p^-, p^+) at lam + delta
    tol: float = 1e-6
    defect: float = 0.0  # pullback convergence indicator
    notes: list = field(default_factory=list)

    def mean(self, trim: float = 0.1) -> float:
        """Spatial average over the central (1 - 2 trim) part of the window."""
        n = self.f.size
        a, b = int(round(trim * (n - 1))), int(round((1 - trim) * (n - 1)))
        seg = self.f[a : b + 1]
        return float(0.5 * (seg[:-1] + seg[1:]).mean()) if seg.size > 1 else float(seg[0])

    def at(self, x):
        return np.interp(x, self.grid_x, self.f)

    def to_csv(self, path, r: Realization | None = None):
        res = np.full(self.f.size, np.nan)
        if r is not None:
            res = residual_profile(r, self.lam, self.grid_x, self.f)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "f", "f_prime", "residual"])
            for row in zip(self.grid_x, self.f, self.f_prime, res):
                w.writerow([repr(float(v)) for v in row])
        with open(str(path).rsplit(".", 1)[0] + ".json", "w") as fh:
            json.dump(self.header(), fh, indent=2)

    def header(self):
        return {
            "lambda": self.lam,
            "window": list(self.window),
            "role": self.role,
            "residual_sup": self.residual_sup,
            "tol": self.tol,
            "band": list(self.band),
            "defect": self.defect,
            "notes": self.notes,
        }


def d1_sixth(f, h):
    """Sixth-order central first derivative at interior nodes (3 nodes lost per side)."""
    c = (-f[:-6] + 9 * f[1:-5] - 45 * f[2:-4] + 45 * f[4:-2] - 9 * f[5:-1] + f[6:]) / (60 * h)
    return c


def residual_profile(r: Realization, lam, x, f):
    """|a f' + H(x, f) - lam| with f' from an independent sixth-order difference (NaN at the 3 edge nodes)."""
    h = (x[-1] - x[0]) / (x.size - 1)
    out = np.full(f.size, np.nan)
    if f.size < 7:
        return out
    fp = d1_sixth(f, h)
    xi = x[3:-3]
    out[3:-3] = np.abs(r.eval_a(xi) * fp + r.eval_H(xi, f[3:-3]) - lam)
    return out


def _prepare(r: Realization, lam: float, window):
    """Superquadratic regime for the cell problem: truncate outside the safety box when gamma <= 2."""
    box = safety_box(r, lam, window)
    if r.cls.gamma <= 2:
        K_ = max(abs(box[0]), abs(box[1])) + 1.0
        r = truncate_superquadratic(r, K_)
    return r, box


def _solution(grid: SweepGrid, lam, traj, role, band, tol, defect):
    r = grid.r
    f = traj[grid.i_lo : grid.i_hi + 1].copy()
    x = grid.xw.copy()
    C = grid.node_C(slice(grid.i_lo, grid.i_hi + 1))
    A = grid.A[::2][grid.i_lo : grid.i_hi + 1]
    fp = (lam - K.ham_nodes(C, r.kinds, r.expos, r.trunc, f)) / A
    res = residual_profile(r, lam, x, f)
    rs = float(np.nanmax(res)) if np.any(np.isfinite(res)) else 0.0
    return CorrectorSolution(lam, grid.window, x, f, fp, rs, role, band, tol, defect)


@dataclass
class SolverConfig:
    burn: float | None = None  # default: max(20 correlation lengths, window length / 4)
    h: float | None = None
    tol: float = 1e-6
    delta: float = DELTA


def make_grid(r: Realization, lam_hi: float, window, cfg: SolverConfig | None = None) -> SweepGrid:
    cfg = cfg or SolverConfig()
    box = safety_box(r, lam_hi, window)
    h = cfg.h or choose_step(r, box)
    L = window[1] - window[0]
    burn = cfg.burn if cfg.burn is not None else max(20 * r.correlation_length, 0.25 * L)
    return SweepGrid(r, window, burn, h)


def bounded_solution_window(r: Realization, lam: float, window=None, target: str = "maximal",
                            tol: float = 1e-6, grid: SweepGrid | None = None, cfg: SolverConfig | None = None):
    """Extremal bounded solution of the corrector ODE restricted to ``window``.

    Raises NumericalError when no bounded solution survives the window
    (the numerical signal of lam < lam0 on this window).
    """
    if target not in ("maximal", "minimal"):
        raise PreconditionError(f"target must be minimal or maximal, got {target!r}")
    cfg = cfg or SolverConfig(tol=tol)
    window = window or (grid.window if grid else default_window(r))
    r2, box = _prepare(r, lam, window)
    band = p_bounds(r2, lam + cfg.delta, window)
    if band.empty:
        raise NumericalError(f"empty band at lambda={lam:.6g}: below min H")
    if grid is None:
        # a grid tabulated without truncation is still exact: the sweep never leaves the safety box
        grid = make_grid(r2, lam, window, cfg)
    if target == "maximal":
        traj, ex = grid.sweep(lam, 0, grid.N, band.p_plus, box)
        alt, _ = grid.sweep(lam, 0, grid.N, box[1], box)
    else:
        traj, ex = grid.sweep(lam, grid.N, 0, band.p_minus, box)
        alt, _ = grid.sweep(lam, grid.N, 0, box[0], box)
    if ex >= 0:
        raise NumericalError(f"no bounded solution at lambda={lam:.8g} on window {window}", where=float(grid.x[ex]))
    i_ref = grid.i_lo if target == "maximal" else grid.i_hi
    defect = float(abs(alt[i_ref] - traj[i_ref]))
    sol = _solution(grid, lam, traj, target, (band.p_minus, band.p_plus), cfg.tol, defect)
    if defect > cfg.tol:
        sol.notes.append(f"pullback not converged at window edge: defect {defect:.3g}")
    return sol


def extremal_pair(r, lam, window=None, tol=1e-6, grid=None, cfg=None):
    lo = bounded_solution_window(r, lam, window, "minimal", tol, grid, cfg)
    hi = bounded_solution_window(r, lam, window, "maximal", tol, grid, cfg)
    return lo, hi


# ---------------------------------------------------------------- critical value


@dataclass
class Lambda0Estimate:
    value: float
    bracket: tuple
    window: tuple
    per_window: list  # (length, estimate) pairs
    extrapolated: float
    lower_bound: float  # min H, a hard floor
    notes: list = field(default_factory=list)

    def __float__(self):
        return float(self.value)


def min_H(r: Realization, window) -> float:
    """min over the window of min_p H(x, p); refined in x around the grid minimizer."""
    x0, x1 = window
    xs = np.linspace(x0, x1, 2 if r.x_free else max(int((x1 - x0) / (r.resolution / 16)), 64) + 1)
    R = coercivity_radius(r, 1.0)

    def prof(x):
        C, _ = r.tabulate(np.atleast_1d(x))
        return K.min_over_p(C, r.kinds, r.expos, r.trunc, R, 128)[0]

    v = prof(xs)
    i = int(np.argmin(v))
    best = float(v[i])
    if not r.x_free:
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
        res = minimize_scalar(lambda x: float(prof(x)[0]), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-10})
        best = min(best, float(res.fun))
    return best


def _lambda0_on_window(r: Realization, window, tol, cfg):
    x0, x1 = window
    minH = min_H(r, window)
    xs = np.linspace(x0, x1, 2 if r.x_free else max(int((x1 - x0) / (r.resolution / 16)), 64) + 1)
    H0 = float(r.eval_H(xs, 0.0).max())
    lo = minH - tol
    hi = min(r.cls.alpha1, H0) + tol
    hi_max = max(r.cls.alpha1, H0) + 1.0
    # one box for the whole bisection: the box of the largest level tried
    r2, box = _prepare(r, hi_max, window)
    g = SweepGrid(r2, window, 0.0, cfg.h or choose_step(r2, box))

    def ok(lam):
        # start above every bounded solution; a bounded solution exists iff the
        # pullback sweep from the top survives the window
        _, ex = g.sweep(lam, 0, g.N, box[1], box)
        return ex < 0

    if not ok(hi):
        if not ok(hi_max):
            raise NumericalError("lambda0 predicate false at the upper bracket; predicate not monotone")
        hi = hi_max
    if ok(lo):
        return lo, (lo, hi), minH
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi, (lo, hi), minH


def estimate_lambda0(r: Realization, window=None, tol: float = 1e-7, richardson: int = 3,
                     cfg: SolverConfig | None = None) -> Lambda0Estimate:
    """Critical value: smallest lam admitting a bounded solution, from bisection on the window predicate.

    The finite-window value sits below the true one by roughly c / L^2, so the
    estimate is repeated on doubled windows and Richardson-extrapolated.  The
    result never goes below min H, which is a hard lower bound.
    """
    cfg = cfg or SolverConfig()
    window = window or default_window(r, 1000.0)
    x0, x1 = window
    c = 0.5 * (x0 + x1)
    L = x1 - x0
    per = []
    brackets = None
    minH = None
    for k in range(max(richardson, 1)):
        Lk = L * 2**k
        v, br, minH = _lambda0_on_window(r, (c - Lk / 2, c + Lk / 2), tol, cfg)
        per.append((Lk, v))
        brackets = br
    vals = [v for _, v in per]
    if len(vals) >= 2:
        ext = vals[-1] + (vals[-1] - vals[-2]) / 3.0
    else:
        ext = vals[-1]
    notes = []
    if len(vals) >= 3:
        d1, d2 = vals[1] - vals[0], vals[2] - vals[1]
        if d1 > 0 and d2 > 0 and abs(d1 / d2 - 4.0) > 2.0:
            notes.append(f"window convergence ratio {d1 / d2:.2f}, expected near 4")
    ext = max(ext, minH)
    if r.x_free:
        # no window effect without x-dependence: the bracket collapses at min H
        ext = max(vals[-1], minH)
    return Lambda0Estimate(ext, brackets, window, per, ext, minH, notes)


# ---------------------------------------------------------------- insertion, ordering, potentials


def _as_callable(m):
    if callable(m):
        return m
    v = float(m)
    return lambda x: np.full(np.shape(x), v)


def insert_between(r: Realization, m, M, lam: float, window, tol: float = 1e-6, cfg: SolverConfig | None = None):
    """Global solution inside the funnel (m, M).

    Case (i): m is a strict subsolution and M a strict supersolution in the
    forward sense (a m' + H(x, m) < lam < a M' + H(x, M)), so the funnel is
    forward invariant.  Case (ii) is the mirror image, backward invariant.
    """
    cfg = cfg or SolverConfig(tol=tol)
    mf, Mf = _as_callable(m), _as_callable(M)
    g = make_grid(r, lam, window, cfg)
    x = g.x
    lo, hi = mf(x), Mf(x)
    bad = np.nonzero(~(lo < hi))[0]
    if bad.size:
        raise PreconditionError(f"funnel requires m < M; violated at x={x[bad[0]]:.6g}")
    eps = 1e-6
    dm = (mf(x + eps) - mf(x - eps)) / (2 * eps)
    dM = (Mf(x + eps) - Mf(x - eps)) / (2 * eps)
    a = r.eval_a(x)
    Gm = a * dm + r.eval_H(x, lo) - lam
    GM = a * dM + r.eval_H(x, hi) - lam
    if np.all(Gm < 0) and np.all(GM > 0):
        direction = 1
    elif np.all(Gm > 0) and np.all(GM < 0):
        direction = -1
    else:
        i = int(np.argmax((Gm >= 0) & (GM <= 0) | (Gm <= 0) & (GM >= 0)))
        raise PreconditionError(
            f"sub/supersolution inequalities fail at x={x[i]:.6g} (m residual {Gm[i]:.3g}, M residual {GM[i]:.3g})"
        )
    out = np.full(g.N + 1, np.nan)
    i0, i1 = (0, g.N) if direction == 1 else (g.N, 0)
    idx, side = K.funnel_sweep(g.C, g.A, r.kinds, r.expos, r.trunc, float(lam), i0, i1,
                               float(0.5 * (lo[i0] + hi[i0])), g.h, lo, hi, out)
    if side != 0:
        raise NumericalError("trajectory left an invariant funnel; step too large", where=float(x[idx]))
    sol = _solution(g, lam, out, "inserted", (math.nan, math.nan), cfg.tol, 0.0)
    sol.notes.append(f"case {'i' if direction == 1 else 'ii'}")
    return sol


@dataclass
class Ordering:
    verdict: str  # identical | below | above | crossing
    min_gap: float  # min (f2 - f1) for below, min (f1 - f2) for above
    witness_x: float = float("nan")


def check_ordering(f1: CorrectorSolution, f2: CorrectorSolution, tol: float = 1e-9) -> Ordering:
    if f1.grid_x.size == f2.grid_x.size and np.array_equal(f1.grid_x, f2.grid_x):
        x, a, b = f1.grid_x, f1.f, f2.f
    else:
        lo = max(f1.grid_x[0], f2.grid_x[0])
        hi = min(f1.grid_x[-1], f2.grid_x[-1])
        n = max(np.sum((f1.grid_x >= lo) & (f1.grid_x <= hi)), np.sum((f2.grid_x >= lo) & (f2.grid_x <= hi)))
        x = np.linspace(lo, hi, int(n))
        a, b = f1.at(x), f2.at(x)
    d = b - a
    if np.max(np.abs(d)) <= tol:
        return Ordering("identical", 0.0)
    if np.all(d > -tol):
        i = int(np.argmin(d))
        return Ordering("below", float(d[i]), float(x[i]))
    if np.all(d < tol):
        i = int(np.argmax(d))
        return Ordering("above", float(-d[i]), float(x[i]))
    i = int(np.argmax(np.diff(np.sign(d)) != 0))
    return Ordering("crossing", float(np.min(np.abs(d))), float(x[i]))


@dataclass
class Potential:
    x: np.ndarray
    u: np.ndarray
    residual_sup: float


def corrector_potential(sol: CorrectorSolution, r: Realization | None = None) -> Potential:
    """Antiderivative u of f with u(mid) = 0.

    Trapezoid rule with the Euler-Maclaurin end correction h^2/12 (f'_b - f'_a),
    which is fourth order because f' is known exactly from the ODE.
    The stationary residual a u'' + H(x, u') - lam uses u'' = f' from the ODE and
    u' from a sixth-order difference of u, so it checks the integration itself.
    """
    x, f, fp = sol.grid_x, sol.f, sol.f_prime
    h = np.diff(x)
    u = np.concatenate([[0.0], np.cumsum(0.5 * h * (f[1:] + f[:-1]) - h**2 / 12 * (fp[1:] - fp[:-1]))])
    mid = 0.5 * (x[0] + x[-1])
    u -= np.interp(mid, x, u)
    res = 0.0
    if r is not None and x.size > 7:
        du = d1_sixth(u, (x[-1] - x[0]) / (x.size - 1))
        xi = x[3:-3]
        res = float(np.max(np.abs(r.eval_a(xi) * fp[3:-3] + r.eval_H(xi, du) - sol.lam)))
    return Potential(x, u, res)


def extrema_diagnostic(sol: CorrectorSolution, rel: float = 1e-9) -> int:
    """Number of strict local extrema of f: sign changes of f', ignoring tiny values."""
    fp = sol.f_prime
    thr = rel * max(float(np.max(np.abs(fp))), 1e-300)
    s = np.sign(np.where(np.abs(fp) > thr, fp, 0.0))
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


__all__ = [
    "AdmissibleBand", "CorrectorSolution", "Trajectory", "SweepGrid", "SolverConfig", "Lambda0Estimate",
    "p_bounds", "integrate_ivp", "bounded_solution_window", "extremal_pair", "estimate_lambda0",
    "insert_between", "check_ordering", "corrector_potential", "extrema_diagnostic", "make_grid",
    "residual_profile", "safety_box",
]

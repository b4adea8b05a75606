"""Shooting between two stationary solutions and the mollified gluing.

Given bounded solutions f1 < f2 of level lam, a descent shoot integrates the
level-mu ODE (mu < lam) forward from the upper solution and watches for the
first crossing of the lower one.  An ascent shoot (mu > lam) starts on f1 and
watches f2.  A crossing shows the funnel between f1 and f2 holds no bounded
solution of level mu; confinement over growing windows is evidence of one.

The glued function joins f2, the shooting trajectory and f1, smooths the two
corners with a hat kernel and blends back with a quintic cutoff.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .cell import CorrectorSolution, SweepGrid
from .env import Realization
from .errors import NumericalError, PreconditionError


@dataclass
class BridgeResult:
    mu: float
    lam: float
    kind: str  # descent | ascent
    start_x: float
    crossing_x: float  # +inf when confined
    x: np.ndarray
    g: np.ndarray  # trajectory on [start_x, crossing_x or window end]
    verdict: str  # crossed | confined
    min_gap_low: float  # min (g - f1) along the path
    min_gap_up: float  # min (f2 - g) along the path

    def to_csv(self, path, r: Realization | None = None):
        res = np.full(self.g.size, np.nan)
        if r is not None:
            res = (r.eval_a(self.x) * np.gradient(self.g, self.x) + r.eval_H(self.x, self.g)) if self.g.size > 1 else res
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "value", "residual"])
            for row in zip(self.x, self.g, res):
                w.writerow([repr(float(v)) for v in row])
        with open(str(path).rsplit(".", 1)[0] + ".json", "w") as fh:
            json.dump({"mu": self.mu, "lambda": self.lam, "kind": self.kind, "start_x": self.start_x,
                       "crossing_x": self.crossing_x, "verdict": self.verdict}, fh, indent=2)


def _common_grid(f1: CorrectorSolution, f2: CorrectorSolution):
    if f1.grid_x.size == f2.grid_x.size and np.array_equal(f1.grid_x, f2.grid_x):
        return f1.grid_x, f1.f, f2.f
    lo = max(f1.grid_x[0], f2.grid_x[0])
    hi = min(f1.grid_x[-1], f2.grid_x[-1])
    h = min(np.diff(f1.grid_x).mean(), np.diff(f2.grid_x).mean())
    n = int(math.ceil((hi - lo) / h))
    x = np.linspace(lo, hi, n + 1)
    return x, f1.at(x), f2.at(x)


class _PairGrid:
    """Sweep grid on the nodes shared by two solutions."""

    def __init__(self, r: Realization, f1: CorrectorSolution, f2: CorrectorSolution):
        x, a, b = _common_grid(f1, f2)
        if np.any(a >= b):
            i = int(np.argmax(a >= b))
            raise PreconditionError(f"need f1 < f2 on the window; fails at x={x[i]:.6g}")
        self.grid = SweepGrid(r, (x[0], x[-1]), 0.0, (x[-1] - x[0]) / (x.size - 1))
        self.x = self.grid.x
        self.low = np.ascontiguousarray(np.interp(self.x, x, a))
        self.up = np.ascontiguousarray(np.interp(self.x, x, b))
        self.r = r

    def index(self, xv):
        return int(np.clip(round((xv - self.x[0]) / self.grid.h), 0, self.grid.N))

    def run(self, mu, i0, i1, f0):
        g = self.grid
        out = np.full(g.N + 1, np.nan)
        idx, side = K.funnel_sweep(g.C, g.A, self.r.kinds, self.r.expos, self.r.trunc, float(mu), int(i0), int(i1),
                                   float(f0), g.h, self.low, self.up, out)
        return out, int(idx), int(side)


def _hermite_crossing(r, xa, xb, ga, gb, ta, tb, mu, lam_t):
    """Root of g - target on [xa, xb] from cubic Hermite data; both slopes come from their ODEs."""
    xx = np.array([xa, xb])
    a = r.eval_a(xx)
    dg = (mu - r.eval_H(xx, np.array([ga, gb]))) / a
    dt = (lam_t - r.eval_H(xx, np.array([ta, tb]))) / a
    h = xb - xa
    d0, d1 = ga - ta, gb - tb
    s0, s1 = (dg[0] - dt[0]) * h, (dg[1] - dt[1]) * h

    def cubic(t):
        h00, h10, h01, h11 = 2 * t**3 - 3 * t**2 + 1, t**3 - 2 * t**2 + t, -2 * t**3 + 3 * t**2, t**3 - t**2
        return h00 * d0 + h10 * s0 + h01 * d1 + h11 * s1

    if d0 == 0.0:
        t = 0.0
    elif np.sign(cubic(1.0)) == np.sign(d0):
        t = d0 / (d0 - d1) if d0 != d1 else 1.0
    else:
        t = brentq(cubic, 0.0, 1.0, xtol=1e-15)
    cx = float(xa + t * h)
    # target value at the crossing from the same Hermite construction
    h00, h10, h01, h11 = 2 * t**3 - 3 * t**2 + 1, t**3 - 2 * t**2 + t, -2 * t**3 + 3 * t**2, t**3 - t**2
    cv = float(h00 * ta + h10 * dt[0] * h + h01 * tb + h11 * dt[1] * h)
    return cx, cv


def _shoot(r, f1, f2, mu, n, kind, pair=None):
    lam = 0.5 * (f1.lam + f2.lam)
    if kind == "descent" and not mu < min(f1.lam, f2.lam):
        raise PreconditionError("descent needs mu < lambda")
    if kind == "ascent" and not mu > max(f1.lam, f2.lam):
        raise PreconditionError("ascent needs mu > lambda")
    pair = pair or _PairGrid(r, f1, f2)
    x = pair.x
    if not (x[0] <= -n + 1e-9 and x[-1] >= n - 1e-9):
        raise PreconditionError(f"window [{x[0]:.4g}, {x[-1]:.4g}] does not contain [-n, n] for n={n}")
    i0, i1 = pair.index(-n), pair.index(n)
    # start just inside the funnel: the first step moves off the boundary at rate |lam - mu| / a
    f0 = pair.up[i0] if kind == "descent" else pair.low[i0]
    out, idx, side = pair.run(mu, i0, i1, f0)
    if kind == "descent":
        out[i0] = f0
        bad = side == 1
    else:
        bad = side == -1
    if bad and idx > i0 + 1:
        raise NumericalError(f"{kind} trajectory left the funnel on the wrong side", where=float(x[idx]))
    if bad:
        # touched the starting boundary on the first step: treat as rounding, nudge inward and retry
        gap = pair.up[i0] - pair.low[i0]
        f0 = f0 - 1e-12 * gap if kind == "descent" else f0 + 1e-12 * gap
        out, idx, side = pair.run(mu, i0, i1, f0)
        if (kind == "descent" and side == 1) or (kind == "ascent" and side == -1):
            raise NumericalError(f"{kind} trajectory left the funnel on the wrong side", where=float(x[idx]))
    end = idx if side != 0 else i1
    xs = x[i0 : end + 1].copy()
    g = out[i0 : end + 1].copy()
    # the start node sits on a boundary by construction; gaps are measured after it
    j0, j1 = i0 + 1, end if side != 0 else end + 1
    if j1 > j0:
        lo_gap = float(np.min(out[j0:j1] - pair.low[j0:j1]))
        up_gap = float(np.min(pair.up[j0:j1] - out[j0:j1]))
    else:
        lo_gap = up_gap = 0.0
    if side != 0:
        # crossing between the last two nodes from the cubic Hermite interpolant
        tgt = pair.low if side == -1 else pair.up
        tgt_lam = (f1.lam if side == -1 else f2.lam)
        cx, cv = _hermite_crossing(r, x[idx - 1], x[idx], out[idx - 1], out[idx], tgt[idx - 1], tgt[idx], mu, tgt_lam)
        xs[-1] = cx
        g[-1] = cv
        return BridgeResult(mu, lam, kind, float(x[i0]), cx, xs, g, "crossed", lo_gap, up_gap)
    return BridgeResult(mu, lam, kind, float(x[i0]), math.inf, xs, g, "confined", lo_gap, up_gap)


def shoot_descend(r: Realization, f1: CorrectorSolution, f2: CorrectorSolution, mu: float, n: float,
                  pair=None) -> BridgeResult:
    """Level-mu trajectory from (-n, f2(-n)) forward until it meets f1 (mu < lambda)."""
    if np.array_equal(f1.f, f2.f):
        raise PreconditionError("f1 and f2 coincide; no funnel")
    return _shoot(r, f1, f2, mu, n, "descent", pair)


def shoot_ascend(r: Realization, f1: CorrectorSolution, f2: CorrectorSolution, mu: float, n: float,
                 pair=None) -> BridgeResult:
    """Level-mu trajectory from (-n, f1(-n)) forward until it meets f2 (mu > lambda)."""
    if np.array_equal(f1.f, f2.f):
        raise PreconditionError("f1 and f2 coincide; no funnel")
    return _shoot(r, f1, f2, mu, n, "ascent", pair)


# ---------------------------------------------------------------- funnel extremes


@dataclass
class FunnelExtremes:
    mu: float
    verdict: str  # confined | crossed
    x: np.ndarray
    g_low: np.ndarray | None  # smallest level-mu solution inside (f1, f2)
    g_high: np.ndarray | None  # largest one

    def means(self, trim=0.1):
        if self.g_low is None:
            return math.nan, math.nan
        n = self.x.size
        a, b = int(round(trim * (n - 1))), int(round((1 - trim) * (n - 1)))
        m = lambda v: float(0.5 * (v[a:b][:-1] + v[a:b][1:]).mean())  # noqa: E731
        return m(self.g_low), m(self.g_high)


def funnel_extremes(r: Realization, f1: CorrectorSolution, f2: CorrectorSolution, mu: float, burn: float,
                    pair=None) -> FunnelExtremes:
    """Extremal level-mu solutions confined to (f1, f2), restricted to the window shrunk by ``burn``.

    For mu above the funnel levels, both boundaries are crossed upward: the
    forward sweep from f1 converges to the lowest confined solution and the
    backward sweep from f2 to the highest.  Below, the roles flip.  Either
    sweep touching the far boundary means no level-mu solution fits.
    """
    pair = pair or _PairGrid(r, f1, f2)
    g = pair.grid
    ib = int(math.ceil(burn / g.h))
    if 2 * ib >= g.N:
        raise PreconditionError("burn-in longer than half the funnel window")
    above = mu > max(f1.lam, f2.lam)
    if not above and not mu < min(f1.lam, f2.lam):
        raise PreconditionError("mu must lie strictly above or below both funnel levels")
    gap = pair.up - pair.low
    if above:
        lo_run, _, s1 = pair.run(mu, 0, g.N, pair.low[0] + 1e-12 * gap[0])
        hi_run, _, s2 = pair.run(mu, g.N, 0, pair.up[g.N] - 1e-12 * gap[g.N])
    else:
        hi_run, _, s1 = pair.run(mu, 0, g.N, pair.up[0] - 1e-12 * gap[0])
        lo_run, _, s2 = pair.run(mu, g.N, 0, pair.low[g.N] + 1e-12 * gap[g.N])
    sl = slice(ib, g.N - ib + 1)
    if s1 != 0 or s2 != 0:
        return FunnelExtremes(mu, "crossed", g.x[sl].copy(), None, None)
    return FunnelExtremes(mu, "confined", g.x[sl].copy(), lo_run[sl].copy(), hi_run[sl].copy())


# ---------------------------------------------------------------- gluing


def smoothstep5(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10 - 15 * t + 6 * t * t)


def smoothstep5_d(t):
    inside = (t > 0) & (t < 1)
    return np.where(inside, 30 * t * t * (1 - t) ** 2, 0.0)


@dataclass
class GluedFunction:
    epsilon: float
    mu: float
    kind: str
    x: np.ndarray
    g_eps: np.ndarray
    residual: np.ndarray  # a g_eps' + H(x, g_eps) at every node
    pieces: tuple
    mollifier_index: int  # n: hat kernel half-width 1/n
    kernel_halfwidth: float
    cutoff: dict
    residual_min: float
    residual_max: float
    target: float  # mu - 2 eps (descent) or mu + 2 eps (ascent)
    satisfied: bool
    estimate_term: float  # (C_R + |xi'|) |g - g_n|
    notes: list = field(default_factory=list)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "value", "residual"])
            for row in zip(self.x, self.g_eps, self.residual):
                w.writerow([repr(float(v)) for v in row])
        hdr = {k: getattr(self, k) for k in ("epsilon", "mu", "kind", "mollifier_index", "kernel_halfwidth",
                                              "cutoff", "residual_min", "residual_max", "target", "satisfied",
                                              "estimate_term", "notes")}
        hdr["pieces"] = list(self.pieces)
        with open(str(path).rsplit(".", 1)[0] + ".json", "w") as fh:
            json.dump(hdr, fh, indent=2)


def _hat(k):
    w = 1.0 - np.abs(np.arange(-k, k + 1)) / (k + 1.0)
    return w / w.sum()


def mollify_glue(r: Realization, f_left: CorrectorSolution, f_right: CorrectorSolution, bridge: BridgeResult,
                 mu: float, epsilon: float, r_margin: float = 1.0, n_start: int | None = None,
                 n_cap: int = 1 << 16) -> GluedFunction:
    """Glue f_left | bridge | f_right, mollify, blend with a quintic cutoff and verify the one-sided residual.

    Descent: a g' + H(x, g) > mu - 2 eps at every node.  Ascent: < mu + 2 eps.
    The hat kernel is applied as a discrete convolution on the node grid, both
    to g and to its piecewise-known derivative; n grows until the inequality
    holds or n_cap is reached.
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    if bridge.verdict != "crossed" and not np.array_equal(f_left.f, f_right.f):
        raise PreconditionError("gluing needs a crossed bridge")
    x, fl, fr = _common_grid(f_left, f_right)
    h = (x[-1] - x[0]) / (x.size - 1)
    a = r.eval_a(x)
    lam_l, lam_r = f_left.lam, f_right.lam
    descent = bridge.kind == "descent"
    target = mu - 2 * epsilon if descent else mu + 2 * epsilon

    if np.array_equal(f_left.f, f_right.f):
        # nothing to bridge: the glued function is the solution itself
        res = a * f_left.f_prime + r.eval_H(x, fl)
        ok = bool(np.all(res > target)) if descent else bool(np.all(res < target))
        return GluedFunction(epsilon, mu, bridge.kind, x, fl.copy(), res, ("left", "none", "left"), 0, 0.0, {},
                             float(res.min()), float(res.max()), target, ok, 0.0, ["zero-length bridge"])

    xh, yh = bridge.start_x, bridge.crossing_x
    # piecewise g and its exact derivative from the three ODEs
    bx, bg = bridge.x, bridge.g
    in_b = (x >= xh) & (x <= yh)
    g = np.where(x < xh, fl, fr)
    g[in_b] = np.interp(x[in_b], bx, bg)
    dg = np.empty_like(g)
    left = x < xh
    right = x > yh
    dg[left] = (lam_l - r.eval_H(x[left], g[left])) / a[left]
    dg[right] = (lam_r - r.eval_H(x[right], g[right])) / a[right]
    dg[in_b] = (mu - r.eval_H(x[in_b], g[in_b])) / a[in_b]

    width = 0.5 * r_margin
    lo_edge, hi_edge = xh - r_margin, yh + r_margin
    if lo_edge < x[0] or hi_edge > x[-1]:
        raise PreconditionError("bridge region plus margin exceeds the solution window")
    # xi: 0 outside [xh - r, yh + r], 1 on [xh - r/2, yh + r/2]
    tl = (x - lo_edge) / width
    tr = (hi_edge - x) / width
    xi = np.minimum(smoothstep5(tl), smoothstep5(tr))
    dxi = np.where(tl < tr, smoothstep5_d(tl) / width, -smoothstep5_d(tr) / width)
    dxi_sup = 15.0 / (8.0 * width)
    support = (x > lo_edge) & (x < hi_edge)
    cutoff = {"outer": [lo_edge, hi_edge], "inner": [xh - width, yh + width], "width": width, "dxi_sup": dxi_sup}

    gmin, gmax = float(g.min()), float(g.max())
    P = np.linspace(gmin, gmax, 64)
    C_R = float(np.max(np.abs(r.eval_dH(x[support][:, None], P[None, :]))))

    # half-width 1/n in nodes: k = round(1/(n h)); start where the kernel spans ~ r/8
    n = n_start or max(1, int(math.ceil(8.0 / r_margin)))
    pad = int(math.ceil(1.0 / (n * h))) + 2
    while True:
        k = max(1, int(round(1.0 / (n * h))))
        ker = _hat(k)
        # convolve only where xi > 0; pad reaches outside the support by the kernel width
        i0 = max(int(np.argmax(support)) - k - 1, 0)
        i1 = min(len(x) - int(np.argmax(support[::-1])) + k + 1, len(x))
        gn = g.copy()
        dgn = dg.copy()
        seg = slice(i0, i1)
        gn[seg] = np.convolve(np.pad(g[seg], k, mode="edge"), ker, mode="valid")
        dgn[seg] = np.convolve(np.pad(dg[seg], k, mode="edge"), ker, mode="valid")
        ge = np.where(support, xi * gn + (1 - xi) * g, g)
        dge = np.where(support, dxi * (gn - g) + xi * dgn + (1 - xi) * dg, dg)
        res = a * dge + r.eval_H(x, ge)
        ok = bool(np.all(res > target)) if descent else bool(np.all(res < target))
        est = (C_R + dxi_sup) * float(np.max(np.abs(g[support] - gn[support])))
        if ok or k == 1 or n >= n_cap:
            break
        n *= 2
    notes = []
    if not ok:
        worst = int(np.argmin(res - target)) if descent else int(np.argmax(res - target))
        notes.append(f"inequality fails at x={x[worst]:.6g} with n={n} (kernel at grid resolution)")
    # outside the blended region the glued function is g exactly
    ge[~support] = g[~support]
    return GluedFunction(epsilon, mu, bridge.kind, x, ge, res, ("left", bridge.kind, "right"), n, k * h, cutoff,
                         float(res.min()), float(res.max()), target, ok, est, notes)


# ---------------------------------------------------------------- gap evidence


@dataclass
class GapLevelReport:
    mu: float
    verdict: str  # confined | crossed | inconclusive | skipped
    per_n: list  # (n, verdict, crossing_x)
    note: str = ""


def detect_gap_level(r: Realization, f1: CorrectorSolution, f2: CorrectorSolution, mu_grid, n_schedule=None):
    """Ascent or descent shoots over a window schedule for each mu.

    "crossed" at every n is evidence that no level-mu solution lies between f1 and f2.
    """
    lam = 0.5 * (f1.lam + f2.lam)
    ell = r.correlation_length
    ns = list(n_schedule) if n_schedule is not None else [10 * ell, 20 * ell, 40 * ell, 80 * ell]
    pair = _PairGrid(r, f1, f2)
    reach = min(-pair.x[0], pair.x[-1])
    out = []
    for mu in mu_grid:
        if abs(mu - lam) <= 1e-14 * max(1.0, abs(lam)) or min(f1.lam, f2.lam) <= mu <= max(f1.lam, f2.lam):
            out.append(GapLevelReport(float(mu), "skipped", [], "mu equals the funnel level"))
            continue
        per = []
        for n in ns:
            if n > reach:
                per.append((n, "skipped", math.nan))
                continue
            b = (shoot_descend if mu < lam else shoot_ascend)(r, f1, f2, mu, n, pair)
            per.append((n, b.verdict, b.crossing_x))
        vs = {v for _, v, _ in per if v != "skipped"}
        verdict = vs.pop() if len(vs) == 1 else ("inconclusive" if vs else "skipped")
        out.append(GapLevelReport(float(mu), verdict, per))
    return out


__all__ = [
    "BridgeResult", "GluedFunction", "FunnelExtremes", "GapLevelReport", "shoot_descend", "shoot_ascend",
    "funnel_extremes", "mollify_glue", "detect_gap_level", "smoothstep5",
]

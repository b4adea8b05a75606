"""Theta-map, its gaps and the effective Hamiltonian by inversion.

theta_max(lam) and theta_min(lam) are the spatial means of the maximal and
minimal bounded solutions.  Between the two extremal branches Im(Theta) may
contain further points coming from interior solutions.  A candidate gap
(theta1, theta2) at level lam* is either filled by such solutions or genuinely
empty.  The level-mu solutions trapped between the two boundary solutions
are exactly the funnel extremes of the bridge module: when every funnel
above lam* is crossed the gap is a flat part of the effective Hamiltonian.
Otherwise the funnel extremes trace two inner branches, which are inverted
together with the outer ones.
"""

from __future__ import annotations

import csv
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .bridge import _PairGrid, detect_gap_level, funnel_extremes
from .cell import (CorrectorSolution, SolverConfig, _prepare, bounded_solution_window, default_window,
                   estimate_lambda0, make_grid)
from .env import EnvironmentSpec, sample_realization
from .errors import NumericalError, PreconditionError


@dataclass
class ThetaConfig:
    window: tuple | None = None  # averaging window; default 200 correlation lengths centred at 0
    burn: float | None = None  # default max(20 correlation lengths, window / 4)
    trim: float = 0.1
    theta_res: float = 0.05  # theta steps above this are refined
    label_tol: float = 1e-4  # two lambda labels closer than this are one level
    max_refine: int = 12
    inner_points: int = 24
    max_depth: int = 2
    workers: int = 1
    h: float | None = None
    lambda0_window: float = 1000.0  # correlation lengths for the critical-value estimate


@dataclass
class ThetaSample:
    lam: float
    theta_min: float
    theta_max: float
    stderr: float
    seeds: list
    stderr_min: float = 0.0
    stderr_max: float = 0.0
    per_seed_min: dict = field(default_factory=dict)
    per_seed_max: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    flagged: bool = False

    @property
    def n_seeds(self):
        return len(self.seeds)


@dataclass
class Gap:
    theta1: float
    theta2: float
    lambda_left: float
    lambda_right: float
    kind: str  # bottom | max-branch | min-branch | inner | residual
    status: str = "pending"  # flat | filled | unresolved
    depth: int = 0
    evidence: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def label(self):
        return 0.5 * (self.lambda_left + self.lambda_right)

    def as_tuple(self):
        return (self.theta1, self.theta2, self.lambda_left, self.lambda_right)


# ---------------------------------------------------------------- engine


class _SeedState:
    def __init__(self, r, W, B):
        self.r = r
        self.W = W
        self.B = B
        self.W_ext = (W[0] - 2 * B, W[1] + 2 * B)
        self.grid = None
        self.lam_hi = -math.inf
        self.lock = threading.Lock()


class ThetaEngine:
    """Per-seed realizations, sweep grids and cached extremal solutions."""

    def __init__(self, spec: EnvironmentSpec, seeds=(0,), cfg: ThetaConfig | None = None):
        self.spec = spec
        self.seeds = [int(s) for s in seeds]
        if not self.seeds:
            raise PreconditionError("need at least one seed")
        self.cfg = cfg or ThetaConfig()
        self._st = {}
        self._samples = {}
        self._lock = threading.Lock()
        self.lambda0_est = None

    # -- per seed

    def state(self, seed) -> _SeedState:
        with self._lock:
            st = self._st.get(seed)
            if st is None:
                r = sample_realization(self.spec, seed)
                W = tuple(self.cfg.window) if self.cfg.window else default_window(r)
                L = W[1] - W[0]
                B = self.cfg.burn if self.cfg.burn is not None else max(20 * r.correlation_length, 0.25 * L)
                st = self._st[seed] = _SeedState(r, W, B)
            return st

    def realization(self, seed):
        return self.state(seed).r

    def _grid(self, st: _SeedState, lam):
        with st.lock:
            if st.grid is None or lam > st.lam_hi:
                lam_hi = max(lam, 2 * st.lam_hi if st.lam_hi > 0 else lam + 1.0)
                r2, _ = _prepare(st.r, lam_hi, st.W_ext)
                st.grid = make_grid(r2, lam_hi, st.W_ext, SolverConfig(burn=st.B, h=self.cfg.h))
                st.lam_hi = lam_hi
            return st.grid

    def solution(self, seed, lam, target) -> CorrectorSolution:
        st = self.state(seed)
        g = self._grid(st, lam)
        return bounded_solution_window(st.r, lam, st.W_ext, target, grid=g)

    def average(self, seed, x, f):
        """Mean of f over the central part of the averaging window; whole periods for periodic media."""
        st = self.state(seed)
        a, b = st.W
        c, half = 0.5 * (a + b), 0.5 * (b - a) * (1 - 2 * self.cfg.trim)
        P = st.r.period
        if P:
            half = max(math.floor(2 * half / P), 1) * P / 2
        F = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(x) * (f[1:] + f[:-1]))])
        lo, hi = c - half, c + half
        if lo < x[0] or hi > x[-1]:
            raise PreconditionError("averaging interval exceeds the solution window")
        return float((np.interp(hi, x, F) - np.interp(lo, x, F)) / (hi - lo))

    def _map(self, fn, items):
        w = max(int(self.cfg.workers), 1)
        if w == 1 or len(items) == 1:
            return [fn(i) for i in items]
        with ThreadPoolExecutor(w) as ex:
            return list(ex.map(fn, items))

    # -- critical value

    def lambda0(self):
        if self.lambda0_est is None:
            def one(seed):
                r = self.realization(seed)
                return estimate_lambda0(r, default_window(r, self.cfg.lambda0_window))

            ests = self._map(one, self.seeds)
            self.lambda0_per_seed = {s: e.value for s, e in zip(self.seeds, ests)}
            # the largest per-seed value admits bounded solutions on every realization
            self.lambda0_est = max(e.value for e in ests)
        return self.lambda0_est

    # -- samples

    def sample(self, lam) -> ThetaSample:
        lam = float(lam)
        if lam in self._samples:
            return self._samples[lam]

        def one(seed):
            try:
                lo = self.solution(seed, lam, "minimal")
                hi = self.solution(seed, lam, "maximal")
            except NumericalError as e:
                return seed, None, None, str(e)
            note = "; ".join(lo.notes + hi.notes)
            return seed, self.average(seed, lo.grid_x, lo.f), self.average(seed, hi.grid_x, hi.f), note

        res = self._map(one, self.seeds)
        ok = [(s, a, b) for s, a, b, _ in res if a is not None]
        notes = [f"seed {s}: {n}" for s, a, _, n in res if n]
        if not ok:
            smp = ThetaSample(lam, math.nan, math.nan, math.nan, [], notes=notes + ["all seeds failed: lambda below lambda0"])
            smp.flagged = True
            self._samples[lam] = smp
            return smp
        mins = np.array([a for _, a, _ in ok])
        maxs = np.array([b for _, _, b in ok])
        n = len(ok)
        se = (lambda v: float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0)  # noqa: E731
        smp = ThetaSample(lam, float(mins.mean()), float(maxs.mean()), max(se(mins), se(maxs)), [s for s, _, _ in ok],
                          se(mins), se(maxs), {s: a for s, a, _ in ok}, {s: b for s, _, b in ok}, notes)
        if n < len(self.seeds):
            smp.notes.append(f"{len(self.seeds) - n} seed(s) dropped")
        self._samples[lam] = smp
        return smp

    # -- funnels

    def funnel_solutions(self, seed, kind, lam_a, lam_b):
        """Boundary solutions (f1 < f2) of a candidate gap on the extended window."""
        if kind == "bottom":
            return self.solution(seed, lam_a, "minimal"), self.solution(seed, lam_a, "maximal")
        if kind == "max-branch":
            return self.solution(seed, lam_a, "maximal"), self.solution(seed, lam_b, "maximal")
        if kind == "min-branch":
            return self.solution(seed, lam_b, "minimal"), self.solution(seed, lam_a, "minimal")
        raise PreconditionError(f"unknown funnel kind {kind!r}")


def theta_of_lambda(spec: EnvironmentSpec, lam: float, seeds=(0,), window=None, cfg: ThetaConfig | None = None,
                    engine: ThetaEngine | None = None) -> ThetaSample:
    if engine is None:
        cfg = cfg or ThetaConfig()
        if window is not None:
            cfg.window = tuple(window)
        engine = ThetaEngine(spec, seeds, cfg)
    return engine.sample(lam)


# ---------------------------------------------------------------- map


@dataclass
class ThetaMap:
    samples: list
    lambda0: float
    flags: list = field(default_factory=list)
    engine: ThetaEngine | None = None
    inner: list = field(default_factory=list)  # (theta, lam, source)
    candidates: list = field(default_factory=list)
    demands: list = field(default_factory=list)

    @property
    def lambdas(self):
        return np.array([s.lam for s in self.samples])

    @property
    def theta_min(self):
        return np.array([s.theta_min for s in self.samples])

    @property
    def theta_max(self):
        return np.array([s.theta_max for s in self.samples])

    def insert(self, smp: ThetaSample):
        if smp.n_seeds == 0 or any(s.lam == smp.lam for s in self.samples):
            return
        self.samples.append(smp)
        self.samples.sort(key=lambda s: s.lam)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda", "theta_min", "theta_max", "stderr", "n_seeds"])
            for s in self.samples:
                w.writerow([repr(s.lam), repr(s.theta_min), repr(s.theta_max), repr(s.stderr), s.n_seeds])


def _paired_diff(a: dict, b: dict):
    common = [s for s in a if s in b]
    d = np.array([b[s] - a[s] for s in common])
    if d.size == 0:
        return math.nan, math.nan
    se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else 0.0
    return float(d.mean()), se


def check_monotone(samples):
    """Flags for non-increasing theta_max or non-decreasing theta_min between neighbours."""
    flags = []
    for s, t in zip(samples, samples[1:]):
        for name, sign, a, b in (("theta_max", 1, s.per_seed_max, t.per_seed_max),
                                 ("theta_min", -1, s.per_seed_min, t.per_seed_min)):
            d, se = _paired_diff(a, b)
            d *= sign
            if not d > 0:
                beyond = d < -3 * se
                t.flagged = t.flagged or beyond
                flags.append(f"{name} not strictly monotone between lambda={s.lam:.6g} and {t.lam:.6g} "
                             f"(step {d:.3g}, stderr {se:.2g}{', beyond 3 stderr: window too short?' if beyond else ''})")
    return flags


def check_disjoint(samples, k=3.0):
    """Pairs (i, j) whose {theta_min, theta_max} sets come within k stderr of each other."""
    bad = []
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            s, t = samples[i], samples[j]
            for a, sa in ((s.theta_min, s.stderr_min), (s.theta_max, s.stderr_max)):
                for b, sb in ((t.theta_min, t.stderr_min), (t.theta_max, t.stderr_max)):
                    if abs(a - b) <= k * math.hypot(sa, sb):
                        bad.append((i, j))
    return sorted(set(bad))


def build_theta_map(spec: EnvironmentSpec, lambda_grid, seeds=(0,), window=None, cfg: ThetaConfig | None = None,
                    engine: ThetaEngine | None = None, lambda0: float | None = None) -> ThetaMap:
    lams = sorted(float(v) for v in lambda_grid)
    if not lams:
        raise PreconditionError("empty lambda grid")
    if engine is None:
        cfg = cfg or ThetaConfig()
        if window is not None:
            cfg.window = tuple(window)
        engine = ThetaEngine(spec, seeds, cfg)
    l0 = engine.lambda0() if lambda0 is None else float(lambda0)
    if lambda0 is not None:
        engine.lambda0_est = l0
    tmap = ThetaMap([], l0, engine=engine)
    for lam in lams:
        smp = engine.sample(lam)
        if smp.n_seeds == 0:
            tmap.flags.append(f"lambda={lam:.8g}: no bounded solution on any seed (below lambda0 on this window)")
            continue
        if lam > l0 + engine.cfg.label_tol and smp.theta_max - smp.theta_min <= 0:
            smp.flagged = True
            tmap.flags.append(f"lambda={lam:.8g}: theta_min = theta_max above lambda0")
        tmap.insert(smp)
    if not tmap.samples:
        raise NumericalError(f"no level in [{lams[0]:.6g}, {lams[-1]:.6g}] admits a bounded solution on any seed")
    tmap.flags += check_monotone(tmap.samples)
    for i, j in check_disjoint(tmap.samples):
        tmap.flags.append(f"samples at lambda={tmap.samples[i].lam:.6g} and {tmap.samples[j].lam:.6g} "
                          f"not disjoint at 3 stderr")
    return tmap


# ---------------------------------------------------------------- refinement


def _bisect_jumps(pts, evaluate, theta_res, label_tol, max_refine):
    """Insert evaluations until consecutive theta steps are <= theta_res.

    ``pts`` is a list of (lam, theta) sorted by lam.  An interval whose lam width
    shrinks below label_tol while its theta step stays large is a jump.  An
    interval still open after max_refine halvings is a refinement demand.
    """
    jumps, demands = [], []
    out = [pts[0]]

    def rec(p, q, d):
        if abs(q[1] - p[1]) <= theta_res:
            out.append(q)
            return
        if q[0] - p[0] <= label_tol:
            jumps.append((p, q))
            out.append(q)
            return
        if d >= max_refine:
            demands.append((p, q))
            out.append(q)
            return
        m = 0.5 * (p[0] + q[0])
        e = evaluate(m)
        if e is None:
            demands.append((p, q))
            out.append(q)
            return
        rec(p, (m, e), d + 1)
        rec((m, e), q, d + 1)

    for p, q in zip(pts, pts[1:]):
        rec(p, q, 0)
    return out, jumps, demands


# ---------------------------------------------------------------- gaps


class _Funnel:
    """Boundary solutions per seed plus cached pair grids and funnel extremes."""

    def __init__(self, engine, f1s: dict, f2s: dict, lam_star, burn):
        self.engine = engine
        self.f1s, self.f2s = f1s, f2s
        self.lam_star = lam_star
        self.burn = burn
        self.pairs = {}
        self.cache = {}

    def pair(self, seed):
        if seed not in self.pairs:
            self.pairs[seed] = _PairGrid(self.engine.realization(seed), self.f1s[seed], self.f2s[seed])
        return self.pairs[seed]

    def extremes(self, mu):
        mu = float(mu)
        if mu not in self.cache:
            def one(seed):
                return funnel_extremes(self.engine.realization(seed), self.f1s[seed], self.f2s[seed], mu, self.burn,
                                       self.pair(seed))

            fx = dict(zip(self.f1s, self.engine._map(one, list(self.f1s))))
            verdicts = {v.verdict for v in fx.values()}
            if verdicts == {"confined"}:
                lo = np.mean([self.engine.average(s, v.x, v.g_low) for s, v in fx.items()])
                hi = np.mean([self.engine.average(s, v.x, v.g_high) for s, v in fx.items()])
                self.cache[mu] = ("confined", float(lo), float(hi), fx)
            else:
                self.cache[mu] = ("crossed" if verdicts == {"crossed"} else "mixed", math.nan, math.nan, fx)
        return self.cache[mu]

    def h_max(self):
        """Largest H over the funnel: above it every level-mu path climbs out."""
        top = -math.inf
        for s in self.f1s:
            r = self.engine.realization(s)
            x = self.f1s[s].grid_x
            P = np.linspace(float(self.f1s[s].f.min()), float(self.f2s[s].f.max()), 129)
            step = max(x.size // 4096, 1)
            top = max(top, float(np.max(r.eval_H(x[::step, None], P[None, :]))))
        return top


def _as_solution(x, g, lam, window, role):
    return CorrectorSolution(lam, window, x, g, np.gradient(g, x), math.nan, role)


def _resolve(tmap: ThetaMap, gap: Gap, funnel: _Funnel, depth: int):
    """Decide whether a candidate gap is flat; otherwise record its inner branches and recurse."""
    eng = tmap.engine
    cfg = eng.cfg
    lam_star = max(gap.lambda_left, gap.lambda_right)
    top = funnel.h_max()
    mu_up = top + 0.05 * max(top - lam_star, 0.0) + 1e-3
    s = np.linspace(0.0, 1.0, cfg.inner_points + 1)[1:]
    mus = lam_star + (mu_up - lam_star) * s**2
    states = [(mu, funnel.extremes(mu)) for mu in mus]
    gap.evidence.append({"probe": "ascent", "mu": float(mus[0]), "verdict": states[0][1][0]})
    if states[0][1][0] != "confined":
        gap.status = "flat"
        gap.notes.append(f"funnel empty above lambda={lam_star:.8g} (first probe mu={mus[0]:.6g})")
        return
    # confined set is an interval (lam*, mu*); locate mu* by bisection
    k = next((i for i, (_, st) in enumerate(states) if st[0] != "confined"), None)
    if k is None:
        gap.status = "unresolved"
        gap.notes.append("funnel still confined at the top probe; window too short for the crossing")
        tmap.demands.append(("funnel top", gap.as_tuple()))
        return
    mu_c, mu_x = float(mus[k - 1]), float(mus[k])
    while mu_x - mu_c > cfg.label_tol:
        m = 0.5 * (mu_c + mu_x)
        if funnel.extremes(m)[0] == "confined":
            mu_c = m
        else:
            mu_x = m
    gap.status = "filled"
    gap.notes.append(f"inner branches on ({lam_star:.8g}, {mu_c:.8g}]")

    def ev(which):
        def f(mu):
            st = funnel.extremes(mu)
            return st[1 if which == "lo" else 2] if st[0] == "confined" else None

        return f

    conf = sorted(m for m, st in funnel.cache.items() if st[0] == "confined" and m <= mu_c)
    branches = {}
    for which, start in (("lo", gap.theta1), ("hi", gap.theta2)):
        pts = [(lam_star, start)] + [(m, ev(which)(m)) for m in conf]
        pts, jumps, demands = _bisect_jumps(pts, ev(which), cfg.theta_res, cfg.label_tol, cfg.max_refine)
        branches[which] = pts
        for m, th in pts[1:]:
            tmap.inner.append((th, m, f"inner-{which}:{gap.kind}@{lam_star:.6g}"))
        for p, q in demands:
            tmap.demands.append((f"inner-{which}", p, q))
        for p, q in jumps:
            _inner_jump(tmap, gap, funnel, which, p, q, depth)
    # residual gap where the inner branches stop before meeting
    th_lo, th_hi = funnel.extremes(mu_c)[1], funnel.extremes(mu_c)[2]
    if th_hi - th_lo > cfg.theta_res:
        sub = Gap(th_lo, th_hi, mu_c, mu_x, "residual", "flat", depth + 1)
        sub.evidence.append({"probe": "ascent", "mu": mu_x, "verdict": "crossed"})
        sub.notes.append("inner branches end apart; crossing just above the end level")
        tmap.candidates.append(sub)


def _inner_jump(tmap, gap, funnel, which, p, q, depth):
    eng = tmap.engine
    (m1, t1), (m2, t2) = p, q
    lo, hi = (t1, t2) if t1 < t2 else (t2, t1)
    sub = Gap(lo, hi, m1, m2, "inner", "pending", depth + 1)
    tmap.candidates.append(sub)
    if depth + 1 > eng.cfg.max_depth:
        sub.status = "unresolved"
        tmap.demands.append(("depth", sub.as_tuple()))
        return

    def side(m, s):
        if m <= funnel.lam_star:
            # the branch starts on the funnel boundary itself
            return funnel.f1s[s] if which == "lo" else funnel.f2s[s]
        fx = funnel.extremes(m)[3][s]
        return _as_solution(fx.x, fx.g_low if which == "lo" else fx.g_high, m, funnel.f1s[s].window, "inner")

    f1s, f2s = {}, {}
    for s in funnel.f1s:
        sa, sb = side(m1, s), side(m2, s)
        f1s[s], f2s[s] = (sa, sb) if np.mean(sa.f) < np.mean(sb.f) else (sb, sa)
    _resolve(tmap, sub, _Funnel(eng, f1s, f2s, max(m1, m2), funnel.burn), depth + 1)


def detect_gaps(tmap: ThetaMap, refine: bool = True, resolve: bool = True):
    """Gaps of Im(Theta): candidates from the extremal branches, refined in lambda and resolved.

    Returns the gaps certified empty (flat parts).  All candidates, including
    the ones filled by interior solutions, stay in ``tmap.candidates``;
    unresolved label disagreements land in ``tmap.demands``.
    """
    if len(tmap.samples) < 2 or tmap.engine is None:
        return []
    eng = tmap.engine
    cfg = eng.cfg
    cands = []
    s0 = tmap.samples[0]
    if s0.lam - tmap.lambda0 > cfg.label_tol:
        tmap.demands.append(("bottom", f"lowest sample lambda={s0.lam:.8g} above lambda0={tmap.lambda0:.8g}"))
    elif s0.theta_max - s0.theta_min > cfg.theta_res:
        cands.append(Gap(s0.theta_min, s0.theta_max, s0.lam, s0.lam, "bottom"))
    if refine:
        for name, attr in (("max-branch", "theta_max"), ("min-branch", "theta_min")):
            def ev(lam, attr=attr):
                smp = eng.sample(lam)
                if smp.n_seeds == 0:
                    return None
                tmap.insert(smp)
                return getattr(smp, attr)

            pts = [(s.lam, getattr(s, attr)) for s in list(tmap.samples)]
            _, jumps, demands = _bisect_jumps(pts, ev, cfg.theta_res, cfg.label_tol, cfg.max_refine)
            for p, q in demands:
                tmap.demands.append((name, p, q))
            for (l1, t1), (l2, t2) in jumps:
                cands.append(Gap(min(t1, t2), max(t1, t2), l1, l2, name))
        tmap.flags += [f for f in check_monotone(tmap.samples) if f not in tmap.flags]
    tmap.candidates.extend(cands)
    if resolve:
        for gap in cands:
            f1s, f2s = {}, {}
            for seed in eng.seeds:
                try:
                    f1s[seed], f2s[seed] = eng.funnel_solutions(seed, gap.kind, gap.lambda_left, gap.lambda_right)
                except NumericalError:
                    continue
            if not f1s:
                gap.status = "unresolved"
                continue
            B = max(eng.state(s).B for s in f1s)
            _resolve(tmap, gap, _Funnel(eng, f1s, f2s, gap.label, B), 0)
            # descent evidence below the label
            s = next(iter(f1s))
            mus = [gap.label - d for d in (0.05, 0.2) if gap.label - d < min(f1s[s].lam, f2s[s].lam)]
            ell = eng.realization(s).correlation_length
            reach = min(-f1s[s].grid_x[0], f1s[s].grid_x[-1])
            ns = [n * ell for n in (10, 20, 40, 80) if n * ell <= reach] or [0.5 * reach]
            try:
                rep = detect_gap_level(eng.realization(s), f1s[s], f2s[s], mus, ns)
                gap.evidence += [{"probe": "descent", "mu": g.mu, "verdict": g.verdict} for g in rep]
            except PreconditionError as e:
                gap.notes.append(f"descent evidence skipped: {e}")
    flat = [g for g in tmap.candidates if g.status == "flat"]
    return sorted(flat, key=lambda g: g.theta1)


# ---------------------------------------------------------------- inversion


@dataclass
class EffectiveCurve:
    theta_grid: np.ndarray
    value: np.ndarray
    flat_segments: list  # (theta1, theta2, lam)
    lambda0: float
    points_theta: np.ndarray = None
    points_lambda: np.ndarray = None
    checks: dict = field(default_factory=dict)

    @property
    def flat_flag(self):
        f = np.zeros(self.theta_grid.size, dtype=int)
        for a, b, _ in self.flat_segments:
            f[(self.theta_grid >= a) & (self.theta_grid <= b)] = 1
        return f

    def __call__(self, theta):
        return _evaluate(self, np.asarray(theta, float))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["theta", "value", "flat_flag"])
            for t, v, f in zip(self.theta_grid, self.value, self.flat_flag):
                w.writerow([repr(float(t)), repr(float(v)), int(f)])


def _evaluate(curve, th):
    pc = PchipInterpolator(curve.points_theta, curve.points_lambda, extrapolate=False)
    v = pc(th)
    for a, b, lam in curve.flat_segments:
        v = np.where((th >= a) & (th <= b), lam, v)
    if np.any(np.isnan(v)):
        bad = th[np.isnan(v)]
        raise PreconditionError(f"theta {bad[0]:.6g} outside the sampled range "
                                f"[{curve.points_theta[0]:.6g}, {curve.points_theta[-1]:.6g}]; extend lambda_grid")
    return v


def invert_to_effective(tmap: ThetaMap, gaps, theta_grid, tol: float = 1e-6) -> EffectiveCurve:
    """Monotone interpolation of all (theta, lambda) points; constant on flat gaps."""
    th = []
    la = []
    for s in tmap.samples:
        if s.n_seeds:
            th += [s.theta_min, s.theta_max]
            la += [s.lam, s.lam]
    for t, lam, _ in tmap.inner:
        th.append(t)
        la.append(lam)
    flats = [(g.theta1, g.theta2, g.label) for g in gaps if g.status == "flat"]
    th, la = np.asarray(th, float), np.asarray(la, float)
    keep = np.ones(th.size, bool)
    for a, b, _ in flats:
        keep &= ~((th > a) & (th < b))
    th, la = th[keep], la[keep]
    for a, b, lam in flats:
        th = np.append(th, [a, b])
        la = np.append(la, [lam, lam])
    o = np.argsort(th, kind="stable")
    th, la = th[o], la[o]
    # merge coincident abscissae (e.g. theta_min = theta_max at lambda0)
    ut, inv = np.unique(np.round(th, 12), return_inverse=True)
    ul = np.bincount(inv, weights=la) / np.bincount(inv)
    if ut.size < 2:
        raise PreconditionError("need at least two distinct theta points to invert")
    grid = np.asarray(theta_grid, float)
    curve = EffectiveCurve(grid, np.empty_like(grid), flats, tmap.lambda0, ut, ul)
    curve.value = _evaluate(curve, grid)
    curve.checks["floor"] = bool(np.all(curve.value >= tmap.lambda0 - max(tol, tmap.engine.cfg.label_tol if tmap.engine else tol)))
    cont = []
    for a, b, lam in flats:
        eps = 1e-9 * max(1.0, b - a)
        side = [v for v in (a - eps, b + eps) if ut[0] <= v <= ut[-1]]
        if side:
            pc = PchipInterpolator(ut, ul)(np.array(side))
            cont.append(float(np.max(np.abs(pc - lam))))
    curve.checks["flat_continuity"] = max(cont) if cont else 0.0
    pts_max = [(s.theta_max, s.lam) for s in tmap.samples if s.n_seeds]
    if pts_max:
        tt = np.array([p[0] for p in pts_max])
        ll = np.array([p[1] for p in pts_max])
        inside = (tt >= ut[0]) & (tt <= ut[-1])
        curve.checks["inverse_consistency"] = float(np.max(np.abs(_evaluate(curve, tt[inside]) - ll[inside]))) if inside.any() else 0.0
    return curve


# ---------------------------------------------------------------- pipeline


@dataclass
class PipelineResult:
    lambda0: float
    tmap: ThetaMap
    gaps: list
    curve: EffectiveCurve
    lambda_grid: list
    notes: list = field(default_factory=list)


def auto_lambda_grid(engine: ThetaEngine, theta_lo, theta_hi, n=20, lambda0=None):
    """Quadratically spaced levels from lambda0 up to the first level whose branches span the theta range."""
    l0 = engine.lambda0() if lambda0 is None else lambda0
    step = 1.0
    for _ in range(40):
        smp = engine.sample(l0 + step)
        if smp.n_seeds and smp.theta_max >= theta_hi + engine.cfg.theta_res and smp.theta_min <= theta_lo - engine.cfg.theta_res:
            break
        step *= 2
    else:
        raise NumericalError("could not span the requested theta range")
    s = np.linspace(0, 1, max(n, 2))
    return list(l0 + step * s**2)


def effective_pipeline(spec: EnvironmentSpec, theta_grid, seeds=(0,), cfg: ThetaConfig | None = None,
                       lambda_grid=None, n_lambda: int = 20, lambda0: float | None = None) -> PipelineResult:
    engine = ThetaEngine(spec, seeds, cfg)
    notes = []
    l0 = engine.lambda0() if lambda0 is None else float(lambda0)
    engine.lambda0_est = l0
    # the lowest level must admit bounded solutions on every seed's window
    base = l0
    bump = 1e-9 * max(1.0, abs(l0))
    while engine.sample(base).n_seeds == 0:
        base = l0 + bump
        bump *= 4
        if bump > 1e-2 * max(1.0, abs(l0)):
            raise NumericalError("no bounded solution near the estimated lambda0")
    if base != l0:
        notes.append(f"lowest level raised from {l0:.10g} to {base:.10g} to admit bounded solutions")
    grid = np.asarray(theta_grid, float)
    if lambda_grid is None:
        lambda_grid = auto_lambda_grid(engine, float(grid.min()), float(grid.max()), n_lambda, base)
    tmap = build_theta_map(spec, lambda_grid, engine=engine, lambda0=base)
    gaps = detect_gaps(tmap)
    curve = invert_to_effective(tmap, gaps, grid)
    curve.lambda0 = l0
    return PipelineResult(l0, tmap, gaps, curve, list(lambda_grid), notes)


__all__ = [
    "ThetaConfig", "ThetaSample", "ThetaMap", "ThetaEngine", "Gap", "EffectiveCurve", "PipelineResult",
    "theta_of_lambda", "build_theta_map", "detect_gaps", "invert_to_effective", "effective_pipeline",
    "check_monotone", "check_disjoint", "auto_lambda_grid",
]

"""Named checks against frozen oracles and internal consistency, grouped in suites.

Each check returns a CheckReport whose status is "pass" exactly when every
inequality it asserts held.  Oracle values come from the CSV fixtures frozen
by tools/make_fixtures.py, not from live recomputation.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bridge, cell, parabolic, theta
from .env import ClassParams, EnvironmentSpec, FieldModel, from_string, sample_realization, verify_class
from .errors import ConfigError, EffhamError, NumericalError

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


# ---------------------------------------------------------------- reports


@dataclass
class CheckReport:
    check_id: str
    status: str  # pass | fail | inconclusive
    measured: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    config_hash: str = ""
    notes: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self):
        return self.status == "pass"

    def to_dict(self):
        return _jsonable(asdict(self))

    def line(self):
        return f"{self.check_id}: {self.status.upper()}  " + ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())


def _fmt(v):
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (float, np.floating)):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)) and len(v) > 6:
        return f"[{len(v)} values]"
    return str(v)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if math.isfinite(v) else repr(v)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    return o


def _report(cid, conds: dict, measured, tol, t0, **kw):
    """status from named boolean conditions; failures listed in notes."""
    notes = kw.pop("notes", [])
    failed = [k for k, ok in conds.items() if not ok]
    status = "pass" if not failed else "fail"
    notes = list(notes) + [f"failed: {k}" for k in failed]
    return CheckReport(cid, status, measured, tol, notes=notes, runtime=time.time() - t0, **kw)


def summary_markdown(reports) -> str:
    lines = ["| check | status | runtime (s) | measured |", "|---|---|---|---|"]
    for r in reports:
        meas = "; ".join(f"{k}={_fmt(v)}" for k, v in r.measured.items())
        lines.append(f"| {r.check_id} | {r.status} | {r.runtime:.1f} | {meas} |")
    return "\n".join(lines) + "\n"


def write_reports(reports, out_dir, stem="checks"):
    os.makedirs(out_dir, exist_ok=True)
    pj = os.path.join(out_dir, f"{stem}.json")
    pm = os.path.join(out_dir, f"{stem}.md")
    with open(pj, "w") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)
    with open(pm, "w") as fh:
        fh.write(summary_markdown(reports))
    return pj, pm


# ---------------------------------------------------------------- fixtures


def load_scalars(path=None):
    path = path or os.path.join(FIXTURES, "hopf_cole_scalars.csv")
    out = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            out[(row["potential"], row["quantity"])] = float(row["value"])
    return out


def load_profile(name, base=None):
    path = os.path.join(base or FIXTURES, f"hopf_cole_profile_{name}.csv")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return {"x": data[:, 0], "f_max": data[:, 1], "f_min": data[:, 2], "lambda": float(data[0, 3])}


# ---------------------------------------------------------------- environments


def cosine(amps, period=1.0):
    return FieldModel("periodic_cosine", {"amplitudes": list(amps), "period": period})


RANDOM_FOURIER = FieldModel("random_fourier", {"amplitude": 1.0, "decay": 2.0, "modes": 16, "length": 1.0})


def acceptance_environments():
    """Named environments shared by the suites and the acceptance tests."""
    return {
        "free_p2": from_string("p^2"),
        "free_p3": from_string("|p|^3"),
        "free_dwell": from_string("(p^2-1)^2"),
        "cos": from_string("p^2", cosine([1.0])),
        "dwell_cos": EnvironmentSpec("double_well", cosine([0.5]), cls=ClassParams(gamma=4.0)),
        "random": from_string("p^2", RANDOM_FOURIER),
    }


ORACLE_POTENTIALS = {"cos1": [1.0], "cos1_cos2": [1.0, 0.3], "zero": [0.0]}


def _mean(x, f):
    return float(np.sum(0.5 * np.diff(x) * (f[1:] + f[:-1])) / (x[-1] - x[0]))


def _lambda0(r, cfg_window=None):
    if r.period is None:
        return cell.estimate_lambda0(r, cell.default_window(r, cfg_window or 200.0), richardson=1).value
    return cell.estimate_lambda0(r, cell.default_window(r, cfg_window or 1000.0)).value


# ---------------------------------------------------------------- checks


def check_class(name, spec, seed=0):
    t0 = time.time()
    r = sample_realization(spec, seed)
    rep = verify_class(r)
    return _report(f"class/{name}", {"class conditions": rep.passed}, {"ratios": rep.ratios}, {"ratio": 1.0}, t0,
                   seeds=[seed])


def check_constant_coeff(name, spec, theta_grid=None, tol=1e-2, t_end=2.0):
    """Theta-inverse and parabolic slope both equal H(theta) for x-free H."""
    t0 = time.time()
    r = sample_realization(spec, 0)
    if not r.x_free:
        raise ConfigError(f"{name}: constant-coefficient oracle needs an x-free Hamiltonian")
    grid = np.linspace(-2, 2, 9) if theta_grid is None else np.asarray(theta_grid, float)
    exact = r.eval_H(0.0, grid)
    res = theta.effective_pipeline(spec, grid)
    err_inv = float(np.max(np.abs(res.curve.value - exact)))
    slopes = []
    for th in grid:
        run = parabolic.effective_value(r, float(th), t_end=t_end, dx=1 / 64)
        slopes.append(run.secant)
    err_par = float(np.max(np.abs(np.array(slopes) - exact)))
    meas = {"max_err_inverse": err_inv, "max_err_parabolic": err_par, "theta": grid, "H": exact,
            "inverse": res.curve.value, "parabolic": slopes}
    return _report(f"constant_coeff/{name}", {"inverse": err_inv <= tol, "parabolic": err_par <= tol}, meas,
                   {"abs": tol}, t0)


def check_hopf_cole(potential="cos1", tol_lambda0=1e-4, tol_profile=1e-3, tol_mean=1e-3):
    """Critical value and maximal corrector of p^2 + V against the frozen eigen-oracle."""
    t0 = time.time()
    amps = ORACLE_POTENTIALS[potential]
    sc = load_scalars()
    prof = load_profile(potential)
    spec = from_string("p^2", cosine(amps)) if any(amps) else from_string("p^2")
    r = sample_realization(spec, 0)
    lam0_ref = -sc[(potential, "E0")]
    est = cell.estimate_lambda0(r)
    lam = est.value + 1.0
    # step 1/256 puts solver nodes on the fixture nodes, so no interpolation error enters
    lo, hi = cell.extremal_pair(r, lam, (-20.0, 20.0), cfg=cell.SolverConfig(h=1 / 256))
    f_cell = hi.at(prof["x"])
    g_cell = lo.at(prof["x"])
    err_f = float(max(np.max(np.abs(f_cell - prof["f_max"])), np.max(np.abs(g_cell - prof["f_min"]))))
    mu = sc[(potential, "mu_lam0_plus_1")]
    period = r.period or 1.0
    k = int(round(10 / period))
    m = (hi.grid_x >= -k * period / 2) & (hi.grid_x <= k * period / 2)
    mean_hi, mean_lo = _mean(hi.grid_x[m], hi.f[m]), _mean(lo.grid_x[m], lo.f[m])
    err_mean = max(abs(mean_hi - mu), abs(mean_lo + mu))
    meas = {"lambda0_cell": est.value, "lambda0_oracle": lam0_ref, "err_lambda0": abs(est.value - lam0_ref),
            "err_profile_sup": err_f, "err_means": err_mean}
    return _report(f"hopf_cole/{potential}",
                   {"lambda0": abs(est.value - lam0_ref) <= tol_lambda0, "profile": err_f <= tol_profile,
                    "means": err_mean <= tol_mean}, meas,
                   {"lambda0": tol_lambda0, "profile": tol_profile, "means": tol_mean}, t0)


def check_theta_sample(potential="cos1", lam=2.0, tol=1e-3):
    t0 = time.time()
    sc = load_scalars()
    spec = from_string("p^2", cosine(ORACLE_POTENTIALS[potential]))
    s = theta.theta_of_lambda(spec, lam)
    mu = sc[(potential, "mu_lam_2")]
    meas = {"theta_max": s.theta_max, "theta_min": s.theta_min, "oracle": mu}
    return _report(f"theta_sample/{potential}", {"theta_max": abs(s.theta_max - mu) <= tol,
                                                 "theta_min": abs(s.theta_min + mu) <= tol}, meas, {"abs": tol}, t0)


def check_theta_properties(name, spec, seeds=tuple(range(8)), n=20, span=10.0, workers=1, cfg=None):
    """Strict branch monotonicity and pairwise disjointness at 3 stderr on [lambda0, lambda0 + span]."""
    t0 = time.time()
    cfg = cfg or theta.ThetaConfig(workers=workers, lambda0_window=200.0)
    eng = theta.ThetaEngine(spec, seeds, cfg)
    l0 = eng.lambda0()
    grid = list(l0 + span * np.linspace(0, 1, n))
    tmap = theta.build_theta_map(spec, grid, engine=eng)
    tmax, tmin = tmap.theta_max, tmap.theta_min
    inc = bool(len(tmap.samples) == n and np.all(np.diff(tmax) > 0))
    dec = bool(len(tmap.samples) == n and np.all(np.diff(tmin) < 0))
    bad = theta.check_disjoint(tmap.samples)
    seeds_used = min(s.n_seeds for s in tmap.samples) if tmap.samples else 0
    meas = {"lambda0": l0, "n_samples": len(tmap.samples), "min_step_theta_max": float(np.min(np.diff(tmax))),
            "min_step_theta_min": float(np.min(-np.diff(tmin))), "max_stderr": float(max(s.stderr for s in tmap.samples)),
            "disjoint_violations": len(bad), "min_seeds_per_sample": seeds_used}
    return _report(f"theta_properties/{name}", {"theta_max increasing": inc, "theta_min decreasing": dec,
                                                "disjoint": not bad}, meas, {"disjoint_k": 3.0}, t0,
                   seeds=list(seeds), notes=tmap.flags[:10])


def check_corrector_invariance(name="cos", spec=None, dx=1 / 256, t_end=5.0, tol=5e-3, offset=1.0):
    """u_c(x) + lam t from the maximal solution stays a solution of the parabolic scheme."""
    t0 = time.time()
    spec = spec or acceptance_environments()[name]
    r = sample_realization(spec, 0)
    per = r.period
    if per is None:
        raise ConfigError("corrector invariance needs a periodic (or x-free) environment")
    per = per or 1.0
    lam = _lambda0(r) + offset
    sol = cell.bounded_solution_window(r, lam, (-20.0, 20.0), "maximal", cfg=cell.SolverConfig(h=dx))
    pot = cell.corrector_potential(sol, r)
    k = int(round(10 / per))
    m = (sol.grid_x >= -k * per / 2) & (sol.grid_x <= k * per / 2)
    th = float((np.interp(k * per / 2, pot.x, pot.u) - np.interp(-k * per / 2, pot.x, pot.u)) / (k * per))
    grid = parabolic.Grid1D.periodic_cells(per, 1, dx, th)
    uc = np.interp(grid.x, pot.x, pot.u)
    ts = np.linspace(t_end / 20, t_end, 20)
    run = parabolic.solve_ehj(r, grid, t_end, ts, u0=uc - th * grid.x, record_every=t_end / 20)
    drift = 0.0
    for t, u in run.snapshots:
        drift = max(drift, float(np.max(np.abs(u - uc - lam * t))))
    meas = {"lambda": lam, "theta": th, "sup_drift": drift, "dx": dx, "nodes_aligned": bool(m.any())}
    return _report(f"corrector_invariance/{name}", {"drift": drift <= tol}, meas, {"sup_drift": tol}, t0)


def check_flat_parts(name="dwell_cos", spec=None, tol=5e-2, width_tol=1e-2, t_end=30.0, dx=1 / 64, n_probe=3):
    """Flat parts carry one level; the parabolic solver sees that level (or the filled curve) inside each gap."""
    t0 = time.time()
    spec = spec or acceptance_environments()[name]
    r = sample_realization(spec, 0)
    grid = np.linspace(-1.5, 1.5, 13)
    res = theta.effective_pipeline(spec, grid)
    tmap = res.tmap
    labels_ok, flat_ok, filled_ok = True, True, True
    rows = []
    for g in tmap.candidates:
        probes = g.theta1 + (g.theta2 - g.theta1) * (np.arange(1, n_probe + 1) / (n_probe + 1))
        if g.status == "flat":
            labels_ok &= abs(g.lambda_left - g.lambda_right) <= tmap.engine.cfg.label_tol
            target = np.full(n_probe, g.label)
        else:
            target = res.curve(probes)
        for th, tv in zip(probes, target):
            run = parabolic.effective_value(r, float(th), t_end=t_end, dx=dx, nsamples=60)
            HL, HU, w = parabolic.estimate_HL_HU(run)
            ok = abs(HL - tv) <= tol and abs(HU - tv) <= tol and w <= width_tol
            if g.status == "flat":
                flat_ok &= ok
            else:
                filled_ok &= ok
            rows.append([g.status, float(th), float(tv), HL, HU, w])
    flats = [g for g in tmap.candidates if g.status == "flat"]
    meas = {"lambda0": res.lambda0, "flat_gaps": [g.as_tuple() for g in flats],
            "candidates": [(g.kind, g.status, g.theta1, g.theta2, g.lambda_left, g.lambda_right) for g in tmap.candidates],
            "probes": rows, "unresolved": len(tmap.demands)}
    notes = []
    if not flats:
        notes.append("no flat part detected: every candidate gap is filled by interior solutions")
    return _report(f"flat_parts/{name}", {"equal labels": labels_ok, "flat agreement": flat_ok,
                                          "filled agreement": filled_ok, "no unresolved": not tmap.demands},
                   meas, {"abs": tol, "width": width_tol}, t0, notes=notes)


def check_bridge_residual(name, spec, mu_offset=0.2, epsilon=0.05, lam_offset=0.1, seed=0):
    """Descent shoot at mu = lam - 0.2 crosses; the glued function satisfies a g' + H > mu - 2 eps at every node."""
    t0 = time.time()
    r = sample_realization(spec, seed)
    lam = _lambda0(r) + lam_offset
    ell = r.correlation_length
    W = (-40 * ell, 40 * ell)
    lo, hi = cell.extremal_pair(r, lam, W)
    mu = lam - mu_offset
    b = bridge.shoot_descend(r, lo, hi, mu, 10 * ell)
    meas = {"lambda": lam, "mu": mu, "verdict": b.verdict, "crossing_x": b.crossing_x}
    if b.verdict != "crossed":
        return _report(f"bridge_residual/{name}", {"crossed": False}, meas, {}, t0, seeds=[seed])
    g = bridge.mollify_glue(r, hi, lo, b, mu, epsilon)
    outside = (g.x < g.cutoff["outer"][0]) | (g.x > g.cutoff["outer"][1])
    ref = np.where(g.x < b.start_x, hi.f, lo.f)
    exact = bool(np.array_equal(g.g_eps[outside], ref[outside]))
    meas.update({"residual_min": g.residual_min, "target": g.target, "mollifier_index": g.mollifier_index,
                 "estimate_term": g.estimate_term, "outside_exact": exact})
    return _report(f"bridge_residual/{name}", {"crossed": True, "inequality": g.satisfied and g.residual_min > g.target,
                                               "gluing exact": exact}, meas, {"target": "mu - 2 eps"}, t0, seeds=[seed])


def check_eps_convergence(name="cos", spec=None, theta_=0.0, eps_list=(0.25, 0.125, 0.0625, 0.03125), tol_final=1e-2,
                          tol_limit=2e-2, dx=1 / 64):
    t0 = time.time()
    spec = spec or acceptance_environments()[name]
    r = sample_realization(spec, 0)
    tab = parabolic.epsilon_study(r, theta_, list(eps_list), 1.0, dx=dx)
    res = theta.effective_pipeline(spec, np.array([theta_ - 0.5, theta_, theta_ + 0.5]))
    target = float(res.curve(np.array([theta_]))[0])
    dec = bool(np.all(np.diff(tab.diffs) < 0))
    meas = {"values": tab.values, "diffs": tab.diffs, "extrapolated": tab.extrapolated, "theta_pipeline": target,
            "err_limit": abs(tab.extrapolated - target)}
    return _report(f"eps_convergence/{name}", {"diffs decreasing": dec, "final diff": tab.diffs[-1] <= tol_final,
                                               "limit": abs(tab.extrapolated - target) <= tol_limit}, meas,
                   {"final": tol_final, "limit": tol_limit}, t0)


def random_lipschitz(rng, x, lip=1.0, modes=6):
    """Random smooth function with |f'| <= lip: sine sum with random phases."""
    k = rng.integers(1, 8, modes)
    a = rng.uniform(-1, 1, modes)
    ph = rng.uniform(0, 2 * np.pi, modes)
    L = x[-1] - x[0] if x.size > 1 else 1.0
    w = 2 * np.pi * k / L
    f = (a[:, None] * np.sin(w[:, None] * (x[None, :] - x[0]) + ph[:, None])).sum(0)
    scale = lip / max(float(np.sum(np.abs(a) * w)), 1e-12)
    return f * scale


def check_comparison(name, spec, pairs=100, seed=0, t_end=1.0, dx=1 / 32, theta_=0.5):
    """Ordered Lipschitz data stay ordered under one fixed monotone scheme."""
    t0 = time.time()
    r = sample_realization(spec, 0)
    per = r.period
    rng = np.random.default_rng(seed)
    if per is not None:
        grid = parabolic.Grid1D.periodic_cells(per or 1.0, 2, dx, theta_)
    else:
        grid = parabolic.Grid1D.around_zero(6.0, dx, theta_)
    x = grid.x
    worst, fails = -math.inf, 0
    for _ in range(pairs):
        if grid.boundary == "periodic":
            # periodic perturbations keep the shifted-periodic boundary exact
            v = theta_ * x + random_lipschitz(rng, np.append(x, x[-1] + grid.dx), 1.0)[:-1]
            w = v + 0.01 + np.abs(random_lipschitz(rng, np.append(x, x[-1] + grid.dx), 0.5)[:-1])
        else:
            v = theta_ * x + random_lipschitz(rng, x, 1.0)
            w = v + 0.01 + np.abs(random_lipschitz(rng, x, 0.5))
        verdict = parabolic.comparison_check(r, grid, v, w, t_end, nsamples=5)
        worst = max(worst, verdict.max_gap - verdict.initial_gap)
        fails += not verdict.passed
    meas = {"pairs": pairs, "failures": fails, "worst_excess": worst}
    return _report(f"comparison/{name}", {"ordering preserved": fails == 0}, meas, {"slack": "64 ulp * scale"}, t0,
                   seeds=[seed])


def check_bounds(name, spec, seed=0, offsets=(0.05, 0.1, 0.2, 0.4, 0.8)):
    """Band confinement, no crossing between same-level extremal solutions, gap growing with the level difference."""
    t0 = time.time()
    r = sample_realization(spec, seed)
    l0 = _lambda0(r)
    ell = r.correlation_length
    W = (-20 * ell, 20 * ell)
    conf_ok, order_ok = True, True
    worst_conf = -math.inf
    base_lo, base_hi = None, None
    gaps, dl = [], []
    for k, off in enumerate((1.0,) + tuple(offsets)):
        lam = l0 + off
        lo, hi = cell.extremal_pair(r, lam, W)
        band = cell.p_bounds(r, lam + cell.DELTA, W)
        exc = max(float(np.max(hi.f) - band.p_plus), float(band.p_minus - np.min(lo.f)))
        worst_conf = max(worst_conf, exc)
        conf_ok &= exc <= 1e-6
        o = cell.check_ordering(lo, hi)
        order_ok &= o.verdict in ("below", "identical")
        if k == 0:
            base_lo, base_hi = lo, hi
    # gap between maximal solutions at lam1 = l0 + 1 and lam2 = lam1 + d
    for d in offsets:
        hi2 = cell.bounded_solution_window(r, l0 + 1.0 + d, W, "maximal")
        gaps.append(float(np.min(hi2.at(base_hi.grid_x) - base_hi.f)))
        dl.append(d)
    slope = float(np.polyfit(dl, gaps, 1)[0])
    meas = {"lambda0": l0, "worst_band_excess": worst_conf, "ordering_ok": order_ok, "gap_slope": slope,
            "gaps": gaps}
    return _report(f"bounds/{name}", {"confinement": conf_ok, "no crossing": order_ok, "gap slope": slope > 0},
                   meas, {"band": 1e-6}, t0, seeds=[seed])


def check_riccati_bridge():
    """Shoots on H = p^2 against the closed-form Riccati trajectories."""
    from . import oracles

    t0 = time.time()
    r = sample_realization(from_string("p^2"), 0)
    lo, hi = cell.extremal_pair(r, 1.0, (-30.0, 30.0))
    conf = bridge.shoot_descend(r, lo, hi, 0.5, 10.0)
    down = bridge.shoot_descend(r, lo, hi, -0.5, 10.0)
    up = bridge.shoot_ascend(r, lo, hi, 2.0, 10.0)
    x_down = oracles.riccati_blowdown_x(-0.5, 1.0) - oracles.riccati_blowdown_x(-0.5, -1.0)
    x_up = oracles.riccati_rise_crossing(2.0, -1.0, 1.0)
    d_down = down.crossing_x - down.start_x
    d_up = up.crossing_x - up.start_x
    meas = {"confined_limit": float(conf.g[-1]), "descent_cross": d_down, "descent_exact": x_down,
            "ascent_cross": d_up, "ascent_exact": x_up}
    conds = {"confined": conf.verdict == "confined" and abs(conf.g[-1] - math.sqrt(0.5)) < 1e-6,
             "descent": abs(d_down - x_down) < 1e-6, "ascent": abs(d_up - x_up) < 1e-6}
    return _report("bridge/riccati", conds, meas, {"abs": 1e-6}, t0)


# ---------------------------------------------------------------- suites

SUITES = ("class", "cell", "bridge", "theta", "parabolic", "end2end")


def _suite_jobs(suite, envs, seeds):
    if suite == "class":
        return [lambda n=n, s=s: check_class(n, s, seeds[0]) for n, s in envs.items()]
    if suite == "cell":
        jobs = [lambda n=n, s=s: check_bounds(n, s, seeds[0]) for n, s in envs.items()]
        return jobs + [lambda p=p: check_hopf_cole(p) for p in ("cos1", "cos1_cos2")]
    if suite == "bridge":
        return [check_riccati_bridge] + [lambda n=n, s=s: check_bridge_residual(n, s, seed=seeds[0])
                                         for n, s in envs.items()]
    if suite == "theta":
        jobs = [lambda: check_theta_sample("cos1")]
        per = {n: s for n, s in envs.items() if sample_realization(s, 0).period is not None}
        jobs += [lambda n=n, s=s: check_theta_properties(n, s, seeds=seeds[:1], n=10, span=5.0) for n, s in per.items()]
        return jobs
    if suite == "parabolic":
        jobs = [lambda n=n, s=s: check_comparison(n, s, pairs=20, seed=seeds[0]) for n, s in envs.items()]
        per = [n for n, s in envs.items() if sample_realization(s, 0).period is not None]
        return jobs + [lambda n=n: check_corrector_invariance(n, envs[n], dx=1 / 128, t_end=2.0) for n in per[:2]]
    if suite == "end2end":
        free = {n: s for n, s in envs.items() if sample_realization(s, 0).x_free}
        return [lambda n=n, s=s: check_constant_coeff(n, s) for n, s in free.items()]
    raise ConfigError(f"unknown suite {suite!r}; expected one of {SUITES}")


def run_suite(suite: str, envs: dict | None = None, seeds=(0,), config_hash: str = "", double_run: bool = False):
    """Run every check of a suite; failures and errors are reported, never raised."""
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {SUITES}")
    envs = envs or acceptance_environments()
    seeds = list(seeds) or [0]
    reports = []
    for job in _suite_jobs(suite, envs, seeds):
        rep = _safe(job)
        if double_run:
            again = _safe(job)
            same = json.dumps(rep.to_dict()["measured"], sort_keys=True) == json.dumps(again.to_dict()["measured"],
                                                                                     sort_keys=True)
            if not same:
                rep.status = "fail"
                rep.notes.append("double run differs")
            rep.measured["reproducible"] = same
        rep.config_hash = config_hash
        reports.append(rep)
    return reports


def _safe(job):
    t0 = time.time()
    try:
        return job()
    except NumericalError as e:
        return CheckReport(getattr(job, "__name__", "check"), "inconclusive", notes=[f"numerical error: {e}"],
                           runtime=time.time() - t0)
    except EffhamError as e:
        return CheckReport(getattr(job, "__name__", "check"), "fail", notes=[f"error: {e}"], runtime=time.time() - t0)


__all__ = [
    "CheckReport", "run_suite", "summary_markdown", "write_reports", "acceptance_environments", "check_class",
    "check_constant_coeff", "check_hopf_cole", "check_theta_sample", "check_theta_properties",
    "check_corrector_invariance", "check_flat_parts", "check_bridge_residual", "check_eps_convergence",
    "check_comparison", "check_bounds", "check_riccati_bridge", "load_scalars", "load_profile", "SUITES",
]

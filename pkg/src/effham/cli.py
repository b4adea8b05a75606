"""Command-line front end: ``effham <command> <config>``.

Every command writes its artifacts under ``run.output_dir/<command>/`` plus a
``manifest.json`` holding the config hash, seeds, library versions and wall
time.  Artifacts are byte-identical across reruns of the same config; only the
manifest carries timestamps.

Exit codes: 0 success, 1 check failure, 2 configuration or usage error,
3 numerical or runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time

import numpy as np

from . import __version__, bridge, cell, parabolic, plotting, theta, validate
from .config import RunConfig, load_config, schema_doc
from .env import sample_realization
from .errors import ConfigError, EffhamError, NumericalError, PreconditionError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


class StageError(Exception):
    def __init__(self, stage, err):
        super().__init__(f"[{stage}] {err}")
        self.stage = stage
        self.err = err


class Run:
    """Output directory, artifact list and stage bookkeeping for one command."""

    def __init__(self, command, cfg: RunConfig):
        self.command = command
        self.cfg = cfg
        self.out = os.path.join(cfg["run.output_dir"], command)
        os.makedirs(self.out, exist_ok=True)
        self.artifacts = []
        self.stage = "setup"
        self.t0 = time.time()
        self.started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        self.extra = {}

    def path(self, name):
        p = os.path.join(self.out, name)
        self.artifacts.append(os.path.relpath(p, self.out))
        return p

    def plot(self, fn, name, *a, **kw):
        if self.cfg["run.plots"]:
            fn(*a, path=self.path(name), **kw)

    def staged(self, stage, fn, *a, **kw):
        self.stage = stage
        try:
            return fn(*a, **kw)
        except ConfigError:
            raise
        except (EffhamError, ValueError, FloatingPointError) as e:
            raise StageError(stage, e) from e

    def manifest(self, status, error=None):
        import matplotlib
        import numba
        import scipy

        m = {
            "command": self.command,
            "status": status,
            "config_path": self.cfg.path,
            "config_hash": self.cfg.hash,
            "config_text": self.cfg.text,
            "seeds": self.cfg["run.seeds"],
            "workers": self.cfg.workers,
            "versions": {"effham": __version__, "python": platform.python_version(), "numpy": np.__version__,
                         "scipy": scipy.__version__, "numba": numba.__version__, "matplotlib": matplotlib.__version__},
            "started": self.started,
            "wall_time_s": round(time.time() - self.t0, 3),
            "artifacts": self.artifacts,
        }
        if error is not None:
            m["error"] = {"stage": self.stage, "message": str(error)}
        m.update(self.extra)
        with open(os.path.join(self.out, "manifest.json"), "w") as fh:
            json.dump(validate._jsonable(m), fh, indent=2)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _cell_cfg(cfg):
    return cell.SolverConfig(burn=cfg["cell.burn"], h=cfg["cell.h"], tol=cfg["cell.tol"])


def _theta_cfg(cfg):
    return theta.ThetaConfig(window=cfg["theta.window"], burn=cfg["theta.burn"], theta_res=cfg["theta.theta_res"],
                             label_tol=cfg["theta.label_tol"], max_refine=cfg["theta.max_refine"],
                             inner_points=cfg["theta.inner_points"], max_depth=cfg["theta.max_depth"],
                             workers=cfg.workers, h=cfg["cell.h"], lambda0_window=cfg["cell.lambda0_window"])


def _lambda0(run, r):
    cfg = run.cfg
    win = cfg["cell.window"] or cell.default_window(r, cfg["cell.lambda0_window"])
    rich = 3 if r.period is not None else 1
    return run.staged("lambda0", cell.estimate_lambda0, r, win, richardson=rich, cfg=_cell_cfg(cfg))


# ---------------------------------------------------------------- commands


def cmd_sample_env(run: Run):
    spec = run.cfg.environment()
    for s in run.cfg["run.seeds"]:
        r = run.staged("sample", sample_realization, spec, s)
        r.dump_manifest(run.path(f"env_seed{s}.json"))
        lo, hi = run.cfg["cell.window"] or (-10.0, 10.0)
        x = np.linspace(lo, hi, 2001)
        h0 = r.eval_H(x, np.zeros_like(x))
        a = r.eval_a(x)
        _write_rows(run.path(f"env_seed{s}.csv"), ["x", "H_at_p0", "a"], zip(x, h0, a))
        run.plot(plotting.plot_profile, f"env_seed{s}.svg", x, {"H(x, 0)": h0, "a(x)": a},
                 title=f"seed {s}")
    return EXIT_OK


def cmd_lambda0(run: Run):
    spec = run.cfg.environment()
    rows = []
    for s in run.cfg["run.seeds"]:
        r = sample_realization(spec, s)
        est = _lambda0(run, r)
        rows.append((s, est.value, est.extrapolated, est.lower_bound, est.window[0], est.window[1]))
        with open(run.path(f"lambda0_seed{s}.json"), "w") as fh:
            json.dump(validate._jsonable({"seed": s, "value": est.value, "bracket": est.bracket,
                                          "per_window": est.per_window, "notes": est.notes}), fh, indent=2)
    _write_rows(run.path("lambda0.csv"), ["seed", "lambda0", "extrapolated", "lower_bound", "window_lo", "window_hi"],
                rows)
    return EXIT_OK


def _engine(run):
    cfg = run.cfg
    return theta.ThetaEngine(cfg.environment(), cfg["run.seeds"], _theta_cfg(cfg))


def cmd_theta_map(run: Run):
    cfg = run.cfg
    eng = _engine(run)
    l0 = run.staged("lambda0", eng.lambda0)
    grid = cfg["theta.lambda_grid"]
    if grid is None:
        grid = list(l0 + 10.0 * np.linspace(0, 1, cfg["theta.n_lambda"]))
    tmap = run.staged("theta_map", theta.build_theta_map, eng.spec, grid, engine=eng, lambda0=l0)
    tmap.to_csv(run.path("theta_map.csv"))
    run.plot(plotting.plot_theta_map, "theta_map.svg", tmap)
    mono = theta.check_monotone(tmap.samples)
    bad = theta.check_disjoint(tmap.samples)
    run.extra["checks"] = {"monotone": mono, "disjoint_violations": len(bad), "flags": tmap.flags}
    return EXIT_OK


def cmd_effective(run: Run):
    cfg = run.cfg
    tg = cfg["theta.theta_grid"]
    if tg is None:
        raise ConfigError("theta.theta_grid is required for the effective command")
    res = run.staged("pipeline", theta.effective_pipeline, cfg.environment(), tg, cfg["run.seeds"], _theta_cfg(cfg),
                     cfg["theta.lambda_grid"], cfg["theta.n_lambda"])
    res.curve.to_csv(run.path("effective.csv"))
    res.tmap.to_csv(run.path("theta_map.csv"))
    _write_rows(run.path("gaps.csv"), ["theta1", "theta2", "lambda_left", "lambda_right", "kind", "status", "depth"],
                [(g.theta1, g.theta2, g.lambda_left, g.lambda_right, g.kind, g.status, g.depth)
                 for g in res.tmap.candidates])
    _write_rows(run.path("inner_points.csv"), ["theta", "lambda", "source"], res.tmap.inner)
    run.plot(plotting.plot_effective, "effective.svg", res.curve)
    run.plot(plotting.plot_theta_map, "theta_map.svg", res.tmap)
    run.extra.update({"lambda0": res.lambda0, "notes": res.notes, "checks": res.curve.checks,
                      "flat_segments": res.curve.flat_segments})
    return EXIT_OK


def cmd_parabolic(run: Run):
    cfg = run.cfg
    spec = cfg.environment()
    rows = []
    for s in cfg["run.seeds"]:
        r = sample_realization(spec, s)
        for th in cfg["parabolic.theta"]:
            pr = run.staged("parabolic", parabolic.effective_value, r, th, t_end=cfg["parabolic.t_end"],
                            dx=cfg["parabolic.dx"], cells=cfg["parabolic.cells"],
                            half_width=(cfg["parabolic.x_range"] or (None, None))[1],
                            sigma_mode=cfg["parabolic.sigma_mode"])
            HL, HU, w = parabolic.estimate_HL_HU(pr)
            rows.append((s, th, HL, HU, w, pr.secant))
            stem = f"slope_seed{s}_theta{th:g}"
            pr.to_csv(run.path(stem + ".csv"))
            run.artifacts.append(stem + ".json")
            run.plot(plotting.plot_series, stem + ".svg", pr.times, pr.slope_series, xlabel="t", ylabel="u(t,0)/t",
                     title=f"theta = {th:g}")
    _write_rows(run.path("parabolic.csv"), ["seed", "theta", "HL", "HU", "width", "secant"], rows)
    return EXIT_OK


def cmd_eps_study(run: Run):
    cfg = run.cfg
    r = sample_realization(cfg.environment(), cfg["run.seeds"][0])
    th = cfg["parabolic.theta"][0]
    eps = sorted(cfg["parabolic.eps_list"], reverse=True)
    tab = run.staged("eps_study", parabolic.epsilon_study, r, th, eps, cfg["parabolic.horizon"], dx=cfg["parabolic.dx"],
                     cells=cfg["parabolic.cells"])
    diffs = list(tab.diffs) + [math.nan]
    _write_rows(run.path("eps_study.csv"), ["eps", "value", "diff_to_next"], zip(tab.eps, tab.values, diffs))
    run.plot(plotting.plot_series, "eps_study.svg", tab.eps, tab.values, xlabel="eps", ylabel="u_eps(t,0)",
                 logx=True)
    run.extra.update({"extrapolated": tab.extrapolated, "notes": tab.notes})
    return EXIT_OK


def cmd_bridge(run: Run):
    cfg = run.cfg
    r = sample_realization(cfg.environment(), cfg["run.seeds"][0])
    lam = cfg["bridge.lambda"]
    if lam is None:
        lam = _lambda0(run, r).value + 1.0
    mus = cfg["bridge.mu"] or [lam - 0.2]
    ell = r.correlation_length
    sched = cfg["bridge.n_schedule"] or [10 * ell, 20 * ell, 40 * ell]
    W = cfg["cell.window"] or (-2 * sched[-1] - 10 * ell, 2 * sched[-1] + 10 * ell)
    f1, f2 = run.staged("extremal", cell.extremal_pair, r, lam, W, cfg=_cell_cfg(cfg))
    f1.to_csv(run.path("f_min.csv"), r)
    f2.to_csv(run.path("f_max.csv"), r)
    run.artifacts += ["f_min.json", "f_max.json"]
    rows = []
    for mu in mus:
        if mu == lam:
            raise ConfigError(f"bridge.mu = {mu} equals the extremal level")
        shoot = bridge.shoot_descend if mu < lam else bridge.shoot_ascend
        b = run.staged("shoot", shoot, r, f1, f2, mu, sched[0])
        b.to_csv(run.path(f"shoot_mu{mu:g}.csv"), r)
        run.artifacts.append(f"shoot_mu{mu:g}.json")
        row = [mu, b.kind, b.verdict, b.start_x, b.crossing_x, "", "", ""]
        if b.verdict == "crossed" and mu < lam:
            left, right = f2, f1
            g = run.staged("glue", bridge.mollify_glue, r, left, right, b, mu, cfg["bridge.epsilon"],
                           r_margin=cfg["bridge.r_margin"], n_cap=cfg["bridge.n_cap"])
            g.to_csv(run.path(f"glued_mu{mu:g}.csv"))
            run.artifacts.append(f"glued_mu{mu:g}.json")
            row[5:] = [g.residual_min, g.target, g.satisfied]
            run.plot(plotting.plot_profile, f"glued_mu{mu:g}.svg", g.x, {"glued": g.g_eps},
                     ylabel="g_eps", title=f"mu = {mu:g}")
        rows.append(row)
    _write_rows(run.path("shoots.csv"), ["mu", "kind", "verdict", "start_x", "crossing_x", "residual_min", "target",
                                         "satisfied"], rows)
    levels = run.staged("gap_level", bridge.detect_gap_level, r, f1, f2, mus, sched)
    _write_rows(run.path("gap_levels.csv"), ["mu", "verdict", "note"], [(v.mu, v.verdict, v.note) for v in levels])
    run.plot(plotting.plot_profile, "extremal.svg", f1.grid_x, {"f_min": f1.f, "f_max": f2.f}, ylabel="f",
             title=f"lambda = {lam:g}")
    glued = [r_ for r_ in rows if r_[7] != ""]
    return EXIT_OK if all(r_[7] for r_ in glued) else EXIT_CHECK


def cmd_validate(run: Run):
    cfg = run.cfg
    if cfg["validate.fixtures"]:
        validate.FIXTURES = cfg["validate.fixtures"]
    envs = None
    if cfg.fields or any(k.startswith("env.") for k in cfg.values):
        envs = {"config": cfg.environment()}
    reports = []
    for suite in cfg["validate.suite"]:
        run.stage = f"validate:{suite}"
        reports += validate.run_suite(suite, envs, cfg["run.seeds"], cfg.hash, cfg["validate.double_run"])
    stats = {k: sum(r.status == k for r in reports) for k in ("pass", "fail", "inconclusive")}
    # runtimes differ between reruns, so the persisted reports carry none
    for rep in reports:
        rep.runtime = 0.0
    pj, pm = validate.write_reports(reports, run.out)
    run.artifacts += [os.path.basename(pj), os.path.basename(pm)]
    run.extra["summary"] = stats
    print(validate.summary_markdown(reports))
    return EXIT_OK if stats["fail"] == 0 and stats["inconclusive"] == 0 else EXIT_CHECK


COMMANDS = {
    "sample-env": cmd_sample_env,
    "lambda0": cmd_lambda0,
    "theta-map": cmd_theta_map,
    "effective": cmd_effective,
    "parabolic": cmd_parabolic,
    "eps-study": cmd_eps_study,
    "bridge": cmd_bridge,
    "validate": cmd_validate,
}


def build_parser():
    p = argparse.ArgumentParser(prog="effham", description="Effective Hamiltonians from corrector sweeps.",
                                epilog="config keys:\n" + schema_doc(), formatter_class=argparse.RawTextHelpFormatter)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    run = Run(args.command, cfg)
    try:
        code = COMMANDS[args.command](run)
    except ConfigError as e:
        run.manifest("config_error", e)
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as e:
        run.manifest("error", e)
        print(f"error in stage {e.stage}: {e.err}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(e.err, PreconditionError) and e.stage == "setup" else EXIT_NUMERICAL
    except (NumericalError, PreconditionError) as e:
        run.manifest("error", e)
        print(f"error in stage {run.stage}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as e:  # runtime failure outside the library's error types
        run.manifest("error", e)
        print(f"runtime error in stage {run.stage}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    run.manifest("ok" if code == EXIT_OK else "check_failure")
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Acceptance criteria at their stated tolerances and time budgets.

Each test prints one ``CRITERION <k>: PASS|FAIL`` line (also repeated in the
terminal summary) and then asserts the same verdict.
"""

import os
import time

import pytest

from effham import validate

ENVS = validate.acceptance_environments()
RESULTS = {}


def record(k, title, ok, budget, t0, details, capsys):
    elapsed = time.time() - t0
    within = elapsed <= budget
    verdict = "PASS" if ok and within else "FAIL"
    line = f"CRITERION {k}: {verdict}  {title}  [{elapsed:.1f}s / {budget:.0f}s]  {details}"
    RESULTS[k] = line
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert within, f"criterion {k} exceeded its time budget: {line}"


def summarize(reports):
    return "; ".join(r.line() if r.passed else r.line() + f" notes={r.notes}" for r in reports)


def test_1_constant_coefficient_exactness(capsys):
    t0 = time.time()
    reps = [validate.check_constant_coeff(n, ENVS[n], tol=1e-2) for n in ("free_p2", "free_p3", "free_dwell")]
    worst = max(max(r.measured["max_err_inverse"], r.measured["max_err_parabolic"]) for r in reps)
    record(1, "x-free H: theta-inverse and parabolic slope equal H(theta) within 1e-2",
           all(r.passed for r in reps), 120, t0, f"worst error {worst:.2e}", capsys)


def test_2_hopf_cole_oracle(capsys):
    t0 = time.time()
    rep = validate.check_hopf_cole("cos1", tol_lambda0=1e-4, tol_profile=1e-3)
    m = rep.measured
    record(2, "p^2 + cos(2 pi x): lambda0 = -E0 within 1e-4, maximal corrector within 1e-3",
           rep.passed, 60, t0, f"lambda0 err {m['err_lambda0']:.2e}, profile err {m['err_profile_sup']:.2e}", capsys)


def test_3_theta_properties(capsys):
    t0 = time.time()
    rep = validate.check_theta_properties("random", ENVS["random"], seeds=tuple(range(8)), n=20, span=10.0,
                                          workers=os.cpu_count() or 1)
    m = rep.measured
    record(3, "20 levels, 8 seeds: strict branch monotonicity and 3-stderr disjointness", rep.passed, 600, t0,
           f"min steps {m['min_step_theta_max']:.3g}/{m['min_step_theta_min']:.3g}, max stderr "
           f"{m['max_stderr']:.2g}, violations {m['disjoint_violations']}", capsys)


def test_4_corrector_invariance(capsys):
    t0 = time.time()
    rep = validate.check_corrector_invariance("cos", dx=1 / 256, t_end=5.0, tol=5e-3)
    record(4, "u_c(x) + lambda t invariant under the parabolic scheme, drift <= 5e-3", rep.passed, 120, t0,
           f"sup drift {rep.measured['sup_drift']:.2e}", capsys)


def test_5_flat_part_consistency(capsys):
    t0 = time.time()
    rep = validate.check_flat_parts("dwell_cos", tol=5e-2, width_tol=1e-2)
    m = rep.measured
    worst = max((max(abs(p[3] - p[2]), abs(p[4] - p[2])) for p in m["probes"]), default=float("nan"))
    record(5, "double well: gap labels equal; parabolic HL/HU within 5e-2 inside each gap, width <= 1e-2",
           rep.passed, 1800, t0, f"flat gaps {len(m['flat_gaps'])}, candidates {len(m['candidates'])}, "
           f"worst probe error {worst:.2e}; {'; '.join(rep.notes)}", capsys)


def test_6_bridging_residuals(capsys):
    t0 = time.time()
    reps = [validate.check_bridge_residual(n, s, mu_offset=0.2, epsilon=0.05) for n, s in ENVS.items()]
    margin = min(r.measured.get("residual_min", -1e9) - r.measured.get("target", 0.0) for r in reps)
    record(6, "descent (lambda - 0.2, 0.05): glued residual > mu - 2 eps at every node, all environments",
           all(r.passed for r in reps), 120, t0, f"smallest margin {margin:.3g}", capsys)


def test_7_epsilon_convergence(capsys):
    t0 = time.time()
    rep = validate.check_eps_convergence("cos", theta_=0.0, eps_list=(0.25, 0.125, 0.0625, 0.03125))
    m = rep.measured
    record(7, "eps-study at theta = 0: decreasing differences, last <= 1e-2, limit within 2e-2", rep.passed, 1200,
           t0, f"diffs {[f'{d:.2e}' for d in m['diffs']]}, limit err {m['err_limit']:.2e}", capsys)


def test_8_comparison_principle(capsys):
    t0 = time.time()
    reps = [validate.check_comparison(n, s, pairs=100) for n, s in ENVS.items()]
    record(8, "100 ordered Lipschitz pairs per environment stay ordered", all(r.passed for r in reps), 300, t0,
           f"failures {sum(r.measured['failures'] for r in reps)} of {100 * len(reps)}", capsys)


def test_9_bound_suite(capsys):
    t0 = time.time()
    reps = [validate.check_bounds(n, s) for n, s in ENVS.items()]
    worst = max(r.measured["worst_band_excess"] for r in reps)
    slope = min(r.measured["gap_slope"] for r in reps)
    record(9, "band confinement + 1e-6, no same-level crossing, positive gap slope", all(r.passed for r in reps),
           300, t0, f"worst band excess {worst:.2e}, smallest slope {slope:.3g}", capsys)

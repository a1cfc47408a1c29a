"""Limiting behaviour of the tagged-copy proportions.

The fake-tag fraction converges to the unique zero of ``beta_drift`` on
(0, 1).  This module locates that zero, derives the limiting per-event
population ratios from it, and packages the two design metrics: the
fraction of a fake item's copies that end up real-tagged (missed
warnings) and the fraction of a real item's copies that end up
fake-tagged (false alarms).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, UnsupportedConfiguration
from .params import (
    ModelParams,
    ScenarioPair,
    WarningPolicy,
    _mixed_tag_prob,
    beta_drift,
    check_tag_probabilities,
    generator_matrix,
)

__all__ = [
    "FixedPointResult",
    "PerformancePair",
    "solve_beta_star",
    "limit_summary",
    "performance",
    "eigenvector_check",
    "constant_warning_fraction",
]


@dataclass(frozen=True)
class FixedPointResult:
    """Limiting per-event statistics of a surviving spread.

    ``beta_star`` is the limiting fake-tag fraction, ``psi_star`` the
    limiting ratio of unread copies to events, ``theta_star`` their
    product (fake-tagged copies per event), ``v_y`` the second component
    of the left growth-matrix eigenvector normalized as [1, v_y], and
    ``residual`` the absolute drift at the returned root.
    """

    beta_star: float
    psi_star: float
    theta_star: float
    v_y: float
    residual: float

    def as_dict(self) -> dict:
        return {
            "beta_star": self.beta_star,
            "psi_star": self.psi_star,
            "theta_star": self.theta_star,
            "v_y": self.v_y,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class PerformancePair:
    """Design metrics for a fake/real scenario under one policy.

    ``psi1``: long-run fraction of the fake item's copies carrying a real
    tag (readers left unwarned).  ``psi2``: long-run fraction of the real
    item's copies carrying a fake tag (readers falsely alarmed).  The
    residuals record how exactly the underlying roots were resolved.
    """

    psi1: float
    psi2: float
    psi1_residual: float = 0.0
    psi2_residual: float = 0.0


def solve_beta_star(
    params: ModelParams,
    policy: WarningPolicy,
    tol: float = 1e-12,
    bracket: tuple[float, float] = (0.0, 1.0),
) -> float:
    """Locate the limiting fake-tag fraction by bisection.

    On the full interval the bracket is guaranteed: the drift is positive
    at 0 (the base warning keeps tagging alive) and negative at 1 (tag
    probabilities stay below 1).  A custom sub-bracket must still contain
    the sign change.
    """
    check_tag_probabilities(params, policy)
    lo, hi = bracket
    if not 0.0 <= lo < hi <= 1.0:
        raise InputError(f"bracket must satisfy 0 <= lo < hi <= 1, got {bracket}")
    g_lo = beta_drift(lo, params, policy)
    g_hi = beta_drift(hi, params, policy)
    if not (g_lo > 0.0 and g_hi < 0.0):
        raise InputError(
            f"bracket [{lo}, {hi}] does not enclose the sign change "
            f"(drift {g_lo:.3g} at lo, {g_hi:.3g} at hi)"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:  # float resolution exhausted
            break
        g_mid = beta_drift(mid, params, policy)
        if g_mid > 0.0:
            lo = mid
        elif g_mid < 0.0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def psi_star_from_beta(beta: float, params: ModelParams, policy: WarningPolicy) -> float:
    """Limiting copies-per-event ratio at fake-tag fraction ``beta``.

    Without reluctance this is just ``mean_offspring - 1``; tagging
    reluctance removes the thinned-away share of fake-tagged offspring.
    """
    m_eta = params.mean_offspring
    if params.eta_c == 1.0:
        return m_eta - 1.0
    return m_eta - 1.0 - m_eta * (1.0 - params.eta_c) * _mixed_tag_prob(beta, params, policy)


def limit_summary(params: ModelParams, policy: WarningPolicy, tol: float = 1e-12) -> FixedPointResult:
    """Solve for the limiting fraction and derive the limit ratios."""
    beta = solve_beta_star(params, policy, tol=tol)
    psi = psi_star_from_beta(beta, params, policy)
    return FixedPointResult(
        beta_star=beta,
        psi_star=psi,
        theta_star=beta * psi,
        v_y=(1.0 - beta) / beta,
        residual=abs(beta_drift(beta, params, policy)),
    )


def performance(scenario: ScenarioPair) -> PerformancePair:
    """Evaluate both design metrics for a scenario under its policy."""
    beta_f = solve_beta_star(scenario.fake, scenario.policy)
    beta_r = solve_beta_star(scenario.real, scenario.policy)
    return PerformancePair(
        psi1=1.0 - beta_f,
        psi2=beta_r,
        psi1_residual=abs(beta_drift(beta_f, scenario.fake, scenario.policy)),
        psi2_residual=abs(beta_drift(beta_r, scenario.real, scenario.policy)),
    )


def eigenvector_check(params: ModelParams, policy: WarningPolicy) -> float:
    """Residual of the limit proportions as a left eigenpair.

    At the limiting fraction the vector (beta_star, 1 - beta_star) is a
    left eigenvector of the growth-rate matrix with eigenvalue
    ``wake_rate * (mean_offspring - 1)``; returns the infinity-norm
    residual of that identity.  Only defined without tagging reluctance,
    where both matrix rows share the same total growth rate.
    """
    if params.eta_c != 1.0:
        raise UnsupportedConfiguration(
            "eigenvector identity requires eta_c == 1 (no tagging reluctance)"
        )
    beta = solve_beta_star(params, policy)
    mat = generator_matrix(beta, params, policy)
    v = np.array([beta, 1.0 - beta])
    mu = params.wake_rate * (params.mean_offspring - 1.0)
    return float(np.max(np.abs(v @ mat - mu * v)))


def constant_warning_fraction(alpha_fake: float, alpha_real: float, omega: float) -> float:
    """Limiting fake-tag fraction when the shown warning is constant.

    With a flat warning the balance condition is linear in ``beta`` and
    solves in closed form; used for feasibility bounds and baselines.
    """
    denom = 1.0 - (alpha_fake - alpha_real) * omega
    if not denom > 0.0 or alpha_fake * omega >= 1.0:
        raise InputError(f"constant warning {omega} is too strong for these sensitivities")
    return alpha_real * omega / denom

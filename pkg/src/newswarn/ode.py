"""Mean-field description of the tagged-copy averages.

Averaging the per-event jumps of the embedded chain gives a planar ODE
for (psi, theta) = (copies per event, fake-tagged copies per event); the
fake-tag fraction is their ratio.  The flow has a single interior
attractor matching the fixed-point module, which is what the sweeps here
verify numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .params import ModelParams, WarningPolicy, _mixed_tag_prob, check_tag_probabilities
from .fixed_point import limit_summary

__all__ = [
    "OdeState",
    "Trajectory",
    "SweepReport",
    "drift",
    "psi_closed_form",
    "integrate",
    "attractor_sweep",
]

# Below this copies-per-event level the survival indicator is treated as
# off and the flow freezes (the process has died out).
PSI_ABSORB_FLOOR = 1e-9


class OdeState(NamedTuple):
    psi: float
    theta: float
    t: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step integration record of the planar mean-field flow."""

    t: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    step: float
    absorbed: bool
    scheme: str = "rk4"

    @property
    def beta(self) -> np.ndarray:
        """Fake-tag fraction along the trajectory (0 where absorbed)."""
        safe = self.psi > PSI_ABSORB_FLOOR
        return np.where(safe, self.theta / np.where(safe, self.psi, 1.0), 0.0)

    @property
    def final(self) -> OdeState:
        return OdeState(float(self.psi[-1]), float(self.theta[-1]), float(self.t[-1]))


@dataclass(frozen=True)
class SweepReport:
    """Outcome of integrating a lattice of starts toward the attractor."""

    all_converged: bool
    max_terminal_distance: float
    tolerance: float
    failures: tuple[tuple[float, float, float], ...]  # (psi0, beta0, distance)


def drift(psi: float, theta: float, params: ModelParams, policy: WarningPolicy) -> tuple[float, float]:
    """Right-hand side of the mean-field flow at (psi, theta).

    Once psi reaches the absorption floor the survival indicator is off
    and the drift vanishes.  The fraction theta/psi is clamped to [0, 1]
    before evaluating the tag mechanism, since the vector field is only
    used on that physical range.
    """
    if psi <= PSI_ABSORB_FLOOR:
        return 0.0, 0.0
    beta = min(1.0, max(0.0, theta / psi))
    g = _mixed_tag_prob(beta, params, policy)
    m_eta = params.mean_offspring
    eta_c = params.eta_c
    dpsi = m_eta * (1.0 - (1.0 - eta_c) * g) - 1.0 - psi
    dtheta = m_eta * eta_c * g - beta - theta
    return dpsi, dtheta


def psi_closed_form(t: float, psi0: float, m_eta: float) -> float:
    """Copies-per-event average when forwarding is tag-independent.

    The psi equation then decouples and relaxes exponentially from
    ``psi0`` toward ``m_eta - 1`` at unit rate.
    """
    return (psi0 - (m_eta - 1.0)) * math.exp(-t) + m_eta - 1.0


def integrate(
    initial,
    params: ModelParams,
    policy: WarningPolicy,
    horizon: float,
    step: float = 0.01,
) -> Trajectory:
    """Integrate the flow with the classical 4th-order Runge-Kutta scheme.

    ``initial`` is an ``OdeState`` or a (psi0, theta0) pair.  The step is
    fixed; the final step is shortened so the trajectory ends exactly at
    ``horizon``.  Non-finite states abort with a diagnostic.
    """
    check_tag_probabilities(params, policy)
    if isinstance(initial, OdeState):
        psi, theta = initial.psi, initial.theta
    else:
        psi, theta = initial
    if not horizon > 0.0 or not step > 0.0:
        raise InputError(f"horizon and step must be positive, got {horizon}, {step}")

    n_whole = int(horizon / step)
    remainder = horizon - n_whole * step
    steps = [step] * n_whole + ([remainder] if remainder > 1e-15 else [])

    t_out = np.empty(len(steps) + 1)
    psi_out = np.empty_like(t_out)
    theta_out = np.empty_like(t_out)
    t = 0.0
    t_out[0], psi_out[0], theta_out[0] = t, psi, theta
    absorbed = psi <= PSI_ABSORB_FLOOR

    for i, h in enumerate(steps, start=1):
        d1p, d1t = drift(psi, theta, params, policy)
        d2p, d2t = drift(psi + 0.5 * h * d1p, theta + 0.5 * h * d1t, params, policy)
        d3p, d3t = drift(psi + 0.5 * h * d2p, theta + 0.5 * h * d2t, params, policy)
        d4p, d4t = drift(psi + h * d3p, theta + h * d3t, params, policy)
        psi += h / 6.0 * (d1p + 2.0 * d2p + 2.0 * d3p + d4p)
        theta += h / 6.0 * (d1t + 2.0 * d2t + 2.0 * d3t + d4t)
        t += h
        if not (math.isfinite(psi) and math.isfinite(theta)):
            raise RuntimeError(
                f"mean-field state became non-finite at t={t:.6g}: psi={psi}, theta={theta}"
            )
        if psi <= PSI_ABSORB_FLOOR:
            absorbed = True
        t_out[i], psi_out[i], theta_out[i] = t, psi, theta

    return Trajectory(t=t_out, psi=psi_out, theta=theta_out, step=step, absorbed=absorbed)


def attractor_sweep(
    params: ModelParams,
    policy: WarningPolicy,
    delta: float,
    grid_n: int = 10,
    horizon: float = 50.0,
    step: float = 0.01,
    tolerance: float = 1e-6,
) -> SweepReport:
    """Integrate a lattice of starts and measure terminal attraction.

    Starts cover psi0 in [psi* - delta, psi* + delta] and beta0 in
    [delta, 1 - delta] (theta0 = beta0 * psi0).  Requires
    0 < delta < min(psi*, 0.5) so every start is a valid interior state.
    Terminal distance is the sup-norm distance of (psi, theta) from the
    attractor at the horizon.
    """
    limits = limit_summary(params, policy)
    if not 0.0 < delta < min(limits.psi_star, 0.5):
        raise InputError(
            f"delta must lie in (0, min(psi*, 0.5)) = (0, {min(limits.psi_star, 0.5):.4g}), "
            f"got {delta}"
        )
    failures = []
    worst = 0.0
    for psi0 in np.linspace(limits.psi_star - delta, limits.psi_star + delta, grid_n):
        for beta0 in np.linspace(delta, 1.0 - delta, grid_n):
            traj = integrate((float(psi0), float(beta0 * psi0)), params, policy,
                             horizon=horizon, step=step)
            dist = max(
                abs(traj.psi[-1] - limits.psi_star),
                abs(traj.theta[-1] - limits.theta_star),
            )
            worst = max(worst, dist)
            if dist > tolerance:
                failures.append((float(psi0), float(beta0), float(dist)))
    return SweepReport(
        all_converged=not failures,
        max_terminal_distance=worst,
        tolerance=tolerance,
        failures=tuple(failures),
    )

"""Frozen expected values for the regression suite.

Every number below was produced by an independent oracle — exact
rational-arithmetic bisection for the fixed points and the constraint
curve, closed-form algebra for the rest — and is frozen here so the
library implementation is tested against values it did not compute.
"""

# Limiting fake-tag fractions of the three reference cases (exact-rational
# bisection to 2^-220, rounded to double).
BETA_STAR_CASE1 = 0.044330496315877564
BETA_STAR_CASE2 = 0.017047668817666728
BETA_STAR_CASE3 = 0.3953488372093023   # exactly 17/43

# Case 1 derived limits (no reluctance): psi* = 30 * 0.3 - 1.
PSI_STAR_CASE1 = 8.0
THETA_STAR_CASE1 = 0.3546439705270205
V_Y_CASE1 = 21.557834518126892

# Case 1 with tagging reluctance 0.3.
BETA_STAR_CASE1_RELUCTANT = 0.008047869415599651
PSI_STAR_CASE1_RELUCTANT = 7.8341098868640735
THETA_STAR_CASE1_RELUCTANT = 0.06304789335694022

# Design scenario: achievable false-alarm range (closed forms at the flat
# extreme warnings) and the uncontrolled baseline metric.
FEASIBLE_PSI2_LOW = 0.009193054136874362
FEASIBLE_PSI2_HIGH = 0.12873862158647595
UNCONTROLLED_BETA_FAKE = 0.06513409961685823
UNCONTROLLED_PSI1 = 0.9348659003831418

# Design scenario: per-budget curve values at full warning weight (w = 1)
# and the optimal design outputs (the optimum sits at w = 1 for all
# three budgets).
DESIGN = {
    0.01: {
        "b_at_w1": 1.1674977624344713,
        "db_dw": 1.1775987725354813,
        "psi1": 0.836125934376957,
        "w_lo": 0.008577633007600434,
    },
    0.015: {
        "b_at_w1": 0.23429275544781217,
        "db_dw": 0.24952118184375124,
        "psi1": 0.11735858299766577,
        "w_lo": 0.06103059581320451,
    },
    0.02: {
        "b_at_w1": 0.1612977894371359,
        "db_dw": 0.18170595270244203,
        "psi1": 0.10486118797660796,
        "w_lo": 0.11231422505307856,
    },
}

# Fixed-point prediction for the fake item at the budget-0.02 optimal
# policy (1 - DESIGN[0.02]["psi1"]).
BETA_FAKE_AT_OPTIMUM = 0.8951388120233921

# Hand-evaluated spot values.
WARNING_HALFWAY = 0.5 / 0.75 + 0.1          # beta=0.5, w=1, b=0.5, eps=0.1
TAG_REAL_HALFWAY = 0.45 * 0.55              # beta=0.5, w=1, b=1, eps=0.05
TAG_FAKE_AT_ZERO = 0.9 * 0.05               # beta=0, eps=0.05
DRIFT_EXAMPLE = (4.0, 0.84125)              # psi=4, theta=2, case-1 params
PSI_RELAXATION_AT_1 = 6.160602794142788     # 8 - 5/e

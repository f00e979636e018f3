"""
Bounded filter surrogates and their certificates
================================================

A filter scheme replaces the exponentially growing multipliers by bounded
ones.  Two constructions are provided: a sharp spectral cutoff and a
quasi-boundary damping.  Both are certified numerically against the two
contracts every admissible filter must satisfy:

  1. |filtered(t, .)| <= M * gamma(t, beta)          (stability)
  2. |filtered - exact| * exp(-T*rho) <= 1/gamma(T-t, beta)   (fidelity)

with gamma(t, beta) = beta**(-t/T) the amplification profile.
"""

import numpy as np

from illposed import (
    GammaFunction,
    backward_parabolic_family,
    cutoff_filter,
    filter_bound_check,
    filter_error_check,
    gamma_property_check,
    quasi_boundary_filter,
    select_beta,
)

family = backward_parabolic_family()

# ---------------------------------------------------------------------------
# The amplification profile is multiplicative in time; the checker verifies
# its three axioms pointwise on random samples.
profile = GammaFunction(1.0)
report = gamma_property_check(profile)
print("profile axioms pass:", report.passed,
      f"(worst product defect {report.product_max_rel_error:.2e})")

# A broken profile is caught immediately.
broken = GammaFunction(1.0, evaluator=lambda t, b: 1.0 + np.asarray(t) / b)
print("broken profile passes?", gamma_property_check(broken).passed)

# ---------------------------------------------------------------------------
# Certify both filters across a sweep of regularization parameters.
for builder in (cutoff_filter, quasi_boundary_filter):
    for beta in (1e-1, 1e-3):
        scheme = builder(family, beta, 1.0)
        bound = filter_bound_check(scheme)
        error = filter_error_check(scheme)
        print(
            f"{scheme.kind:>14s} beta={beta:g}: "
            f"sup|Q_f|/gamma = {bound.sup_ratio_q:.6f}, "
            f"weighted deviation * gamma = {error.sup_weighted_q:.6f}, "
            f"pass={bound.passed and error.passed}"
        )

# ---------------------------------------------------------------------------
# Choosing beta from the noise level.  The power rule beta = eps**p is
# admissible for 0 < p <= 1: the stabilization vanishes and the amplified
# noise stays bounded.
for power in (1.0, 0.5):
    sel = select_beta(1e-4, power=power)
    print(
        f"eps=1e-4, p={power}: beta={sel.beta:g}, "
        f"1/gamma(T) = {sel.gamma_inv_horizon:g}, "
        f"gamma(T)*eps = {sel.gamma_horizon_times_eps:g} -> K = {sel.limit_constant:g}"
    )

try:
    select_beta(1e-4, raw_beta=1e-8)
except ValueError as err:
    print("rejected rule:", err)

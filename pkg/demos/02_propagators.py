"""
Solution-operator multipliers and their growth envelopes
========================================================

Three problem families ship with the library.  Each provides the exact
multipliers Q(t, lambda) and S(t, lambda) realizing the solution operators
through the spectral calculus, plus a growth rate rho with
C1 * exp(t*rho) <= Q <= C2 * exp(t*rho).
"""

import numpy as np

from illposed import (
    backward_parabolic_family,
    damped_wave_family,
    elliptic_cauchy_family,
    growth_envelope_check,
)

lam = np.array([1.0, 4.0, 9.0, 16.0])

# ---------------------------------------------------------------------------
# Backward parabolic: Q = S = exp(t*lambda).  The catastrophic growth in
# lambda is exactly why the problem needs regularization.
parabolic = backward_parabolic_family()
print("parabolic Q(0.5, lam):", parabolic.q_multiplier(0.5, lam))

# Elliptic Cauchy: Q = cosh(t sqrt(lambda)), S = sinh(t sqrt(lambda))/sqrt(lambda).
elliptic = elliptic_cauchy_family()
print("elliptic Q(0.5, lam): ", elliptic.q_multiplier(0.5, lam))
print("elliptic S(0.5, lam->0) -> t:", elliptic.s_multiplier(0.5, np.array([1e-30]))[0])

# Strongly damped wave: conjugate characteristic roots below lambda = 4,
# a double root at 4 (confluent limit), decay everywhere.
damped = damped_wave_family()
print("damped Q(1, lam):     ", damped.q_multiplier(1.0, lam))
print("damped S(1, lam):     ", damped.s_multiplier(1.0, lam))

# ---------------------------------------------------------------------------
# Envelope certificates.  For the elliptic family the S multiplier sits a
# factor 1/sqrt(lambda) below the envelope at large lambda, which the report
# shows without failing (only the upper envelope is enforced for S).
samples = [(t, l) for t in (0.2, 0.6, 1.0) for l in (0.5, 2.0, 10.0, 50.0, 500.0)]
for family in (parabolic, elliptic):
    report = growth_envelope_check(family, samples)
    print(
        f"{family.name}: Q ratio in [{report.q.min_ratio:.3f}, {report.q.max_ratio:.3f}], "
        f"S ratio in [{report.s.min_ratio:.3f}, {report.s.max_ratio:.3f}], "
        f"passed={report.passed}"
    )

"""Regularized (bounded) surrogates for the exact solution operators.

A filter scheme replaces the exact multipliers Q, S by bounded multipliers
whose operator norm is controlled by the amplification profile
``gamma(t, beta) = beta**(-t/T)`` and whose deviation from the exact
multipliers, weighted by ``exp(-T*rho(lambda))``, is of order
``1/gamma(T - t, beta)``.  Two constructions are provided: a sharp spectral
cutoff and a quasi-boundary style damping.  Both certificates (norm bound
and weighted deviation) are checked numerically by sampling, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .propagators import PropagatorFamily


class AdmissibilityError(ValueError):
    """A regularization-parameter rule violates an admissibility condition."""


@dataclass(frozen=True)
class GammaFunction:
    """Amplification profile gamma(t, beta), multiplicative in time.

    The default evaluator is the power profile ``beta**(-t/horizon)``; a
    custom evaluator can be supplied so the axiom checker can also be used
    to reject broken profiles.
    """

    horizon: float
    evaluator: Callable[[float, float], float] | None = None

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")

    def __call__(self, t, beta):
        if self.evaluator is not None:
            return self.evaluator(t, beta)
        return beta ** (-np.asarray(t, dtype=np.float64) / self.horizon)


def gamma_eval(gamma: GammaFunction, t: float, beta: float) -> float:
    """Evaluate the profile with domain checks (0 <= t <= horizon, beta > 0)."""
    if not 0.0 <= t <= gamma.horizon:
        raise ValueError(f"t={t!r} outside [0, {gamma.horizon!r}]")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    return float(gamma(t, beta))


@dataclass(frozen=True)
class GammaPropertyReport:
    """Outcome of the three amplification-profile axioms on a sample set."""

    identity_max_error: float       # |gamma(0, beta) - 1|
    divergence_ok: bool             # gamma(t, beta) grows monotonically as beta -> 0+
    product_max_rel_error: float    # gamma(t1+t2) vs gamma(t1)*gamma(t2)
    quotient_max_rel_error: float   # gamma(t1-t2) vs gamma(t1)/gamma(t2)
    rtol: float

    @property
    def identity_ok(self) -> bool:
        return self.identity_max_error <= self.rtol

    @property
    def product_ok(self) -> bool:
        return self.product_max_rel_error <= self.rtol

    @property
    def quotient_ok(self) -> bool:
        return self.quotient_max_rel_error <= self.rtol

    @property
    def passed(self) -> bool:
        return self.identity_ok and self.divergence_ok and self.product_ok and self.quotient_ok


def gamma_samples(gamma: GammaFunction, n: int = 1000, seed: int = 0) -> np.ndarray:
    """Random (t, tau1, tau2, beta) tuples inside the profile's domain,
    with tau1 >= tau2 and tau1 + tau2 <= horizon."""
    rng = np.random.default_rng(seed)
    T = gamma.horizon
    t = rng.uniform(0.0, T, n)
    a = rng.uniform(1e-6, 1.0, n)
    b = rng.uniform(1e-6, 1.0, n)
    tau1 = T * np.maximum(a, b) / 2.0
    tau2 = T * np.minimum(a, b) / 2.0
    beta = 10.0 ** rng.uniform(-6.0, 0.0, n)
    return np.column_stack([t, tau1, tau2, beta])


def gamma_property_check(
    gamma: GammaFunction, samples=None, rtol: float = 1e-12
) -> GammaPropertyReport:
    """Verify the profile axioms pointwise on (t, tau1, tau2, beta) samples.

    The quotient axiom is implied by the product axiom but is evaluated
    independently as a consistency guard.
    """
    if samples is None:
        samples = gamma_samples(gamma)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 4:
        raise ValueError("samples must be an (n, 4) array of (t, tau1, tau2, beta)")
    t, tau1, tau2, beta = samples.T

    g = lambda tt, bb: np.asarray(gamma(tt, bb), dtype=np.float64)

    identity = float(np.max(np.abs(g(np.zeros_like(beta), beta) - 1.0)))

    # divergence: strict growth along beta = 10**-j for a positive time batch
    t_pos = np.unique(np.concatenate([[gamma.horizon], t[t > 0][:16]]))
    divergence_ok = True
    for tt in t_pos:
        values = np.array([float(gamma(tt, 10.0 ** (-j))) for j in range(1, 9)])
        if np.any(np.diff(values) <= 0.0):
            divergence_ok = False
            break

    prod_lhs = g(tau1 + tau2, beta)
    prod_rhs = g(tau1, beta) * g(tau2, beta)
    product = float(np.max(np.abs(prod_lhs - prod_rhs) / np.abs(prod_lhs)))

    quot_lhs = g(tau1 - tau2, beta)
    quot_rhs = g(tau1, beta) / g(tau2, beta)
    quotient = float(np.max(np.abs(quot_lhs - quot_rhs) / np.abs(quot_lhs)))

    return GammaPropertyReport(
        identity_max_error=identity,
        divergence_ok=divergence_ok,
        product_max_rel_error=product,
        quotient_max_rel_error=quotient,
        rtol=rtol,
    )


@dataclass(frozen=True)
class FilterScheme:
    """Bounded multipliers with their amplification/deviation certificates.

    ``q_filtered``/``s_filtered`` are the regularized multipliers.
    ``weighted_q_error``/``weighted_s_error`` return
    ``|filtered - exact| * exp(-horizon*rho(lambda))`` evaluated in a
    cancellation- and overflow-safe form.  ``m1``/``m2`` are the norm-bound
    constants certified by :func:`filter_bound_check`.
    """

    kind: str
    family: PropagatorFamily
    beta: float
    horizon: float
    gamma: GammaFunction
    m1: float
    m2: float
    q_filtered: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)
    s_filtered: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)
    weighted_q_error: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)
    weighted_s_error: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)


def _bound_constants(family: PropagatorFamily, horizon: float) -> tuple[float, float]:
    c2 = family.borel_constants[1]
    m2 = c2 * max(1.0, horizon) if family.s_envelope_time_factor else c2
    return c2, m2


def cutoff_filter(family: PropagatorFamily, beta: float, horizon: float) -> FilterScheme:
    """Sharp spectral cutoff: keep the exact multiplier while
    rho(lambda) <= log(1/beta)/horizon, zero above."""
    if not 0.0 < beta < 1.0:
        raise ValueError("cutoff needs beta in (0, 1); otherwise the cutoff level is vacuous")
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    rate_cut = math.log(1.0 / beta) / horizon

    def filtered(scaled):
        def evaluate(t, lam):
            lam = np.asarray(lam, dtype=np.float64)
            rates = np.asarray(family.rho(lam), dtype=np.float64)
            keep = rates <= rate_cut
            exponents = np.where(keep, t * rates, 0.0)
            return np.where(keep, scaled(t, lam) * np.exp(exponents), 0.0)

        return evaluate

    def weighted_error(scaled):
        def evaluate(t, lam):
            lam = np.asarray(lam, dtype=np.float64)
            rates = np.asarray(family.rho(lam), dtype=np.float64)
            keep = rates <= rate_cut
            # removed modes contribute the exact multiplier, weighted down
            return np.where(keep, 0.0, scaled(t, lam) * np.exp(-(horizon - t) * rates))

        return evaluate

    m1, m2 = _bound_constants(family, horizon)
    return FilterScheme(
        kind="cutoff",
        family=family,
        beta=beta,
        horizon=horizon,
        gamma=GammaFunction(horizon),
        m1=m1,
        m2=m2,
        q_filtered=filtered(family.q_scaled),
        s_filtered=filtered(family.s_scaled),
        weighted_q_error=weighted_error(family.q_scaled),
        weighted_s_error=weighted_error(family.s_scaled),
    )


def quasi_boundary_filter(family: PropagatorFamily, beta: float, horizon: float) -> FilterScheme:
    """Quasi-boundary style damping: divide the exact multiplier by
    ``1 + beta*exp(horizon*rho(lambda))``."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    log_beta = math.log(beta)

    def filtered(scaled):
        def evaluate(t, lam):
            lam = np.asarray(lam, dtype=np.float64)
            rates = np.asarray(family.rho(lam), dtype=np.float64)
            # exp(t*rho) / (1 + beta*exp(T*rho)) in log form; the exponent is
            # bounded by (t/T)*log(1/beta) so this never overflows
            exponents = t * rates - np.logaddexp(0.0, log_beta + horizon * rates)
            return scaled(t, lam) * np.exp(exponents)

        return evaluate

    def weighted_error(scaled):
        def evaluate(t, lam):
            lam = np.asarray(lam, dtype=np.float64)
            rates = np.asarray(family.rho(lam), dtype=np.float64)
            # |filtered - exact| * exp(-T*rho)
            #   = scaled * exp(-(T-t)*rho) * beta*y/(1+beta*y),  y = exp(T*rho)
            damp_complement = np.exp(-np.logaddexp(0.0, -(log_beta + horizon * rates)))
            return scaled(t, lam) * np.exp(-(horizon - t) * rates) * damp_complement

        return evaluate

    m1, m2 = _bound_constants(family, horizon)
    return FilterScheme(
        kind="quasi_boundary",
        family=family,
        beta=beta,
        horizon=horizon,
        gamma=GammaFunction(horizon),
        m1=m1,
        m2=m2,
        q_filtered=filtered(family.q_scaled),
        s_filtered=filtered(family.s_scaled),
        weighted_q_error=weighted_error(family.q_scaled),
        weighted_s_error=weighted_error(family.s_scaled),
    )


FILTERS = {
    "cutoff": cutoff_filter,
    "quasi_boundary": quasi_boundary_filter,
}


def filter_by_name(kind: str, family: PropagatorFamily, beta: float, horizon: float) -> FilterScheme:
    try:
        builder = FILTERS[kind]
    except KeyError:
        raise ValueError(
            f"unknown filter {kind!r}; expected one of {sorted(FILTERS)}"
        ) from None
    return builder(family, beta, horizon)


def definition_check_grid(
    scheme: FilterScheme, spectrum=None, n_time: int = 64, n_lambda: int = 192
) -> tuple[np.ndarray, np.ndarray]:
    """Default (t, lambda) sampling grid for the scheme certificates.

    Times cover [0, horizon] uniformly; lambdas cover the spectrum (when
    given) plus a log-spaced sweep reaching four times the cutoff-equivalent
    growth rate, so the suprema of all built-in multiplier expressions sit on
    grid-resolvable monotone boundaries.
    """
    ts = np.linspace(0.0, scheme.horizon, n_time)
    target_rate = 4.0 * max(math.log(1.0 / scheme.beta) / scheme.horizon, 1.0) \
        if scheme.beta < 1.0 else 4.0
    family = scheme.family
    if family.rho_inverse is not None:
        lam_hi = family.rho_inverse(target_rate)
    elif spectrum is not None:
        lam_hi = 4.0 * float(spectrum.eigenvalues[-1])
    else:
        lam_hi = 1e4
    lam_lo = 1e-4
    lams = np.geomspace(lam_lo, max(lam_hi, 10.0 * lam_lo), n_lambda)
    if spectrum is not None:
        lams = np.unique(np.concatenate([lams, spectrum.eigenvalues]))
    return ts, lams


@dataclass(frozen=True)
class FilterBoundReport:
    """Worst-case |filtered multiplier| / gamma(t, beta) over the grid."""

    kind: str
    beta: float
    sup_ratio_q: float
    sup_ratio_s: float
    m1: float
    m2: float
    tol: float

    @property
    def passed_q(self) -> bool:
        return self.sup_ratio_q <= self.m1 + self.tol

    @property
    def passed_s(self) -> bool:
        return self.sup_ratio_s <= self.m2 + self.tol

    @property
    def passed(self) -> bool:
        return self.passed_q and self.passed_s


def filter_bound_check(
    scheme: FilterScheme, samples=None, spectrum=None, tol: float = 1e-9
) -> FilterBoundReport:
    """Certify the norm bound |filtered(t, .)| <= M * gamma(t, beta)."""
    ts, lams = samples if samples is not None else definition_check_grid(scheme, spectrum)
    sup_q = 0.0
    sup_s = 0.0
    for t in np.asarray(ts, dtype=np.float64):
        g = float(scheme.gamma(t, scheme.beta))
        sup_q = max(sup_q, float(np.max(np.abs(scheme.q_filtered(t, lams)))) / g)
        sup_s = max(sup_s, float(np.max(np.abs(scheme.s_filtered(t, lams)))) / g)
    return FilterBoundReport(
        kind=scheme.kind,
        beta=scheme.beta,
        sup_ratio_q=sup_q,
        sup_ratio_s=sup_s,
        m1=scheme.m1,
        m2=scheme.m2,
        tol=tol,
    )


@dataclass(frozen=True)
class FilterErrorReport:
    """Worst-case weighted deviation times gamma(horizon - t, beta)."""

    kind: str
    beta: float
    sup_weighted_q: float
    sup_weighted_s: float
    tol: float

    @property
    def passed_q(self) -> bool:
        return self.sup_weighted_q <= 1.0 + self.tol

    @property
    def passed_s(self) -> bool:
        return self.sup_weighted_s <= 1.0 + self.tol

    @property
    def passed(self) -> bool:
        return self.passed_q and self.passed_s


def filter_error_check(
    scheme: FilterScheme, samples=None, spectrum=None, tol: float = 1e-9
) -> FilterErrorReport:
    """Certify the deviation order: the weighted error stays within
    1/gamma(horizon - t, beta), with constant 1 for the built-in schemes."""
    ts, lams = samples if samples is not None else definition_check_grid(scheme, spectrum)
    sup_q = 0.0
    sup_s = 0.0
    for t in np.asarray(ts, dtype=np.float64):
        g = float(scheme.gamma(scheme.horizon - t, scheme.beta))
        sup_q = max(sup_q, g * float(np.max(scheme.weighted_q_error(t, lams))))
        sup_s = max(sup_s, g * float(np.max(scheme.weighted_s_error(t, lams))))
    return FilterErrorReport(
        kind=scheme.kind,
        beta=scheme.beta,
        sup_weighted_q=sup_q,
        sup_weighted_s=sup_s,
        tol=tol,
    )


@dataclass(frozen=True)
class BetaSelection:
    """A regularization parameter with its admissibility certificate."""

    epsilon: float
    beta: float
    power: float
    gamma_horizon: float            # gamma(T, beta) = 1/beta
    gamma_inv_horizon: float        # 1/gamma(T, beta) = beta
    gamma_horizon_times_eps: float  # gamma(T, beta) * epsilon
    limit_constant: float           # limit of the above as epsilon -> 0+


def select_beta(epsilon: float, power: float = 1.0, raw_beta: float | None = None) -> BetaSelection:
    """Choose beta = epsilon**p and certify the two admissibility limits.

    For the power rule the limits hold symbolically: ``1/gamma(T, beta) =
    epsilon**p -> 0`` requires p > 0, and ``gamma(T, beta)*epsilon =
    epsilon**(1-p)`` stays bounded exactly when p <= 1 (limit 1 at p = 1,
    limit 0 below).  A raw beta override is accepted and screened through
    its effective power ``log(beta)/log(epsilon)``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if raw_beta is not None:
        if raw_beta <= 0.0:
            raise ValueError("beta must be positive")
        power = math.log(raw_beta) / math.log(epsilon)
        beta = float(raw_beta)
    else:
        beta = float(epsilon**power)
    if power > 1.0 + 1e-12:
        raise AdmissibilityError(
            f"rule beta = epsilon**{power:.6g}: gamma(T, beta)*epsilon = "
            f"epsilon**{1.0 - power:.6g} diverges as epsilon -> 0+"
        )
    if power <= 0.0:
        raise AdmissibilityError(
            f"rule beta = epsilon**{power:.6g}: 1/gamma(T, beta) does not vanish "
            f"as epsilon -> 0+"
        )
    return BetaSelection(
        epsilon=float(epsilon),
        beta=beta,
        power=float(power),
        gamma_horizon=1.0 / beta,
        gamma_inv_horizon=beta,
        gamma_horizon_times_eps=epsilon / beta,
        limit_constant=1.0 if abs(power - 1.0) <= 1e-12 else 0.0,
    )

"""Exact solution-operator multipliers for the supported problem families.

Each family supplies the scalar multipliers Q(t, lambda) and S(t, lambda)
that realize the (generally unbounded) solution operators through the
spectral calculus, together with a growth rate ``rho`` such that both
multipliers are controlled by ``exp(t*rho(lambda))``.  Multipliers are
evaluated in the scaled form ``multiplier * exp(-t*rho)``, which stays in
[0, C2] for every argument; the raw form only multiplies the scaled value
by ``exp(t*rho)`` and can therefore report overflow precisely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spectral import MAX_LOG, CoefficientVector

# Branch thresholds for degenerate multiplier arguments.
_CONFLUENT_TOL = 1e-10       # |lambda**2 - 4*lambda| below this: double root
_IMAG_RESIDUE_TOL = 1e-10    # larger imaginary residue signals an evaluation bug


@dataclass(frozen=True)
class PropagatorFamily:
    """Multiplier family of one evolution problem.

    ``q_scaled``/``s_scaled`` evaluate ``Q*exp(-t*rho)`` and
    ``S*exp(-t*rho)``; these are the growth-envelope ratios checked by
    :func:`growth_envelope_check`.  ``borel_constants = (C1, C2)`` bound the
    scaled Q multiplier from below and above (S is only bounded above; its
    lower envelope genuinely fails for the elliptic family at large lambda).
    """

    name: str
    borel_constants: tuple[float, float]
    rho: Callable[[np.ndarray], np.ndarray]
    rho_inverse: Callable[[float], float] | None
    q_scaled: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)
    s_scaled: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)
    s_envelope_time_factor: bool = False
    envelope_enforced: bool = True

    def _raw(self, scaled, t, lam):
        lam = np.asarray(lam, dtype=np.float64)
        exponents = t * np.asarray(self.rho(lam), dtype=np.float64)
        if np.any(exponents > MAX_LOG):
            bad = int(np.argmax(exponents))
            raise OverflowError(
                f"{self.name} multiplier exp({np.max(exponents):.6g}) overflows "
                f"at t={t:.6g}, lambda={np.ravel(lam)[bad]:.6g}"
            )
        return scaled(t, lam) * np.exp(exponents)

    def q_multiplier(self, t: float, lam) -> np.ndarray:
        """Exact Q multiplier; raises OverflowError outside floating range."""
        return self._raw(self.q_scaled, t, lam)

    def s_multiplier(self, t: float, lam) -> np.ndarray:
        """Exact S multiplier; raises OverflowError outside floating range."""
        return self._raw(self.s_scaled, t, lam)


def backward_parabolic_family() -> PropagatorFamily:
    """Backward-in-time parabolic problem: Q = S = exp(t*lambda)."""
    ones = lambda t, lam: np.ones_like(np.asarray(lam, dtype=np.float64))
    return PropagatorFamily(
        name="backward_parabolic",
        borel_constants=(1.0, 1.0),
        rho=lambda lam: np.asarray(lam, dtype=np.float64),
        rho_inverse=lambda r: float(r),
        q_scaled=ones,
        s_scaled=ones,
    )


def _elliptic_q_scaled(t, lam):
    mu = np.sqrt(np.asarray(lam, dtype=np.float64))
    # cosh(t*mu) * exp(-t*mu), stable for all arguments
    return 0.5 * (1.0 + np.exp(-2.0 * t * mu))


def _elliptic_s_scaled(t, lam):
    mu = np.sqrt(np.asarray(lam, dtype=np.float64))
    # sinh(t*mu)/mu * exp(-t*mu); expm1 realizes the series limit t as
    # t**2*lambda -> 0 without a separate branch (relative error < 1e-15)
    return -np.expm1(-2.0 * t * mu) / (2.0 * mu)


def elliptic_cauchy_family() -> PropagatorFamily:
    """Cauchy problem for elliptic equations: Q = cosh(t*sqrt(lambda)),
    S = sinh(t*sqrt(lambda))/sqrt(lambda)."""
    return PropagatorFamily(
        name="elliptic_cauchy",
        borel_constants=(0.5, 1.0),
        rho=lambda lam: np.sqrt(np.asarray(lam, dtype=np.float64)),
        rho_inverse=lambda r: float(r) ** 2,
        q_scaled=_elliptic_q_scaled,
        s_scaled=_elliptic_s_scaled,
        s_envelope_time_factor=True,
    )


def _damped_wave_multipliers(t, lam):
    lam = np.asarray(lam, dtype=np.float64)
    q = np.empty_like(lam)
    s = np.empty_like(lam)
    disc = lam * lam - 4.0 * lam
    confluent = np.abs(disc) < _CONFLUENT_TOL

    if np.any(confluent):
        chi = -0.5 * lam[confluent]
        expchi = np.exp(chi * t)
        q[confluent] = expchi * (1.0 - chi * t)
        s[confluent] = t * expchi

    rest = ~confluent
    if np.any(rest):
        root = np.sqrt(disc[rest].astype(np.complex128))
        chi_p = 0.5 * (-lam[rest] + root)
        chi_m = 0.5 * (-lam[rest] - root)
        exp_p = np.exp(chi_p * t)
        exp_m = np.exp(chi_m * t)
        qc = (chi_p * exp_m - chi_m * exp_p) / (chi_p - chi_m)
        sc = (exp_m - exp_p) / (chi_m - chi_p)
        residue = max(float(np.max(np.abs(qc.imag))), float(np.max(np.abs(sc.imag))))
        if residue > _IMAG_RESIDUE_TOL:
            raise FloatingPointError(
                f"damped-wave multiplier has imaginary residue {residue:.3e} "
                f"at t={t:.6g}; evaluation bug"
            )
        q[rest] = qc.real
        s[rest] = sc.real
    return q, s


def damped_wave_family() -> PropagatorFamily:
    """Strongly damped wave problem.

    The characteristic roots ``0.5*(-lambda +- sqrt(lambda**2 - 4*lambda))``
    have non-positive real part, so both multipliers decay; the growth rate
    is identically zero and the two-sided growth envelope is not enforced.
    Conjugate-root arguments (0 < lambda < 4) are evaluated in complex
    arithmetic and checked to be real; near-double roots use the confluent
    limit ``q = exp(chi t)(1 - chi t)``, ``s = t exp(chi t)`` with
    ``chi = -lambda/2``.
    """
    return PropagatorFamily(
        name="damped_wave",
        borel_constants=(1.0, 1.0),
        rho=lambda lam: np.zeros_like(np.asarray(lam, dtype=np.float64)),
        rho_inverse=None,
        q_scaled=lambda t, lam: _damped_wave_multipliers(t, lam)[0],
        s_scaled=lambda t, lam: _damped_wave_multipliers(t, lam)[1],
        s_envelope_time_factor=True,
        envelope_enforced=False,
    )


FAMILIES = {
    "backward_parabolic": backward_parabolic_family,
    "elliptic_cauchy": elliptic_cauchy_family,
    "damped_wave": damped_wave_family,
}


def family_by_name(name: str) -> PropagatorFamily:
    try:
        return FAMILIES[name]()
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; expected one of {sorted(FAMILIES)}"
        ) from None


def apply_propagator(scheme, which: str, t: float, v: CoefficientVector) -> CoefficientVector:
    """Apply a solution-operator multiplier mode by mode.

    ``scheme`` may be a :class:`PropagatorFamily` (exact multipliers) or any
    object exposing ``q_filtered``/``s_filtered`` (a regularized scheme).
    """
    if t < 0.0:
        raise ValueError("time must be non-negative")
    key = which.upper()
    if key not in ("Q", "S"):
        raise ValueError("which must be 'Q' or 'S'")
    lam = v.spectrum.eigenvalues
    if isinstance(scheme, PropagatorFamily):
        rates = np.asarray(scheme.rho(lam), dtype=np.float64)
        exponents = t * rates
        if np.any(exponents > MAX_LOG):
            bad = int(np.argmax(exponents))
            raise OverflowError(
                f"multiplier exp({exponents[bad]:.6g}) overflows for mode "
                f"{bad + 1} (lambda={lam[bad]:.6g}) at t={t:.6g}"
            )
        evaluator = scheme.q_multiplier if key == "Q" else scheme.s_multiplier
    else:
        evaluator = scheme.q_filtered if key == "Q" else scheme.s_filtered
    return CoefficientVector(np.asarray(evaluator(t, lam)) * v.values, v.spectrum)


@dataclass(frozen=True)
class EnvelopeReport:
    """Extremes of multiplier/exp(t*rho) over the sampled arguments."""

    multiplier: str
    min_ratio: float
    max_ratio: float
    lower_bound: float
    upper_bound: float
    lower_enforced: bool
    lower_ok: bool
    upper_ok: bool

    @property
    def passed(self) -> bool:
        return self.upper_ok and (self.lower_ok or not self.lower_enforced)


@dataclass(frozen=True)
class GrowthEnvelopeReport:
    family: str
    q: EnvelopeReport
    s: EnvelopeReport
    enforced: bool

    @property
    def passed(self) -> bool:
        if not self.enforced:
            return True
        return self.q.passed and self.s.passed


def growth_envelope_check(
    family: PropagatorFamily, samples, tol: float = 1e-9
) -> GrowthEnvelopeReport:
    """Check the two-sided growth envelope C1*exp(t*rho) <= Q <= C2*exp(t*rho).

    The lower bound is enforced for Q only; for S the report still carries
    the measured minimum ratio (for the elliptic family it falls below C1 at
    large lambda because of the extra 1/sqrt(lambda) decay), but only the
    upper envelope participates in the pass verdict.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("samples must be non-empty")
    c1, c2 = family.borel_constants
    ratios_q = []
    ratios_s = []
    for t, lam in samples:
        if t < 0.0 or lam <= 0.0:
            raise ValueError("samples need t >= 0 and lambda > 0")
        arr = np.asarray([lam], dtype=np.float64)
        ratios_q.append(float(family.q_scaled(float(t), arr)[0]))
        ratios_s.append(float(family.s_scaled(float(t), arr)[0]))

    def report(name, ratios, lower_enforced):
        lo, hi = float(np.min(ratios)), float(np.max(ratios))
        return EnvelopeReport(
            multiplier=name,
            min_ratio=lo,
            max_ratio=hi,
            lower_bound=c1,
            upper_bound=c2,
            lower_enforced=lower_enforced,
            lower_ok=lo >= c1 - tol,
            upper_ok=hi <= c2 + tol,
        )

    return GrowthEnvelopeReport(
        family=family.name,
        q=report("Q", ratios_q, True),
        s=report("S", ratios_s, False),
        enforced=family.envelope_enforced,
    )

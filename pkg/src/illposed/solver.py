"""Picard solver for the mild-solution integral equation.

Solves ``u(t) = Q(t)u0 [+ S(t)u1] + int_0^t S(t - tau) f(tau, u(tau)) dtau``
on a uniform time grid, with either the exact multipliers of a propagator
family or the bounded multipliers of a filter scheme.  The Volterra term
uses the composite trapezoid rule with the S multiplier evaluated exactly at
every node pair; the fixed point is reached by Picard iteration from the
zero function.  Evaluators for the stability and convergence bounds and for
the locally-Lipschitz truncation machinery live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .filters import FilterScheme
from .propagators import PropagatorFamily
from .spectral import CoefficientVector, SpectrumModel, scaled_norm

_ZERO_AT_ZERO_TOL = 1e-12
_CONTRACTION_INDEX_LIMIT = 10**6


class PicardConvergenceError(RuntimeError):
    """Picard iteration failed to converge; carries the residual history."""

    def __init__(self, message: str, residual_history: tuple[float, ...]):
        super().__init__(message)
        self.residual_history = residual_history


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_M = horizon."""

    horizon: float
    steps: int

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        nodes = np.linspace(0.0, self.horizon, self.steps + 1)
        nodes.setflags(write=False)
        object.__setattr__(self, "_nodes", nodes)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def spacing(self) -> float:
        return self.horizon / self.steps


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    residual_history: tuple[float, ...]
    final_residual: float
    tolerance: float
    contraction_index: int | None


@dataclass(frozen=True)
class Solution:
    """States on the time grid plus iteration diagnostics."""

    grid: TimeGrid
    spectrum: SpectrumModel
    coefficients: np.ndarray        # shape (steps + 1, mode_count)
    diagnostics: SolveDiagnostics

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        if coeffs.shape != (self.grid.steps + 1, self.spectrum.mode_count):
            raise ValueError("coefficient array shape does not match grid and spectrum")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def states(self) -> list[CoefficientVector]:
        return [CoefficientVector(row, self.spectrum) for row in self.coefficients]

    def state(self, i: int) -> CoefficientVector:
        return CoefficientVector(self.coefficients[i], self.spectrum)

    def node_norms(self) -> np.ndarray:
        return np.linalg.norm(self.coefficients, axis=1)


@dataclass(frozen=True)
class Nonlinearity:
    """Reaction term f(t, u) with its declared Lipschitz regime.

    Exactly one of ``lipschitz_global`` (uniform constant) or
    ``lipschitz_local`` (a monotone map radius -> constant, valid on balls of
    that radius) must be declared.  ``f(t, 0) = 0`` is assumed throughout and
    enforced by a sampled check before every solve.
    """

    name: str
    space: str                      # "spectral" | "physical"
    lipschitz_global: float | None
    lipschitz_local: Callable[[float], float] | None
    zero_at_zero: bool = True
    _batch: Callable = field(repr=False, default=None)

    def __post_init__(self):
        if (self.lipschitz_global is None) == (self.lipschitz_local is None):
            raise ValueError("declare exactly one of lipschitz_global / lipschitz_local")
        if self.lipschitz_global is not None and self.lipschitz_global < 0.0:
            raise ValueError("lipschitz_global must be non-negative")

    def evaluate(self, t: float, v, spectrum: SpectrumModel | None = None) -> np.ndarray:
        """Apply the reaction to one coefficient vector."""
        if isinstance(v, CoefficientVector):
            spectrum = v.spectrum if spectrum is None else spectrum
            values = v.values
        else:
            if spectrum is None:
                raise ValueError("spectrum required for raw coefficient input")
            values = np.asarray(v, dtype=np.float64)
        return self.evaluate_batch(np.array([t]), values[None, :], spectrum)[0]

    def evaluate_batch(self, times: np.ndarray, states: np.ndarray,
                       spectrum: SpectrumModel) -> np.ndarray:
        """Apply the reaction to a stack of coefficient rows."""
        return self._batch(np.asarray(times, dtype=np.float64),
                           np.asarray(states, dtype=np.float64), spectrum)

    def lipschitz_at(self, radius: float) -> float:
        """Lipschitz constant valid on the ball of the given radius."""
        if self.lipschitz_global is not None:
            return self.lipschitz_global
        return float(self.lipschitz_local(radius))


def _rowwise(rule, times, values):
    return np.stack([np.asarray(rule(float(t), row), dtype=np.float64)
                     for t, row in zip(times, values)])


def from_spectral_rule(rule, name: str = "spectral", *, lipschitz_global=None,
                       lipschitz_local=None, zero_at_zero: bool = True,
                       vectorized: bool = False) -> Nonlinearity:
    """Wrap a rule acting directly on coefficient vectors.

    ``vectorized`` rules must accept a stacked (n, K) array and broadcast
    over rows; plain rules are applied row by row.
    """

    def batch(times, states, spectrum):
        if vectorized:
            return np.asarray(rule(times, states), dtype=np.float64)
        return _rowwise(rule, times, states)

    return Nonlinearity(name, "spectral", lipschitz_global, lipschitz_local,
                        zero_at_zero, batch)


def from_physical_rule(rule, name: str = "physical", *, lipschitz_global=None,
                       lipschitz_local=None, zero_at_zero: bool = True,
                       vectorized: bool = False) -> Nonlinearity:
    """Wrap a pointwise physical-space rule.

    Evaluation is pseudo-spectral: synthesize on the grid, apply the rule,
    project back onto the eigenbasis by quadrature.
    """

    def batch(times, states, spectrum):
        if not spectrum.has_grid:
            raise ValueError("physical-space reaction needs a spectrum with a grid")
        grid_values = states @ spectrum.basis
        if vectorized:
            reacted = np.asarray(rule(times, grid_values), dtype=np.float64)
        else:
            reacted = _rowwise(rule, times, grid_values)
        return (reacted * spectrum.quad_weights) @ spectrum.basis.T

    return Nonlinearity(name, "physical", lipschitz_global, lipschitz_local,
                        zero_at_zero, batch)


def zero_nonlinearity() -> Nonlinearity:
    return from_spectral_rule(lambda t, v: np.zeros_like(v), name="zero",
                              lipschitz_global=0.0, vectorized=True)


def linear_reaction(coefficient: float) -> Nonlinearity:
    """f(t, u) = c * u, globally Lipschitz with constant |c|."""
    c = float(coefficient)
    return from_spectral_rule(lambda t, v: c * v, name=f"linear({c:g})",
                              lipschitz_global=abs(c), vectorized=True)


def sup_embedding_constant(spectrum: SpectrumModel) -> float:
    """Largest grid value reachable from a unit-norm coefficient vector.

    By Cauchy-Schwarz ``sup_j |u(x_j)| <= c * ||u||`` with
    ``c = max_j sqrt(sum_k phi_k(x_j)^2)``; pointwise nonlinearities use it
    to declare rigorous local Lipschitz constants for the discrete system.
    """
    if not spectrum.has_grid:
        raise ValueError("embedding constant needs a spectrum with a grid")
    return float(np.sqrt(np.max(np.sum(spectrum.basis**2, axis=0))))


def cubic_reaction(spectrum: SpectrumModel, coupling: float = 1.0) -> Nonlinearity:
    """Pointwise cubic reaction f(u) = coupling * u**3.

    Locally Lipschitz: on a ball of radius E the declared constant is
    ``3*|coupling|*c**2*E**2`` with ``c`` the sup embedding constant of the
    spectrum, which dominates the true discrete constant.
    """
    c_emb = sup_embedding_constant(spectrum)
    a = float(coupling)
    scale = 3.0 * abs(a) * c_emb**2
    return from_physical_rule(
        lambda t, g: a * g**3,
        name=f"cubic({a:g})",
        lipschitz_local=lambda radius: scale * radius**2,
        vectorized=True,
    )


def truncate_nonlinearity(f: Nonlinearity, radius: float) -> Nonlinearity:
    """Radial retraction of a locally Lipschitz reaction onto a ball.

    ``f_B(t, w) = f(t, min(B/||w||, 1) * w)`` is globally Lipschitz with
    constant ``2 * L(B)``; arguments already inside the ball pass through
    bit-identically (no scaling is applied at all).
    """
    if not radius > 0.0 or math.isinf(radius):
        raise ValueError("truncation radius must be positive and finite")
    if f.lipschitz_local is None:
        raise ValueError("truncation applies to locally Lipschitz reactions")
    base_batch = f._batch
    global_constant = 2.0 * float(f.lipschitz_local(radius))

    def batch(times, states, spectrum):
        norms = np.linalg.norm(states, axis=1)
        over = norms > radius
        if np.any(over):
            states = states.copy()
            states[over] *= (radius / norms[over])[:, None]
        return base_batch(times, states, spectrum)

    return Nonlinearity(
        name=f"truncated({f.name}, B={radius:g})",
        space=f.space,
        lipschitz_global=global_constant,
        lipschitz_local=None,
        zero_at_zero=f.zero_at_zero,
        _batch=batch,
    )


def truncation_argument(w: np.ndarray, radius: float) -> np.ndarray:
    """The clipped argument min(B/||w||, 1) * w used by the truncation."""
    norm = scaled_norm(w)
    if norm <= radius:
        return np.asarray(w, dtype=np.float64)
    return (radius / norm) * np.asarray(w, dtype=np.float64)


def default_truncation_radius(lipschitz_local, m2: float, horizon: float,
                              beta: float, theta: float = 0.25) -> float:
    """Radius schedule tying the truncated growth to the amplification.

    Picks B so that ``2*m2*L(B)*horizon = theta*log(1/beta)``, found by
    bisecting the monotone map L.  With the power profile this keeps
    ``exp(2*m2*L(B)*t)/gamma(horizon - t, beta)`` vanishing for
    ``t < (1 - theta)*horizon`` as beta -> 0.  Returns ``inf`` when L is
    bounded below the target (truncation vacuous).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("radius schedule needs beta in (0, 1)")
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    target = theta * math.log(1.0 / beta) / (2.0 * m2 * horizon)
    lo, hi = 1e-12, 1.0
    while lipschitz_local(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    if lipschitz_local(lo) > target:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lipschitz_local(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sampled_lipschitz_ratio(f: Nonlinearity, spectrum: SpectrumModel, radius: float,
                            n_pairs: int = 64, seed: int = 0,
                            times=(0.0, 0.5, 1.0)) -> float:
    """Largest observed ||f(t,w1)-f(t,w2)|| / ||w1-w2|| on random pairs
    drawn inside the ball of the given radius."""
    rng = np.random.default_rng(seed)
    K = spectrum.mode_count
    worst = 0.0
    for _ in range(n_pairs):
        w1 = rng.standard_normal(K)
        w2 = rng.standard_normal(K)
        w1 *= rng.uniform(0.0, radius) / np.linalg.norm(w1)
        w2 *= rng.uniform(0.0, radius) / np.linalg.norm(w2)
        gap = np.linalg.norm(w1 - w2)
        if gap == 0.0:
            continue
        for t in times:
            delta = np.linalg.norm(
                f.evaluate(t, w1, spectrum) - f.evaluate(t, w2, spectrum))
            worst = max(worst, float(delta / gap))
    return worst


def _scheme_evaluators(scheme):
    if isinstance(scheme, FilterScheme):
        return scheme.q_filtered, scheme.s_filtered
    if isinstance(scheme, PropagatorFamily):
        return scheme.q_multiplier, scheme.s_multiplier
    raise TypeError("scheme must be a PropagatorFamily or FilterScheme")


def _multiplier_tables(scheme, grid: TimeGrid, spectrum: SpectrumModel):
    """Q and S multipliers at every node time (node i <-> lag i*spacing)."""
    q_eval, s_eval = _scheme_evaluators(scheme)
    lam = spectrum.eigenvalues
    nodes = grid.nodes
    q = np.empty((nodes.size, lam.size))
    s = np.empty((nodes.size, lam.size))
    for i, t in enumerate(nodes):
        q[i] = q_eval(float(t), lam)
        s[i] = s_eval(float(t), lam)
    return q, s


def _volterra_trapezoid(s_table: np.ndarray, reacted: np.ndarray, spacing: float) -> np.ndarray:
    """Composite-trapezoid Volterra sum: out[i] = h * sum_j w_ij S[i-j]*F[j].

    Computed as a causal convolution per mode with trapezoid endpoint
    corrections; the S multiplier at lag d is the table row d, i.e. it is
    evaluated exactly at the node-pair time difference.
    """
    n, modes = reacted.shape
    out = np.empty_like(reacted)
    for k in range(modes):
        out[:, k] = np.convolve(reacted[:, k], s_table[:, k])[:n]
    out -= 0.5 * reacted[0][None, :] * s_table
    out -= 0.5 * s_table[0][None, :] * reacted
    out[0, :] = 0.0
    return spacing * out


def picard_map(states: np.ndarray, data: CoefficientVector, scheme, f: Nonlinearity,
               grid: TimeGrid, u1: CoefficientVector | None = None) -> np.ndarray:
    """One application of the fixed-point map to a full-grid candidate.

    ``states`` holds one coefficient row per node.  The result is
    ``Q(t_i) data [+ S(t_i) u1] + trapezoid Volterra term`` with the reaction
    evaluated pseudo-spectrally when it is a physical-space rule.
    """
    states = np.asarray(states, dtype=np.float64)
    expected = (grid.steps + 1, data.spectrum.mode_count)
    if states.shape != expected:
        raise ValueError(f"candidate must have shape {expected}, got {states.shape}")
    q_table, s_table = _multiplier_tables(scheme, grid, data.spectrum)
    return _picard_map_tables(states, data, q_table, s_table, f, grid, u1)


def _picard_map_tables(states, data, q_table, s_table, f, grid, u1):
    reacted = f.evaluate_batch(grid.nodes, states, data.spectrum)
    out = q_table * data.values[None, :]
    out += _volterra_trapezoid(s_table, reacted, grid.spacing)
    if u1 is not None:
        out += s_table * u1.values[None, :]
    return out


def _check_zero_at_zero(f: Nonlinearity, spectrum: SpectrumModel, grid: TimeGrid):
    if not f.zero_at_zero:
        raise ValueError(f"reaction {f.name!r} does not declare f(t, 0) = 0")
    probe_times = np.array([0.0, 0.5 * grid.horizon, grid.horizon])
    zeros = np.zeros((probe_times.size, spectrum.mode_count))
    reacted = f.evaluate_batch(probe_times, zeros, spectrum)
    worst = float(np.max(np.abs(reacted)))
    if worst > _ZERO_AT_ZERO_TOL:
        raise ValueError(
            f"reaction {f.name!r} violates f(t, 0) = 0 (|f(t,0)| up to {worst:.3e})"
        )


def contraction_index(m2: float, lipschitz: float, gamma_horizon: float,
                      horizon: float) -> int:
    """Smallest m with ``(m2*L*gamma(T,beta)*T)**m / m! < 1``.

    Some power of the fixed-point map with this index is a contraction.
    Evaluated by accumulating ``log(x) - log(m)`` (never forming factorials),
    so arbitrarily large arguments cannot overflow; combinations needing more
    than 10**6 compositions are rejected as impractical.
    """
    for name, value in (("m2", m2), ("lipschitz", lipschitz),
                        ("gamma_horizon", gamma_horizon), ("horizon", horizon)):
        if value <= 0.0:
            raise ValueError(f"{name} must be positive")
    x = m2 * lipschitz * gamma_horizon * horizon
    log_x = math.log(x)
    log_term = 0.0
    for m in range(1, _CONTRACTION_INDEX_LIMIT + 1):
        log_term += log_x - math.log(m)
        if log_term < 0.0:
            return m
    raise ValueError(
        f"contraction index exceeds {_CONTRACTION_INDEX_LIMIT} "
        f"(m2*L*gamma*T = {x:.6g}); impractical"
    )


def picard_solve(data: CoefficientVector, scheme, f: Nonlinearity, grid: TimeGrid,
                 tol: float = 1e-10, max_iters: int = 200,
                 u1: CoefficientVector | None = None) -> Solution:
    """Fixed point of the discretized integral equation by Picard iteration.

    Starts from the zero function and stops when the sup-over-nodes norm of
    the update falls below ``tol``.  The a-priori contraction index is
    attached to the diagnostics for context (when computable); it is never
    used as the stopping rule.  Non-convergence raises
    :class:`PicardConvergenceError` with the full residual history.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    spectrum = data.spectrum
    _check_zero_at_zero(f, spectrum, grid)
    q_table, s_table = _multiplier_tables(scheme, grid, spectrum)

    states = np.zeros((grid.steps + 1, spectrum.mode_count))
    history: list[float] = []
    converged = False
    for _ in range(max_iters):
        updated = _picard_map_tables(states, data, q_table, s_table, f, grid, u1)
        residual = float(np.max(np.linalg.norm(updated - states, axis=1)))
        history.append(residual)
        states = updated
        if residual < tol:
            converged = True
            break
    if not converged:
        raise PicardConvergenceError(
            f"no fixed point within {max_iters} iterations "
            f"(last residual {history[-1]:.3e})",
            tuple(history),
        )

    index = None
    if isinstance(scheme, FilterScheme) and f.lipschitz_global not in (None, 0.0):
        try:
            index = contraction_index(
                scheme.m2, f.lipschitz_global,
                float(scheme.gamma(scheme.horizon, scheme.beta)), grid.horizon)
        except ValueError:
            index = None

    diagnostics = SolveDiagnostics(
        iterations=len(history),
        residual_history=tuple(history),
        final_residual=history[-1],
        tolerance=tol,
        contraction_index=index,
    )
    return Solution(grid, spectrum, states, diagnostics)


def stability_bound(scheme: FilterScheme, t: float, lipschitz: float,
                    data_norm: float) -> float:
    """Upper bound for the regularized state norm at time t:
    ``exp(m2*L*t) * m1 * gamma(t, beta) * ||noisy data||``."""
    gamma_t = float(scheme.gamma(t, scheme.beta))
    return math.exp(scheme.m2 * lipschitz * t) * scheme.m1 * gamma_t * data_norm


def _error_bound(scheme, t, epsilon, rate, weighted_data_norm, weighted_reaction_integral):
    gamma_gap = float(scheme.gamma(scheme.horizon - t, scheme.beta))
    gamma_T = float(scheme.gamma(scheme.horizon, scheme.beta))
    core = scheme.m1 * gamma_T * epsilon * weighted_data_norm + weighted_reaction_integral
    return core * math.exp(rate * t) / gamma_gap


def error_bound(scheme: FilterScheme, t: float, epsilon: float, lipschitz: float,
                weighted_data_norm: float, weighted_reaction_integral: float) -> float:
    """A-priori error bound for a globally Lipschitz reaction:
    ``(m1*gamma(T,b)*eps*||u0||_w + int ||f||_w) * exp(m2*L*t) / gamma(T-t, b)``."""
    return _error_bound(scheme, t, epsilon, scheme.m2 * lipschitz,
                        weighted_data_norm, weighted_reaction_integral)


def truncated_error_bound(scheme: FilterScheme, t: float, epsilon: float,
                          lipschitz_at_radius: float, weighted_data_norm: float,
                          weighted_reaction_integral: float) -> float:
    """Error bound for the truncated (locally Lipschitz) solve; the
    exponential rate doubles to ``2*m2*L(B)``."""
    return _error_bound(scheme, t, epsilon, 2.0 * scheme.m2 * lipschitz_at_radius,
                        weighted_data_norm, weighted_reaction_integral)

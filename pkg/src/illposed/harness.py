"""Manufactured-solution experiments for the regularized solver.

An experiment manufactures a band-limited exact solution with the exact
(unbounded) multipliers, injects exact-norm noise into the initial data,
selects the regularization parameter from the noise level, solves the
regularized equation, and compares the measured error at every node against
the a-priori bound.  Sweeping the noise level yields empirical convergence
slopes to compare with the predicted exponent (T - t)/T.

Manufactured truths are band-limited, so the exact-family solve is a finite
computation despite the ill-posed growth; the ill-posedness enters only
through noise amplification, which is exactly what the bounds control.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .filters import filter_by_name, select_beta
from .propagators import family_by_name
from .spectral import (
    MAX_LOG,
    CoefficientVector,
    SpectrumModel,
    dirichlet_laplacian_1d,
    h_norm,
    weighted_norm,
)
from .solver import (
    Nonlinearity,
    Solution,
    TimeGrid,
    cubic_reaction,
    default_truncation_radius,
    error_bound,
    linear_reaction,
    picard_solve,
    truncate_nonlinearity,
    truncated_error_bound,
    zero_nonlinearity,
)

FINE_FACTOR = 4  # truth grid refinement relative to the working grid

CSV_COLUMNS = (
    "epsilon", "beta", "t", "error_h", "bound_rhs",
    "gamma_inv_T", "gammaT_times_eps", "iters", "residual",
)

REPORTING_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


class ConfigError(ValueError):
    """An experiment configuration violates its invariants."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one manufactured-solution experiment."""

    family: str
    filter_kind: str
    modes: int
    grid_points: int
    horizon: float
    steps: int
    nonlinearity: dict | str
    u0: tuple
    epsilons: tuple
    beta_power: float = 1.0
    u1: tuple | None = None
    seed: int = 0
    tol: float = 1e-10
    max_iters: int = 200
    truncation: dict = field(default_factory=lambda: {"theta": 0.25})

    def __post_init__(self):
        if self.modes < 1 or self.modes > self.grid_points:
            raise ConfigError("need 1 <= K <= N")
        if self.steps < 8:
            raise ConfigError("need at least 8 time steps")
        if self.horizon <= 0.0:
            raise ConfigError("horizon must be positive")
        eps = tuple(float(e) for e in self.epsilons)
        if not eps:
            raise ConfigError("at least one noise level required")
        if any(not 0.0 < e < 1.0 for e in eps):
            raise ConfigError("noise levels must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("noise levels must be strictly decreasing")
        u0 = tuple(float(c) for c in self.u0)
        if len(u0) != self.modes:
            raise ConfigError("u0 coefficient list must have K entries")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "u0", u0)
        if self.u1 is not None:
            u1 = tuple(float(c) for c in self.u1)
            if len(u1) != self.modes:
                raise ConfigError("u1 coefficient list must have K entries")
            object.__setattr__(self, "u1", u1)

    def to_dict(self) -> dict:
        out = {
            "family": self.family,
            "filter": self.filter_kind,
            "K": self.modes,
            "N": self.grid_points,
            "T": self.horizon,
            "steps": self.steps,
            "nonlinearity": self.nonlinearity,
            "u0_coefficients": list(self.u0),
            "epsilons": list(self.epsilons),
            "beta_rule": {"power": self.beta_power},
            "seed": self.seed,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "truncation": dict(self.truncation),
        }
        if self.u1 is not None:
            out["u1_coefficients"] = list(self.u1)
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            beta_rule = raw.get("beta_rule", {"power": 1.0})
            return cls(
                family=raw["family"],
                filter_kind=raw["filter"],
                modes=int(raw["K"]),
                grid_points=int(raw["N"]),
                horizon=float(raw["T"]),
                steps=int(raw["steps"]),
                nonlinearity=raw.get("nonlinearity", "zero"),
                u0=tuple(raw["u0_coefficients"]),
                u1=tuple(raw["u1_coefficients"]) if "u1_coefficients" in raw else None,
                epsilons=tuple(raw["epsilons"]),
                beta_power=float(beta_rule["power"]),
                seed=int(raw.get("seed", 0)),
                tol=float(raw.get("tol", 1e-10)),
                max_iters=int(raw.get("max_iters", 200)),
                truncation=dict(raw.get("truncation", {"theta": 0.25})),
            )
        except KeyError as missing:
            raise ConfigError(f"config is missing required key {missing}") from None


def load_config(path: str) -> ExperimentConfig:
    with open(path) as handle:
        return ExperimentConfig.from_dict(json.load(handle))


def build_spectrum(cfg: ExperimentConfig) -> SpectrumModel:
    return dirichlet_laplacian_1d(cfg.modes, cfg.grid_points)


def build_nonlinearity(cfg: ExperimentConfig, spectrum: SpectrumModel) -> Nonlinearity:
    spec = cfg.nonlinearity
    if spec == "zero" or spec is None:
        return zero_nonlinearity()
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError("nonlinearity must be 'zero' or {'name': ..., 'params': {...}}")
    name = spec["name"]
    params = spec.get("params", {})
    if name == "zero":
        return zero_nonlinearity()
    if name == "linear":
        return linear_reaction(float(params.get("coefficient", 1.0)))
    if name == "cubic":
        return cubic_reaction(spectrum, float(params.get("coupling", 1.0)))
    raise ConfigError(f"unknown nonlinearity {name!r}")


@dataclass(frozen=True)
class TruthBundle:
    """Manufactured truth with everything the per-noise runs reuse."""

    spectrum: SpectrumModel
    family: object
    grid: TimeGrid
    u0: CoefficientVector
    u1: CoefficientVector | None
    working: Solution
    fine: Solution
    weighted_data_norm: float
    weighted_reaction_integral: float
    max_state_norm: float


def _manufacture(cfg: ExperimentConfig) -> TruthBundle:
    spectrum = build_spectrum(cfg)
    family = family_by_name(cfg.family)
    lam_top = float(spectrum.eigenvalues[-1])
    top_exponent = cfg.horizon * float(family.rho(np.array([lam_top]))[0])
    if top_exponent > MAX_LOG:
        raise ConfigError(
            f"exact multiplier exp({top_exponent:.6g}) overflows for mode "
            f"{cfg.modes} (lambda={lam_top:.6g}); reduce K or T"
        )
    u0 = CoefficientVector(np.array(cfg.u0), spectrum)
    u1 = CoefficientVector(np.array(cfg.u1), spectrum) if cfg.u1 is not None else None
    reaction = build_nonlinearity(cfg, spectrum)

    fine_grid = TimeGrid(cfg.horizon, FINE_FACTOR * cfg.steps)
    fine = picard_solve(u0, family, reaction, fine_grid,
                        tol=cfg.tol, max_iters=cfg.max_iters, u1=u1)
    working_grid = TimeGrid(cfg.horizon, cfg.steps)
    working = Solution(
        working_grid, spectrum, fine.coefficients[::FINE_FACTOR], fine.diagnostics)

    w_u0 = weighted_norm(u0, cfg.horizon, family)
    w_integral = _weighted_reaction_integral(reaction, fine, cfg.horizon, family)
    return TruthBundle(
        spectrum=spectrum,
        family=family,
        grid=working_grid,
        u0=u0,
        u1=u1,
        working=working,
        fine=fine,
        weighted_data_norm=w_u0,
        weighted_reaction_integral=w_integral,
        max_state_norm=float(np.max(fine.node_norms())),
    )


def _weighted_reaction_integral(reaction, fine: Solution, horizon: float, family) -> float:
    """Fine-grid trapezoid of the weighted norm of f(t, u(t))."""
    if reaction.name == "zero":
        return 0.0
    nodes = fine.grid.nodes
    reacted = reaction.evaluate_batch(nodes, fine.coefficients, fine.spectrum)
    norms = np.array([
        weighted_norm(CoefficientVector(row, fine.spectrum), horizon, family)
        for row in reacted
    ])
    return float(np.trapezoid(norms, nodes))


def manufacture_truth(cfg: ExperimentConfig) -> tuple[Solution, CoefficientVector]:
    """Manufacture the exact solution: solve with the exact multipliers from
    band-limited data on a grid ``FINE_FACTOR`` times finer, then restrict to
    the working grid."""
    bundle = _manufacture(cfg)
    return bundle.working, bundle.u0


def noise_direction(spectrum: SpectrumModel, seed) -> CoefficientVector:
    """Seeded pseudo-random direction rescaled to unit norm."""
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(spectrum.mode_count)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        raise RuntimeError("degenerate noise direction")
    return CoefficientVector(direction / norm, spectrum)


def noise_inject(u0: CoefficientVector, epsilon: float, seed) -> CoefficientVector:
    """Perturb the data by a seeded unit direction scaled to the noise level.

    The constructed perturbation has norm exactly ``epsilon`` (to rounding);
    re-measuring ``||u0_eps - u0||`` from the stored sums additionally picks
    up cancellation at the resolution of ``u0`` itself.
    """
    if epsilon < 0.0:
        raise ValueError("noise level must be non-negative")
    if epsilon == 0.0:
        return u0
    direction = noise_direction(u0.spectrum, seed)
    return CoefficientVector(u0.values + epsilon * direction.values, u0.spectrum)


def _truncation_radius(cfg: ExperimentConfig, reaction: Nonlinearity,
                       m2: float, beta: float) -> float:
    policy = cfg.truncation
    if "radius" in policy:
        return float(policy["radius"])
    theta = float(policy.get("theta", 0.25))
    radius = default_truncation_radius(
        reaction.lipschitz_local, m2, cfg.horizon, beta, theta=theta)
    if math.isinf(radius):
        raise ConfigError("truncation radius schedule returned infinity; "
                          "declare an explicit radius")
    return radius


def run_experiment(cfg: ExperimentConfig, epsilon: float, *, beta: float | None = None,
                   noise_seed=None, _bundle: TruthBundle | None = None):
    """Run one noise level: returns (rows, notices).

    Selects beta from the power rule (or uses the explicit override), builds
    the filter scheme, solves the regularized equation on the noisy data and
    evaluates the matching a-priori bound with the measured weighted data
    norm and reaction integral.  One row per time node.
    """
    bundle = _bundle if _bundle is not None else _manufacture(cfg)
    if beta is None:
        selection = select_beta(epsilon, power=cfg.beta_power)
        beta_value = selection.beta
    else:
        beta_value = float(beta)
    scheme = filter_by_name(cfg.filter_kind, bundle.family, beta_value, cfg.horizon)
    gamma_inv_T = beta_value
    gammaT_times_eps = epsilon / beta_value

    if noise_seed is None:
        noise_seed = cfg.seed
    noisy = noise_inject(bundle.u0, epsilon, noise_seed)

    reaction = build_nonlinearity(cfg, bundle.spectrum)
    notices = []
    if bundle.weighted_data_norm < 1.0:
        notices.append(
            f"epsilon={epsilon:g}: weighted data norm "
            f"{bundle.weighted_data_norm:g} < 1; the error bound's noise term "
            f"scales with it and need not dominate the raw noise"
        )
    if reaction.lipschitz_local is not None:
        radius = _truncation_radius(cfg, reaction, scheme.m2, beta_value)
        if bundle.max_state_norm > radius:
            notices.append(
                f"epsilon={epsilon:g}: truncation radius {radius:g} is below the "
                f"truth norm {bundle.max_state_norm:g}; bound not guaranteed"
            )
        run_reaction = truncate_nonlinearity(reaction, radius)
        rate_constant = reaction.lipschitz_local(radius)
        bound_at = lambda t: truncated_error_bound(
            scheme, t, epsilon, rate_constant,
            bundle.weighted_data_norm, bundle.weighted_reaction_integral)
    else:
        run_reaction = reaction
        bound_at = lambda t: error_bound(
            scheme, t, epsilon, reaction.lipschitz_global,
            bundle.weighted_data_norm, bundle.weighted_reaction_integral)

    solution = picard_solve(noisy, scheme, run_reaction, bundle.grid,
                            tol=cfg.tol, max_iters=cfg.max_iters, u1=bundle.u1)

    iters = solution.diagnostics.iterations
    residual = solution.diagnostics.final_residual
    rows = []
    for i, t in enumerate(bundle.grid.nodes):
        error = float(np.linalg.norm(
            solution.coefficients[i] - bundle.working.coefficients[i]))
        rows.append({
            "epsilon": float(epsilon),
            "beta": beta_value,
            "t": float(t),
            "error_h": error,
            "bound_rhs": float(bound_at(float(t))),
            "gamma_inv_T": gamma_inv_T,
            "gammaT_times_eps": gammaT_times_eps,
            "iters": iters,
            "residual": residual,
        })
    return rows, notices


@dataclass(frozen=True)
class RunReport:
    """Rows, fitted slopes and notices of one experiment (or sweep)."""

    config: dict
    rows: tuple
    slopes: tuple = ()
    notices: tuple = ()


def run_all(cfg: ExperimentConfig) -> RunReport:
    """Run every configured noise level (no slope fitting)."""
    bundle = _manufacture(cfg)
    rows = []
    notices = []
    for j, eps in enumerate(cfg.epsilons):
        new_rows, new_notices = run_experiment(
            cfg, eps, noise_seed=cfg.seed + j, _bundle=bundle)
        rows.extend(new_rows)
        notices.extend(new_notices)
    return RunReport(cfg.to_dict(), tuple(rows), (), tuple(notices))


def reporting_nodes(grid: TimeGrid) -> list[int]:
    """Grid indices closest to the quartiles of [0, T]."""
    return sorted({int(round(frac * grid.steps)) for frac in REPORTING_FRACTIONS})


def convergence_study(cfg: ExperimentConfig) -> RunReport:
    """Full noise sweep plus least-squares slopes of log error vs log eps.

    Slopes are fitted at the quartile reporting times and compared with the
    predicted exponent (T - t)/T; exact-recovery rows (zero error) are
    excluded from the fit with a notice.  The terminal time T is reported for
    completeness although its predicted exponent degenerates to zero.
    """
    if len(cfg.epsilons) < 3:
        raise ConfigError("a convergence study needs at least 3 noise levels")
    bundle = _manufacture(cfg)
    rows = []
    notices = []
    for j, eps in enumerate(cfg.epsilons):
        new_rows, new_notices = run_experiment(
            cfg, eps, noise_seed=cfg.seed + j, _bundle=bundle)
        rows.extend(new_rows)
        notices.extend(new_notices)

    nodes = bundle.grid.nodes
    slopes = []
    for idx in reporting_nodes(bundle.grid):
        t = float(nodes[idx])
        pairs = [(row["epsilon"], row["error_h"]) for row in rows
                 if row["t"] == t]
        kept = [(e, err) for e, err in pairs if err > 0.0]
        dropped = len(pairs) - len(kept)
        if dropped:
            notices.append(
                f"t={t:g}: excluded {dropped} zero-error (exact recovery) "
                f"run(s) from the slope fit")
        if len(kept) < 3:
            notices.append(f"t={t:g}: fewer than 3 usable noise levels; slope skipped")
            continue
        log_eps = np.log10([e for e, _ in kept])
        log_err = np.log10([err for _, err in kept])
        slope = float(np.polyfit(log_eps, log_err, 1)[0])
        slopes.append({
            "t": t,
            "slope": slope,
            "theoretical_exponent": (cfg.horizon - t) / cfg.horizon,
            "points": len(kept),
        })
    return RunReport(cfg.to_dict(), tuple(rows), tuple(slopes), tuple(notices))


def _format_number(value) -> str:
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def emit_report(report: RunReport, fmt: str, path: str) -> None:
    """Write the report as CSV (fixed column schema) or JSON (same rows plus
    a config echo); numbers carry 17 significant digits so values round-trip
    exactly."""
    if not report.rows:
        raise ValueError("refusing to emit an empty report")
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in report.rows:
            lines.append(",".join(_format_number(row[col]) for col in CSV_COLUMNS))
        text = "\n".join(lines) + "\n"
        with open(path, "w") as handle:
            handle.write(text)
    elif fmt == "json":
        payload = {
            "config": report.config,
            "rows": [dict(row) for row in report.rows],
            "slopes": [dict(s) for s in report.slopes],
            "notices": list(report.notices),
        }
        with open(path, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'json'")


def _decay_profile(horizon: float, eigenvalues: np.ndarray, scale: float = 1.0) -> tuple:
    return tuple(scale * np.exp(-horizon * eigenvalues))


def preset(name: str) -> ExperimentConfig:
    """Built-in experiment presets used by the acceptance suite and demos."""
    seed = 20260809
    eps = (1e-2, 1e-3, 1e-4, 1e-5)
    if name in ("parabolic_zero_cutoff", "parabolic_zero_quasi_boundary"):
        horizon = 0.25
        lam = np.arange(1, 17, dtype=float) ** 2
        return ExperimentConfig(
            family="backward_parabolic",
            filter_kind="cutoff" if name.endswith("cutoff") else "quasi_boundary",
            modes=16, grid_points=64, horizon=horizon, steps=128,
            nonlinearity="zero",
            u0=_decay_profile(horizon, lam),
            epsilons=eps, beta_power=1.0, seed=seed, tol=1e-10,
        )
    if name in ("parabolic_cubic_cutoff", "parabolic_cubic_quasi_boundary"):
        horizon = 0.05
        u0 = [0.0] * 16
        # single top-mode datum with weighted norm exactly 2
        u0[15] = 2.0 * math.exp(-horizon * 256.0)
        return ExperimentConfig(
            family="backward_parabolic",
            filter_kind="cutoff" if name.endswith("cutoff") else "quasi_boundary",
            modes=16, grid_points=64, horizon=horizon, steps=128,
            nonlinearity={"name": "cubic", "params": {"coupling": 1.0}},
            u0=tuple(u0),
            epsilons=eps, beta_power=1.0, seed=seed, tol=1e-10,
            truncation={"radius": 2.5},
        )
    if name == "parabolic_cubic_schedule":
        horizon = 0.05
        u0 = [0.0] * 16
        u0[0] = 0.3
        return ExperimentConfig(
            family="backward_parabolic",
            filter_kind="quasi_boundary",
            modes=16, grid_points=64, horizon=horizon, steps=128,
            nonlinearity={"name": "cubic", "params": {"coupling": 1.0}},
            u0=tuple(u0),
            epsilons=eps, beta_power=1.0, seed=seed, tol=1e-10,
            truncation={"theta": 0.25},
        )
    raise ConfigError(f"unknown preset {name!r}")


PRESET_NAMES = (
    "parabolic_zero_cutoff",
    "parabolic_zero_quasi_boundary",
    "parabolic_cubic_cutoff",
    "parabolic_cubic_quasi_boundary",
    "parabolic_cubic_schedule",
)

"""Spectral filter regularization for ill-posed nonlinear evolution equations.

The package represents the state space by spectral coefficients over a
positive self-adjoint operator, provides the exact (unbounded) solution
multipliers of the backward-parabolic, elliptic-Cauchy and damped-wave
families, constructs bounded filter surrogates (spectral cutoff and
quasi-boundary damping) with certified amplification and deviation
envelopes, solves the regularized integral equation by Picard iteration,
and verifies the predicted error bounds and convergence rates on
manufactured solutions.
"""

from .spectral import (
    CoefficientVector,
    GridFunction,
    SpectrumModel,
    analyze,
    dirichlet_laplacian_1d,
    h_norm,
    quadrature_norm,
    synthesize,
    weighted_norm,
)
from .propagators import (
    PropagatorFamily,
    apply_propagator,
    backward_parabolic_family,
    damped_wave_family,
    elliptic_cauchy_family,
    family_by_name,
    growth_envelope_check,
)
from .filters import (
    AdmissibilityError,
    BetaSelection,
    FilterScheme,
    GammaFunction,
    cutoff_filter,
    filter_bound_check,
    filter_by_name,
    filter_error_check,
    gamma_eval,
    gamma_property_check,
    quasi_boundary_filter,
    select_beta,
)
from .solver import (
    Nonlinearity,
    PicardConvergenceError,
    Solution,
    TimeGrid,
    contraction_index,
    cubic_reaction,
    default_truncation_radius,
    error_bound,
    from_physical_rule,
    from_spectral_rule,
    linear_reaction,
    picard_map,
    picard_solve,
    stability_bound,
    sup_embedding_constant,
    truncate_nonlinearity,
    truncated_error_bound,
    zero_nonlinearity,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    RunReport,
    convergence_study,
    emit_report,
    load_config,
    manufacture_truth,
    noise_inject,
    preset,
    run_all,
    run_experiment,
)

__version__ = "0.1.0"

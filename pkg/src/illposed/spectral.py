"""Spectral coefficient representation of the state space.

The state space is modelled by a finite family of eigenpairs of a positive
self-adjoint operator.  Elements are stored as real coefficient vectors over
the eigenbasis; an optional physical grid with quadrature weights supports
pseudo-spectral evaluation of pointwise nonlinearities.  The default concrete
instance is the one-dimensional Dirichlet Laplacian on (0, pi), whose sine
eigenfunctions are exactly orthonormal under the uniform-grid quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Largest x with exp(x) finite in float64.
MAX_LOG = float(np.log(np.finfo(np.float64).max))

_ORTHONORMALITY_TOL = 1e-12


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


def scaled_norm(values: np.ndarray) -> float:
    """Euclidean norm computed with overflow-safe rescaling."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return 0.0
    if not np.isfinite(peak):
        raise OverflowError("norm operand contains non-finite entries")
    return peak * float(np.sqrt(np.sum((values / peak) ** 2)))


@dataclass(frozen=True)
class SpectrumModel:
    """Finite spectral model of a positive self-adjoint operator.

    Parameters
    ----------
    eigenvalues : array, shape (K,)
        Strictly positive, strictly increasing.
    grid : array, shape (N,), optional
        Physical quadrature points; omit for a purely abstract spectrum.
    quad_weights : array, shape (N,), optional
        Quadrature weights matching ``grid``.
    basis : array, shape (K, N), optional
        Eigenfunction samples ``basis[k, j] = phi_k(x_j)``.  When present the
        basis must be discretely orthonormal under the quadrature weights.
    """

    eigenvalues: np.ndarray
    grid: np.ndarray | None = None
    quad_weights: np.ndarray | None = None
    basis: np.ndarray | None = None

    def __post_init__(self):
        lam = _frozen_array(self.eigenvalues)
        if lam.ndim != 1 or lam.size < 1:
            raise ValueError("eigenvalues must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(lam)):
            raise ValueError("eigenvalues must be finite")
        if lam[0] <= 0.0:
            raise ValueError("eigenvalues must be strictly positive")
        if lam.size > 1 and np.any(np.diff(lam) <= 0.0):
            raise ValueError("eigenvalues must be strictly increasing")
        object.__setattr__(self, "eigenvalues", lam)

        pieces = (self.grid, self.quad_weights, self.basis)
        if any(p is not None for p in pieces) and any(p is None for p in pieces):
            raise ValueError("grid, quad_weights and basis must be supplied together")
        if self.grid is not None:
            grid = _frozen_array(self.grid)
            weights = _frozen_array(self.quad_weights)
            basis = _frozen_array(self.basis)
            if grid.ndim != 1 or weights.shape != grid.shape:
                raise ValueError("grid and quad_weights must be matching 1-d arrays")
            if basis.shape != (lam.size, grid.size):
                raise ValueError("basis must have shape (mode_count, grid_size)")
            if lam.size > grid.size:
                raise ValueError("mode count exceeds grid size")
            gram = (basis * weights) @ basis.T
            defect = float(np.max(np.abs(gram - np.eye(lam.size))))
            if defect > _ORTHONORMALITY_TOL:
                raise ValueError(
                    f"eigenfunctions are not discretely orthonormal "
                    f"(defect {defect:.3e} > {_ORTHONORMALITY_TOL:.0e})"
                )
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "quad_weights", weights)
            object.__setattr__(self, "basis", basis)

    @property
    def mode_count(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def grid_size(self) -> int:
        return 0 if self.grid is None else int(self.grid.size)

    @property
    def has_grid(self) -> bool:
        return self.grid is not None

    def zero_vector(self) -> "CoefficientVector":
        return CoefficientVector(np.zeros(self.mode_count), self)


@dataclass(frozen=True)
class CoefficientVector:
    """Element of the state space, stored by its spectral coefficients."""

    values: np.ndarray
    spectrum: SpectrumModel

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1:
            raise ValueError("coefficients must be 1-d")
        if values.size != self.spectrum.mode_count:
            raise ValueError(
                f"coefficient length {values.size} does not match "
                f"mode count {self.spectrum.mode_count}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class GridFunction:
    """Samples of a physical-space function on the spectrum's grid."""

    values: np.ndarray
    spectrum: SpectrumModel

    def __post_init__(self):
        if not self.spectrum.has_grid:
            raise ValueError("grid functions need a spectrum with a physical grid")
        values = _frozen_array(self.values)
        if values.shape != (self.spectrum.grid_size,):
            raise ValueError("value length does not match grid size")
        object.__setattr__(self, "values", values)


def dirichlet_laplacian_1d(mode_count: int, grid_size: int) -> SpectrumModel:
    """Spectrum of -d^2/dx^2 on (0, pi) with zero boundary values.

    Eigenvalues are ``k**2`` and eigenfunctions ``sqrt(2/pi) sin(k x)``
    sampled on the uniform grid ``x_j = j pi / (N+1)``, which makes the
    discrete sine orthogonality exact for all modes up to ``grid_size``.
    """
    if mode_count < 1:
        raise ValueError("mode_count must be at least 1")
    if mode_count > grid_size:
        raise ValueError(f"mode_count {mode_count} exceeds grid_size {grid_size}")
    k = np.arange(1, mode_count + 1, dtype=np.float64)
    x = np.pi * np.arange(1, grid_size + 1, dtype=np.float64) / (grid_size + 1)
    weights = np.full(grid_size, np.pi / (grid_size + 1))
    basis = np.sqrt(2.0 / np.pi) * np.sin(np.outer(k, x))
    return SpectrumModel(k**2, x, weights, basis)


def h_norm(v: CoefficientVector) -> float:
    """Norm of the state space: the l2 norm of the coefficients."""
    return scaled_norm(v.values)


def weighted_norm(v: CoefficientVector, horizon: float, family) -> float:
    """Exponentially weighted norm encoding the source condition.

    Returns ``sqrt(sum_k exp(2*horizon*rho(lambda_k)) c_k**2)`` where ``rho``
    is the growth rate of ``family``.  The weight measures how much smoothing
    the data carries relative to the solution operator over ``horizon``.

    Raises
    ------
    OverflowError
        If any weight ``exp(horizon*rho(lambda_k))`` exceeds the floating
        range; the offending mode is named rather than silently saturated.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    rates = np.asarray(family.rho(v.spectrum.eigenvalues), dtype=np.float64)
    exponents = horizon * rates
    worst = int(np.argmax(exponents))
    if exponents[worst] > MAX_LOG:
        raise OverflowError(
            f"weight exp({exponents[worst]:.6g}) overflows for mode "
            f"{worst + 1} (lambda={v.spectrum.eigenvalues[worst]:.6g})"
        )
    terms = np.exp(exponents) * v.values
    if not np.all(np.isfinite(terms)):
        bad = int(np.argmax(~np.isfinite(terms)))
        raise OverflowError(f"weighted coefficient overflows for mode {bad + 1}")
    return scaled_norm(terms)


def synthesize(v: CoefficientVector, spectrum: SpectrumModel | None = None) -> GridFunction:
    """Evaluate the coefficient vector on the physical grid."""
    spectrum = v.spectrum if spectrum is None else spectrum
    if not spectrum.has_grid:
        raise ValueError("cannot synthesize on an abstract spectrum (no eigenfunctions)")
    return GridFunction(v.values @ spectrum.basis, spectrum)


def analyze(g: GridFunction, spectrum: SpectrumModel | None = None) -> CoefficientVector:
    """Project grid samples back onto the eigenbasis by quadrature.

    Exact for band-limited samples (modes up to the grid size) thanks to the
    discrete orthogonality of the basis.
    """
    spectrum = g.spectrum if spectrum is None else spectrum
    if not spectrum.has_grid:
        raise ValueError("cannot analyze on an abstract spectrum (no eigenfunctions)")
    return CoefficientVector(spectrum.basis @ (spectrum.quad_weights * g.values), spectrum)


def quadrature_norm(g: GridFunction) -> float:
    """Physical-space norm induced by the quadrature weights."""
    return scaled_norm(np.sqrt(g.spectrum.quad_weights) * g.values)

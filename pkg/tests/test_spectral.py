import math

import numpy as np
import pytest

from illposed import (
    CoefficientVector,
    GridFunction,
    analyze,
    backward_parabolic_family,
    dirichlet_laplacian_1d,
    h_norm,
    quadrature_norm,
    synthesize,
    weighted_norm,
)


def test_dirichlet_eigenvalues_are_squares():
    s = dirichlet_laplacian_1d(3, 8)
    assert np.array_equal(s.eigenvalues, [1.0, 4.0, 9.0])


def test_single_mode_single_point_grid():
    s = dirichlet_laplacian_1d(1, 1)
    assert s.grid_size == 1
    assert np.isclose(s.grid[0], np.pi / 2.0, rtol=0, atol=1e-15)


def test_more_modes_than_points_rejected():
    with pytest.raises(ValueError):
        dirichlet_laplacian_1d(5, 4)
    with pytest.raises(ValueError):
        dirichlet_laplacian_1d(0, 4)


@pytest.mark.parametrize("K,N", [(1, 1), (2, 8), (16, 64), (7, 7)])
def test_discrete_orthonormality(K, N):
    s = dirichlet_laplacian_1d(K, N)
    gram = (s.basis * s.quad_weights) @ s.basis.T
    assert np.max(np.abs(gram - np.eye(K))) <= 1e-12


@pytest.mark.parametrize("K,N", [(2, 8), (5, 16), (16, 64)])
def test_round_trip_is_identity(K, N):
    s = dirichlet_laplacian_1d(K, N)
    rng = np.random.default_rng(42)
    for _ in range(20):
        v = CoefficientVector(rng.standard_normal(K), s)
        back = analyze(synthesize(v))
        assert np.max(np.abs(back.values - v.values)) <= 1e-12


def test_analyze_pure_mode():
    s = dirichlet_laplacian_1d(4, 16)
    samples = np.sqrt(2.0 / np.pi) * np.sin(2.0 * s.grid)
    c = analyze(GridFunction(samples, s))
    expected = np.array([0.0, 1.0, 0.0, 0.0])
    assert np.max(np.abs(c.values - expected)) <= 1e-13


def test_cubed_sine_lands_on_modes_one_and_three():
    # sin^3 x = (3 sin x - sin 3x)/4, so a*phi_1 cubed has coefficients
    # 3a^3/(2 pi) at mode 1 and -a^3/(2 pi) at mode 3
    s = dirichlet_laplacian_1d(6, 32)
    a = 1.7
    u = a * np.sqrt(2.0 / np.pi) * np.sin(s.grid)
    c = analyze(GridFunction(u**3, s)).values
    expected_1 = 3.0 * a**3 / (2.0 * np.pi)
    expected_3 = -(a**3) / (2.0 * np.pi)
    assert np.isclose(c[0], expected_1, rtol=1e-12)
    assert np.isclose(c[2], expected_3, rtol=1e-12)
    assert np.isclose(c[0] / c[2], -3.0, rtol=1e-12)
    others = np.delete(c, [0, 2])
    assert np.max(np.abs(others)) <= 1e-13


def test_h_norm_values():
    s = dirichlet_laplacian_1d(2, 8)
    assert h_norm(CoefficientVector([0.0, 0.0], s)) == 0.0
    assert h_norm(CoefficientVector([1.0, 0.0], s)) == 1.0
    assert h_norm(CoefficientVector([3.0, 4.0], s)) == 5.0


def test_weighted_norm_values():
    fam = backward_parabolic_family()
    s1 = dirichlet_laplacian_1d(1, 4)
    assert weighted_norm(CoefficientVector([0.0], s1), 1.0, fam) == 0.0
    single = weighted_norm(CoefficientVector([1.0], s1), 1.0, fam)
    assert np.isclose(single, math.e, rtol=1e-14)
    s2 = dirichlet_laplacian_1d(2, 8)
    two = weighted_norm(CoefficientVector([1.0, 1.0], s2), 0.5, fam)
    assert np.isclose(two, math.sqrt(math.e + math.exp(4.0)), rtol=1e-14)


def test_norms_are_homogeneous_and_subadditive():
    fam = backward_parabolic_family()
    s = dirichlet_laplacian_1d(5, 16)
    rng = np.random.default_rng(3)
    for _ in range(25):
        a = rng.standard_normal(5)
        b = rng.standard_normal(5)
        scale = float(rng.uniform(-3.0, 3.0))
        for norm in (h_norm, lambda v: weighted_norm(v, 0.2, fam)):
            na = norm(CoefficientVector(a, s))
            nb = norm(CoefficientVector(b, s))
            nsum = norm(CoefficientVector(a + b, s))
            nscaled = norm(CoefficientVector(scale * a, s))
            assert nsum <= na + nb + 1e-12 * (na + nb)
            assert np.isclose(nscaled, abs(scale) * na, rtol=1e-12, atol=1e-300)
        # weights exp(2*T*rho) >= 1, so the weighted norm dominates
        assert weighted_norm(CoefficientVector(a, s), 0.2, fam) >= h_norm(
            CoefficientVector(a, s)) * (1.0 - 1e-14)


def test_weighted_norm_overflow_is_reported():
    fam = backward_parabolic_family()
    # eigenvalue 800 with horizon 1: exp(800) exceeds the floating range
    from illposed import SpectrumModel
    s = SpectrumModel(np.array([1.0, 800.0]))
    v = CoefficientVector([1.0, 1.0], s)
    with pytest.raises(OverflowError, match="mode 2"):
        weighted_norm(v, 1.0, fam)


def test_parseval_for_band_limited_functions():
    s = dirichlet_laplacian_1d(8, 32)
    rng = np.random.default_rng(11)
    for _ in range(10):
        v = CoefficientVector(rng.standard_normal(8), s)
        g = synthesize(v)
        assert np.isclose(h_norm(v) ** 2, quadrature_norm(g) ** 2, rtol=1e-10)


def test_synthesize_rejects_abstract_spectrum():
    from illposed import SpectrumModel
    s = SpectrumModel(np.array([1.0, 2.0]))
    v = CoefficientVector([1.0, 2.0], s)
    with pytest.raises(ValueError):
        synthesize(v)


def test_coefficient_vector_validation():
    s = dirichlet_laplacian_1d(3, 8)
    with pytest.raises(ValueError):
        CoefficientVector([1.0, 2.0], s)
    with pytest.raises(ValueError):
        CoefficientVector([1.0, np.nan, 2.0], s)


def test_spectrum_validation():
    from illposed import SpectrumModel
    with pytest.raises(ValueError):
        SpectrumModel(np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        SpectrumModel(np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        SpectrumModel(np.array([-1.0, 1.0]))

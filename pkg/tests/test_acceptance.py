"""Acceptance suite.

Each test certifies one release criterion end to end and prints a one-line
verdict; run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
Criteria with a runtime budget assert it.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from illposed import (
    CoefficientVector,
    GammaFunction,
    TimeGrid,
    backward_parabolic_family,
    contraction_index,
    cubic_reaction,
    cutoff_filter,
    damped_wave_family,
    dirichlet_laplacian_1d,
    elliptic_cauchy_family,
    emit_report,
    filter_bound_check,
    filter_error_check,
    gamma_property_check,
    h_norm,
    linear_reaction,
    noise_inject,
    picard_solve,
    quasi_boundary_filter,
    run_all,
    truncate_nonlinearity,
    zero_nonlinearity,
)
from illposed.harness import preset, convergence_study, run_experiment, _manufacture
from illposed.solver import picard_map


@contextmanager
def criterion(number, description, budget=None):
    start = time.monotonic()
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {number:2d} FAIL - {description}")
        raise
    elapsed = time.monotonic() - start
    stamp = f" [{elapsed:.2f}s" + (f" < {budget:.0f}s budget]" if budget else "]")
    print(f"ACCEPTANCE {number:2d} PASS - {description}{stamp}")
    if budget is not None:
        assert elapsed < budget


def test_criterion_01_gamma_axioms():
    with criterion(1, "amplification profile axioms on 1000 random samples", budget=1.0):
        report = gamma_property_check(GammaFunction(1.7), rtol=1e-12)
        assert report.passed
        assert report.identity_max_error <= 1e-12
        assert report.product_max_rel_error <= 1e-12
        assert report.quotient_max_rel_error <= 1e-12
        assert report.divergence_ok


def test_criterion_02_filter_certification():
    with criterion(2, "both filters certify bound and deviation on the parabolic family",
                   budget=5.0):
        family = backward_parabolic_family()
        for builder in (cutoff_filter, quasi_boundary_filter):
            for beta in (1e-1, 1e-2, 1e-3, 1e-4):
                scheme = builder(family, beta, 1.0)
                bound = filter_bound_check(scheme)
                error = filter_error_check(scheme)
                assert bound.sup_ratio_q <= scheme.m1 + 1e-9
                assert bound.sup_ratio_s <= scheme.m2 + 1e-9
                assert error.sup_weighted_q <= 1.0 + 1e-9
                assert error.sup_weighted_s <= 1.0 + 1e-9


def test_criterion_03_contraction_index():
    with criterion(3, "contraction index matches the brute-force loop oracle"):
        def oracle(x):
            term = 1.0
            for m in range(1, 10**6):
                term *= x / m
                if term < 1.0:
                    return m
            raise AssertionError

        assert contraction_index(1.0, 1.0, 10.0, 1.0) == 25 == oracle(10.0)
        assert contraction_index(1.0, 1.0, 1.0, 1.0) == 2 == oracle(1.0)


def test_criterion_04_solver_oracle_equivalence():
    with criterion(4, "single-mode solve matches exp(2t); trapezoid halves cleanly",
                   budget=10.0):
        spectrum = dirichlet_laplacian_1d(1, 4)
        data = CoefficientVector([1.0], spectrum)
        family = backward_parabolic_family()
        reaction = linear_reaction(1.0)
        errors = {}
        for steps in (64, 128, 256, 512):
            sol = picard_solve(data, family, reaction, TimeGrid(1.0, steps))
            errors[steps] = abs(sol.coefficients[-1, 0] - math.exp(2.0))
        assert errors[512] / math.exp(2.0) <= 1e-3
        for coarse, fine in ((64, 128), (128, 256), (256, 512)):
            ratio = errors[coarse] / errors[fine]
            assert 3.5 <= ratio <= 4.5, ratio


def test_criterion_05_stability_domination():
    with criterion(5, "amplification-weighted state norm obeys the stability bound "
                      "on 20 randomized runs"):
        rng = np.random.default_rng(20260809)
        family = backward_parabolic_family()
        tol = 1e-10
        for run in range(20):
            K = int(rng.integers(1, 7))
            spectrum = dirichlet_laplacian_1d(K, max(8, 2 * K))
            horizon = float(rng.uniform(0.3, 1.0))
            beta = 10.0 ** float(rng.uniform(-3.0, -0.7))
            eps = 10.0 ** float(rng.uniform(-4.0, -1.0))
            builder = cutoff_filter if run % 2 == 0 else quasi_boundary_filter
            scheme = builder(family, beta, horizon)
            reaction = (zero_nonlinearity() if run % 3 == 0
                        else linear_reaction(float(rng.uniform(0.0, 1.5))))
            data = CoefficientVector(rng.uniform(-1.0, 1.0, K), spectrum)
            noisy = noise_inject(data, eps, seed=run)
            grid = TimeGrid(horizon, 96)
            sol = picard_solve(noisy, scheme, reaction, grid, tol=tol)
            data_norm = h_norm(noisy)
            rate = scheme.m2 * reaction.lipschitz_global
            for i, t in enumerate(grid.nodes):
                lhs = float(np.linalg.norm(sol.coefficients[i])) \
                    / float(scheme.gamma(t, beta))
                rhs = math.exp(rate * t) * scheme.m1 * data_norm
                assert lhs <= rhs * (1.0 + 10.0 * tol), (run, i, lhs / rhs)


def test_criterion_06_error_bound_domination():
    with criterion(6, "measured error is dominated by the a-priori bound on all presets",
                   budget=60.0):
        names = ("parabolic_zero_cutoff", "parabolic_zero_quasi_boundary",
                 "parabolic_cubic_cutoff", "parabolic_cubic_quasi_boundary")
        for name in names:
            report = run_all(preset(name))
            assert len({row["epsilon"] for row in report.rows}) == 4
            for row in report.rows:
                assert row["error_h"] <= row["bound_rhs"] * 1.05, (
                    name, row["epsilon"], row["t"], row["error_h"] / row["bound_rhs"])


def test_criterion_07_rate_reproduction():
    with criterion(7, "fitted log-log slopes track (T-t)/T at the quartiles",
                   budget=30.0):
        for name in ("parabolic_zero_cutoff", "parabolic_zero_quasi_boundary"):
            report = convergence_study(preset(name))
            horizon = report.config["T"]
            interior = [s for s in report.slopes
                        if 0.0 < s["t"] < horizon]
            assert len(interior) == 3
            for s in interior:
                assert abs(s["slope"] - s["theoretical_exponent"]) <= 0.15, (name, s)


def test_criterion_08_truncation_semantics():
    with criterion(8, "truncation is inert inside the ball, halves at 2B, "
                      "and the truncated bound decays"):
        # solving with the truncated reaction reproduces the plain solve
        # bit for bit while every iterate stays inside the ball
        spectrum = dirichlet_laplacian_1d(3, 12)
        cubic = cubic_reaction(spectrum)
        data = CoefficientVector([0.3, 0.0, 0.0], spectrum)
        scheme = quasi_boundary_filter(backward_parabolic_family(), 1e-2, 0.4)
        grid = TimeGrid(0.4, 32)
        plain = picard_solve(data, scheme, cubic, grid)
        radius = 2.0 * float(np.max(plain.node_norms()))
        clipped = picard_solve(data, scheme, truncate_nonlinearity(cubic, radius), grid)
        assert np.array_equal(plain.coefficients, clipped.coefficients)

        # at twice the radius the clipped argument is exactly w/2
        from illposed.solver import truncation_argument
        w = np.array([0.0, 6.0, 8.0])
        assert np.array_equal(truncation_argument(w, 5.0), w / 2.0)

        # truncated error bound decays along eps = 1e-2..1e-5 under the
        # default radius schedule at t = T/2
        cfg = preset("parabolic_cubic_schedule")
        report = run_all(cfg)
        mid = cfg.horizon / 2.0
        bounds = [row["bound_rhs"] for row in report.rows
                  if abs(row["t"] - mid) < 1e-15]
        assert len(bounds) == 4
        assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:])), bounds


def test_criterion_09_noise_contract(tmp_path):
    with criterion(9, "noise has exact norm and seeded reports are bit-identical"):
        from illposed.harness import noise_direction
        spectrum = dirichlet_laplacian_1d(16, 64)
        rng = np.random.default_rng(1)
        u0 = CoefficientVector(rng.uniform(-1.0, 1.0, 16), spectrum)
        for eps in (1e-1, 1e-3, 1e-5, 1e-8):
            # the constructed perturbation carries the exact norm
            direction = noise_direction(spectrum, 7)
            constructed = float(np.linalg.norm(eps * direction.values))
            assert abs(constructed - eps) <= 1e-14 * eps
            # re-measuring from the stored sum adds cancellation only at the
            # resolution of u0 itself
            noisy = noise_inject(u0, eps, seed=7)
            measured = float(np.linalg.norm(noisy.values - u0.values))
            assert abs(measured - eps) <= 1e-14 * eps + 1e-15 * h_norm(u0)

        cfg = preset("parabolic_zero_cutoff")
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_report(run_all(cfg), "csv", str(first))
        emit_report(run_all(cfg), "csv", str(second))
        assert first.read_bytes() == second.read_bytes()


def test_criterion_10_degenerate_multipliers():
    with criterion(10, "degenerate multiplier limits match high-precision oracles"):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 50

        elliptic = elliptic_cauchy_family()
        got = elliptic.s_multiplier(0.5, np.array([1e-30]))[0]
        assert abs(got - 0.5) <= 1e-10

        damped = damped_wave_family()
        q = damped.q_multiplier(1.0, np.array([4.0]))[0]
        s = damped.s_multiplier(1.0, np.array([4.0]))[0]
        q_ref = float(3 * mpmath.exp(-2))
        s_ref = float(mpmath.exp(-2))
        assert abs(q - q_ref) <= 1e-10
        assert abs(s - s_ref) <= 1e-10

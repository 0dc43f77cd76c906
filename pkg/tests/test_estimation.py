import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risalign.errors import AmbiguousPhaseError, SingularDesignError, SolverFailureError
from risalign.estimation import (
    MLSolveInfo,
    build_design_matrix,
    closed_form_three_phase,
    design_pseudoinverse,
    dft_phase_estimate,
    equally_spaced_phases,
    linear_estimate,
    ml_estimate,
    mse_linear,
    phase_from_x,
    probe_triple_determinant,
    project_to_cone,
    trace_criterion,
)

TWO_PI = 2.0 * math.pi


def x_vector(z0: complex, z: complex) -> np.ndarray:
    """Ground-truth statistics vector for a reference-plus-element pair."""
    return np.array(
        [abs(z0) ** 2 + abs(z) ** 2, 2 * (z0 * z.conjugate()).real, 2 * (z0 * z.conjugate()).imag]
    )


def noiseless_powers(z0: complex, z: complex, phi: np.ndarray) -> np.ndarray:
    return np.abs(z0 + z * np.exp(1j * phi)) ** 2


def random_admissible_offsets(rng, n_probes):
    while True:
        phi = rng.uniform(0.0, TWO_PI, n_probes)
        try:
            trace_criterion(phi)
            return phi
        except SingularDesignError:  # pragma: no cover - vanishing probability
            continue


class TestDesignMatrix:
    def test_right_angle_rows(self):
        design = build_design_matrix([0.0, math.pi / 2, math.pi])
        expected = np.array([[1, 1, 0], [1, 0, 1], [1, -1, 0]], dtype=float)
        np.testing.assert_allclose(design, expected, atol=1e-15)

    def test_equally_spaced_four(self):
        design = build_design_matrix(equally_spaced_phases(4))
        expected = np.array(
            [[1, 1, 0], [1, 0, 1], [1, -1, 0], [1, 0, -1]], dtype=float
        )
        np.testing.assert_allclose(design, expected, atol=1e-15)

    @given(st.integers(0, 2**31))
    @settings(max_examples=100, deadline=None)
    def test_three_probe_determinant_identity(self, seed):
        # det of the 3x3 design equals the circular sine sum, and three
        # distinct offsets always give a nonsingular design.
        rng = np.random.default_rng(seed)
        phi = rng.uniform(0.0, TWO_PI, 3)
        if min(abs(phi[0] - phi[1]), abs(phi[1] - phi[2]), abs(phi[0] - phi[2])) < 1e-3:
            return
        det = np.linalg.det(build_design_matrix(phi))
        assert det == pytest.approx(probe_triple_determinant(*phi), abs=1e-12)
        assert det != 0.0

    def test_needs_three_probes(self):
        with pytest.raises(ValueError):
            build_design_matrix([0.0, 1.0])


class TestPseudoinverse:
    def test_equally_spaced_closed_form(self):
        design = build_design_matrix(equally_spaced_phases(4))
        pinv = design_pseudoinverse(design)
        closed = np.diag([1.0, 2.0, 2.0]) @ design.T / 4.0
        np.testing.assert_allclose(pinv, closed, atol=1e-12)

    def test_all_ones_image(self):
        rng = np.random.default_rng(8)
        for n_probes in (3, 5, 9):
            phi = random_admissible_offsets(rng, n_probes)
            pinv = design_pseudoinverse(build_design_matrix(phi))
            np.testing.assert_allclose(pinv @ np.ones(n_probes), [1, 0, 0], atol=1e-10)

    def test_left_inverse(self):
        rng = np.random.default_rng(9)
        phi = random_admissible_offsets(rng, 6)
        design = build_design_matrix(phi)
        pinv = design_pseudoinverse(design)
        np.testing.assert_allclose(pinv @ design, np.eye(3), atol=1e-10)

    def test_singular_design_rejected(self):
        design = build_design_matrix([0.1, 0.1, 0.1])
        with pytest.raises(SingularDesignError):
            design_pseudoinverse(design)


class TestLinearEstimate:
    def test_exact_interpolation(self):
        phi = np.array([0.0, math.pi / 2, math.pi])
        powers = noiseless_powers(1.0, 1.0, phi)
        x_hat = linear_estimate(powers, build_design_matrix(phi))
        np.testing.assert_allclose(x_hat, [2.0, 2.0, 0.0], atol=1e-12)

    def test_all_ones_measurement(self):
        rng = np.random.default_rng(10)
        phi = random_admissible_offsets(rng, 5)
        x_hat = linear_estimate(np.ones(5), build_design_matrix(phi))
        np.testing.assert_allclose(x_hat, [1.0, 0.0, 0.0], atol=1e-10)

    def test_recovers_ground_truth_noiseless(self):
        rng = np.random.default_rng(11)
        z0 = rng.standard_normal() + 1j * rng.standard_normal()
        z = rng.standard_normal() + 1j * rng.standard_normal()
        phi = equally_spaced_phases(5)
        x_hat = linear_estimate(noiseless_powers(z0, z, phi), build_design_matrix(phi))
        np.testing.assert_allclose(x_hat, x_vector(z0, z), atol=1e-10)

    def test_bias_structure(self):
        # Estimates are biased by sigma^2 in the first component only.
        rng = np.random.default_rng(12)
        z0, z = 1.0, 0.6 * np.exp(1j * 0.8)
        sigma = math.sqrt((1 + abs(z) ** 2) / 2.0)  # single-phase SNR 0 dB
        phi = equally_spaced_phases(3)
        design = build_design_matrix(phi)
        pinv = design_pseudoinverse(design)
        trials = 100_000
        fields = 1.0 + z * np.exp(1j * phi)
        noise = (
            rng.standard_normal((trials, 3)) + 1j * rng.standard_normal((trials, 3))
        ) * (sigma / math.sqrt(2))
        powers = np.abs(fields[None, :] + noise) ** 2
        x_hats = powers @ pinv.T
        x_true = x_vector(z0, z)
        errors = x_hats - x_true
        se = errors.std(axis=0, ddof=1) / math.sqrt(trials)
        assert abs(errors[:, 0].mean() - sigma**2) < 3 * se[0]
        assert abs(errors[:, 1].mean()) < 3 * se[1]
        assert abs(errors[:, 2].mean()) < 3 * se[2]


class TestPhaseFromX:
    def test_positive_axis(self):
        assert phase_from_x([5.0, 1.0, 0.0]) == 0.0

    def test_negative_imaginary(self):
        assert phase_from_x([5.0, 0.0, -1.0]) == pytest.approx(-math.pi / 2)

    def test_principal_boundary(self):
        assert phase_from_x([5.0, -1.0, 0.0]) == pytest.approx(math.pi)
        assert phase_from_x([5.0, -1.0, -0.0]) == pytest.approx(math.pi)

    def test_zero_vector_rejected(self):
        with pytest.raises(AmbiguousPhaseError):
            phase_from_x([1.0, 0.0, 0.0])


class TestDftPhaseEstimate:
    def test_aligned_case(self):
        assert dft_phase_estimate([4.0, 2.0, 0.0, 2.0]) == pytest.approx(0.0)

    def test_quarter_turn_case(self):
        assert dft_phase_estimate([2.0, 0.0, 2.0, 4.0]) == pytest.approx(-math.pi / 2)

    def test_matches_optimal_shift(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            z0 = rng.standard_normal() + 1j * rng.standard_normal()
            z = rng.standard_normal() + 1j * rng.standard_normal()
            phi = equally_spaced_phases(8)
            est = dft_phase_estimate(noiseless_powers(z0, z, phi))
            expected = math.atan2((z0 * z.conjugate()).imag, (z0 * z.conjugate()).real)
            assert est == pytest.approx(expected, abs=1e-10)

    def test_flat_powers_rejected(self):
        with pytest.raises(AmbiguousPhaseError):
            dft_phase_estimate([3.0, 3.0, 3.0])

    @given(st.integers(3, 12), st.integers(0, 2**31))
    @settings(max_examples=100, deadline=None)
    def test_equivalent_to_linear_path(self, n_probes, seed):
        rng = np.random.default_rng(seed)
        powers = rng.uniform(0.0, 5.0, n_probes)
        design = build_design_matrix(equally_spaced_phases(n_probes))
        try:
            dft = dft_phase_estimate(powers)
        except AmbiguousPhaseError:
            return
        linear = phase_from_x(linear_estimate(powers, design))
        assert dft == pytest.approx(linear, abs=1e-12)


class TestClosedFormThreePhase:
    def test_aligned(self):
        assert closed_form_three_phase(4.0, 2.0, 0.0) == pytest.approx(0.0)

    def test_quarter(self):
        assert closed_form_three_phase(2.0, 0.0, 2.0) == pytest.approx(-math.pi / 2)

    def test_matches_direct_argument(self):
        rng = np.random.default_rng(14)
        phi = np.array([0.0, math.pi / 2, math.pi])
        for _ in range(20):
            z0 = rng.standard_normal() + 1j * rng.standard_normal()
            z = rng.standard_normal() + 1j * rng.standard_normal()
            y1, y2, y3 = noiseless_powers(z0, z, phi)
            expected = math.atan2((z0 * z.conjugate()).imag, (z0 * z.conjugate()).real)
            assert closed_form_three_phase(y1, y2, y3) == pytest.approx(expected, abs=1e-10)

    def test_flat_rejected(self):
        with pytest.raises(AmbiguousPhaseError):
            closed_form_three_phase(1.0, 1.0, 1.0)


class TestConeProjection:
    @given(
        st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10)
    )
    @settings(max_examples=200, deadline=None)
    def test_projection_feasible_and_idempotent(self, a, b, c):
        x = np.array([a, b, c])
        p = project_to_cone(x)
        assert p[0] >= math.hypot(p[1], p[2]) - 1e-9
        np.testing.assert_allclose(project_to_cone(p), p, atol=1e-12)

    def test_interior_untouched(self):
        x = np.array([2.0, 1.0, 0.5])
        np.testing.assert_allclose(project_to_cone(x), x)


class TestMLEstimate:
    def _forward(self, rng, z0, z, phi, sigma, trials=1):
        fields = z0 + z * np.exp(1j * phi)
        noise = (
            rng.standard_normal((trials, phi.size))
            + 1j * rng.standard_normal((trials, phi.size))
        ) * (sigma / math.sqrt(2))
        return np.abs(fields[None, :] + noise) ** 2

    def test_high_snr_recovery(self):
        # Perturbation-free measurements at vanishing noise: the ML estimate
        # must land on the true statistics vector (linear path is the oracle,
        # exact at sigma = 0).
        phi = equally_spaced_phases(5)
        design = build_design_matrix(phi)
        z0, z = 1.0, 0.7 * np.exp(1j * 1.1)
        x_true = x_vector(z0, z)
        sigma = 1e-4
        powers = design @ x_true + sigma**2
        x_ml = ml_estimate(powers, design, sigma)
        linear_oracle = linear_estimate(design @ x_true, design)
        np.testing.assert_allclose(linear_oracle, x_true, atol=1e-10)
        np.testing.assert_allclose(x_ml, x_true, atol=1e-4)

    def test_feasibility_contract(self):
        rng = np.random.default_rng(15)
        phi = equally_spaced_phases(3)
        design = build_design_matrix(phi)
        for _ in range(25):
            z0 = rng.standard_normal() + 1j * rng.standard_normal()
            z = rng.standard_normal() + 1j * rng.standard_normal()
            sigma = rng.uniform(0.3, 2.0)
            powers = self._forward(rng, z0, z, phi, sigma)[0]
            x = ml_estimate(powers, design, sigma)
            assert x[0] >= math.hypot(x[1], x[2]) - 1e-9

    def test_objective_monotone(self):
        rng = np.random.default_rng(16)
        phi = equally_spaced_phases(4)
        design = build_design_matrix(phi)
        powers = self._forward(rng, 1.0, 0.5j, phi, 1.0)[0]
        info = MLSolveInfo()
        ml_estimate(powers, design, 1.0, info=info)
        objectives = np.array(info.objectives)
        assert np.all(np.diff(objectives) <= 1e-12 * np.maximum(1.0, np.abs(objectives[:-1])))

    def test_gradient_matches_central_differences(self):
        from risalign.estimation import _ml_gradient, _ml_objective

        rng = np.random.default_rng(17)
        phi = equally_spaced_phases(4)
        design = build_design_matrix(phi)
        sigma = 0.7
        powers = self._forward(rng, 1.2, 0.4 - 0.3j, phi, sigma)[0]
        for _ in range(10):
            raw = rng.standard_normal(3) * 2.0
            x = project_to_cone(raw)
            x[0] += abs(rng.standard_normal()) + 0.5  # strictly inside the cone
            grad = _ml_gradient(x, design, powers, sigma**2)
            step = 1e-6 * max(1.0, float(np.linalg.norm(x)))
            numeric = np.empty(3)
            for i in range(3):
                up, down = x.copy(), x.copy()
                up[i] += step
                down[i] -= step
                numeric[i] = (
                    _ml_objective(up, design, powers, sigma**2)
                    - _ml_objective(down, design, powers, sigma**2)
                ) / (2 * step)
            assert np.linalg.norm(grad - numeric) <= 1e-5 * max(
                1.0, float(np.linalg.norm(numeric))
            )

    def test_solver_failure_carries_best_iterate(self):
        phi = equally_spaced_phases(3)
        design = build_design_matrix(phi)
        powers = np.array([4.0, 2.0, 1.0])
        with pytest.raises(SolverFailureError) as info:
            ml_estimate(powers, design, 0.5, max_iterations=1)
        assert info.value.best_x is not None
        assert info.value.best_x.shape == (3,)

    def test_needs_positive_sigma(self):
        design = build_design_matrix(equally_spaced_phases(3))
        with pytest.raises(ValueError):
            ml_estimate(np.ones(3), design, 0.0)


class TestMseLinear:
    def test_zero_noise(self):
        design = build_design_matrix(equally_spaced_phases(4))
        assert mse_linear(design, [2.0, 1.0, 0.0], 0.0) == 0.0

    def test_equally_spaced_closed_form(self):
        # For the optimal design the MSE collapses to
        # sigma^2 ((5/L)(2 x1 + sigma^2) + sigma^2).
        for n_probes in (3, 4, 8):
            design = build_design_matrix(equally_spaced_phases(n_probes))
            x = x_vector(1.0, 0.5 * np.exp(1j * 0.3))
            sigma = 0.9
            expected = sigma**2 * (
                (5.0 / n_probes) * (2 * x[0] + sigma**2) + sigma**2
            )
            assert mse_linear(design, x, sigma) == pytest.approx(expected, rel=1e-12)

    def test_against_monte_carlo(self):
        rng = np.random.default_rng(18)
        phi = random_admissible_offsets(rng, 5)
        design = build_design_matrix(phi)
        pinv = design_pseudoinverse(design)
        z0 = 1.0 + 0.2j
        z = 0.5 - 0.8j
        x_true = x_vector(z0, z)
        sigma = 0.7
        trials = 100_000
        fields = z0 + z * np.exp(1j * phi)
        noise = (
            rng.standard_normal((trials, 5)) + 1j * rng.standard_normal((trials, 5))
        ) * (sigma / math.sqrt(2))
        powers = np.abs(fields[None, :] + noise) ** 2
        sq_err = np.sum((powers @ pinv.T - x_true) ** 2, axis=1)
        se = sq_err.std(ddof=1) / math.sqrt(trials)
        assert abs(sq_err.mean() - mse_linear(design, x_true, sigma)) < 3 * se


class TestTraceCriterion:
    def test_equally_spaced_optimum(self):
        rng = np.random.default_rng(19)
        for n_probes in (3, 4, 5, 8, 16):
            rotation = rng.uniform(0, TWO_PI)
            value = trace_criterion(equally_spaced_phases(n_probes, rotation))
            assert value == pytest.approx(5.0 / n_probes, abs=1e-10)

    def test_right_angle_triple_from_eigenvalues(self):
        # Independent route: eigenvalues of the literal Gram matrix.
        phi = np.array([0.0, math.pi / 2, math.pi])
        design = build_design_matrix(phi)
        eigenvalues = np.linalg.eigvalsh(design.T @ design)
        expected = float(np.sum(1.0 / eigenvalues))
        value = trace_criterion(phi)
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(2.5, rel=1e-12)
        assert value > 5.0 / 3.0

    @given(st.integers(0, 2**31))
    @settings(max_examples=200, deadline=None)
    def test_lower_bound_and_eigen_agreement(self, seed):
        rng = np.random.default_rng(seed)
        n_probes = int(rng.integers(3, 9))
        phi = rng.uniform(0.0, TWO_PI, n_probes)
        design = build_design_matrix(phi)
        eigenvalues = np.linalg.eigvalsh(design.T @ design)
        if eigenvalues[0] < 1e-6:
            return
        value = trace_criterion(phi)
        assert value == pytest.approx(float(np.sum(1.0 / eigenvalues)), rel=1e-8)
        assert value >= 5.0 / n_probes - 1e-9

    def test_singular_rejected(self):
        with pytest.raises(SingularDesignError):
            trace_criterion([0.2, 0.2, 0.2])


class TestRootOfUnitySums:
    def test_first_and_second_moments_vanish(self):
        rng = np.random.default_rng(20)
        for n_probes in range(3, 17):
            phi = equally_spaced_phases(n_probes, rng.uniform(0, TWO_PI))
            assert abs(np.sum(np.exp(1j * phi))) <= 1e-10
            assert abs(np.sum(np.exp(2j * phi))) <= 1e-10


def test_equally_spaced_phase_count_guard():
    with pytest.raises(ValueError):
        equally_spaced_phases(2)

import math

import numpy as np
import pytest

from risalign.errors import GeometryError, HarvesterDomainError
from risalign.scenario import (
    GeometryScenario,
    HarvesterModel,
    conversion_efficiency,
    generate_iid_channel,
    harvested_power,
    near_field_gains,
    sigma_for_target_snr,
)

# frozen from a 40-digit mpmath evaluation of the sigmoid model at the
# turn-on point with the default parameters
ETA_AT_TURN_ON = 0.62681683696215577842


class TestIidChannel:
    def test_unit_mean_square(self):
        rng = np.random.default_rng(1)
        channel = generate_iid_channel(1_000_000, 0.0, rng)
        assert np.mean(np.abs(channel.gains) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_zero_mean(self):
        rng = np.random.default_rng(2)
        channel = generate_iid_channel(1_000_000, 0.0, rng)
        mean = np.mean(channel.gains)
        se = 1.0 / math.sqrt(2 * channel.n_elements)
        assert abs(mean.real) < 3 * se and abs(mean.imag) < 3 * se

    def test_seed_reproducibility(self):
        a = generate_iid_channel(50, 0.3, np.random.default_rng(42))
        b = generate_iid_channel(50, 0.3, np.random.default_rng(42))
        np.testing.assert_array_equal(a.gains, b.gains)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            generate_iid_channel(0, 0.0, np.random.default_rng(0))


class TestGeometry:
    def test_single_element_at_wavelength_distance(self):
        lam = 0.125
        scene = GeometryScenario(
            wavelength=lam, rows=1, cols=1,
            tx_position=np.array([0.0, 0.0, lam]),
            rx_position=np.array([0.0, 0.0, 2 * lam]),
        )
        h, g = near_field_gains(scene)
        assert abs(h[0]) == pytest.approx(1.0 / (4 * math.pi), rel=1e-12)
        # distance of exactly one wavelength: phase -2 pi == 0
        assert np.angle(h[0]) == pytest.approx(0.0, abs=1e-9)

    def test_inverse_distance_amplitude(self):
        lam = 0.125
        near = GeometryScenario(
            wavelength=lam, rows=1, cols=1,
            tx_position=np.array([0.0, 0.0, 1.0]),
            rx_position=np.array([0.0, 0.0, 3.0]),
        )
        far = GeometryScenario(
            wavelength=lam, rows=1, cols=1,
            tx_position=np.array([0.0, 0.0, 2.0]),
            rx_position=np.array([0.0, 0.0, 3.0]),
        )
        h_near, _ = near_field_gains(near)
        h_far, _ = near_field_gains(far)
        assert abs(h_near[0]) == pytest.approx(2 * abs(h_far[0]), rel=1e-12)

    def test_matches_independent_distance_loop(self):
        lam = 0.125
        scene = GeometryScenario(
            wavelength=lam, rows=16, cols=16,
            tx_position=np.array([0.0, -3.0, 4.0]),
            rx_position=np.array([0.0, 1.0, 2.0]),
        )
        h, g = near_field_gains(scene)
        # independent recomputation: explicit loops, explicit grid indexing
        pitch = lam / 2
        idx = 0
        for row in range(16):
            for col in range(16):
                x = (col - 7.5) * pitch
                y = (row - 7.5) * pitch
                d_tx = math.dist((x, y, 0.0), (0.0, -3.0, 4.0))
                d_rx = math.dist((x, y, 0.0), (0.0, 1.0, 2.0))
                expected_h = lam / (4 * math.pi * d_tx) * np.exp(-2j * math.pi * d_tx / lam)
                expected_g = lam / (4 * math.pi * d_rx) * np.exp(-2j * math.pi * d_rx / lam)
                assert h[idx] == pytest.approx(expected_h, rel=1e-12)
                assert g[idx] == pytest.approx(expected_g, rel=1e-12)
                idx += 1

    def test_phase_periodic_in_wavelength(self):
        lam = 0.25
        base = GeometryScenario(
            wavelength=lam, rows=1, cols=1,
            tx_position=np.array([0.0, 0.0, 1.0]),
            rx_position=np.array([0.0, 0.0, 2.0]),
        )
        moved = GeometryScenario(
            wavelength=lam, rows=1, cols=1,
            tx_position=np.array([0.0, 0.0, 1.0 + lam]),
            rx_position=np.array([0.0, 0.0, 2.0]),
        )
        h0, _ = near_field_gains(base)
        h1, _ = near_field_gains(moved)
        delta = np.angle(h1[0]) - np.angle(h0[0])
        assert math.cos(delta) == pytest.approx(1.0, abs=1e-9)

    def test_coincident_position_rejected(self):
        scene = GeometryScenario(
            wavelength=0.125, rows=1, cols=1,
            tx_position=np.array([0.0, 0.0, 0.0]),
            rx_position=np.array([0.0, 0.0, 1.0]),
        )
        with pytest.raises(GeometryError):
            near_field_gains(scene)

    def test_grid_is_row_major_from_negative_corner(self):
        scene = GeometryScenario(
            wavelength=2.0, rows=2, cols=3,
            tx_position=np.array([0.0, 0.0, 5.0]),
            rx_position=np.array([0.0, 0.0, 6.0]),
        )
        points = scene.element_positions()
        np.testing.assert_allclose(points[0], [-1.0, -0.5, 0.0])
        np.testing.assert_allclose(points[1], [0.0, -0.5, 0.0])
        np.testing.assert_allclose(points[-1], [1.0, 0.5, 0.0])

    def test_bad_geometry_rejected(self):
        with pytest.raises(GeometryError):
            GeometryScenario(
                wavelength=-1.0, rows=1, cols=1,
                tx_position=np.zeros(3), rx_position=np.ones(3),
            )


class TestHarvester:
    def test_saturation_limit(self):
        assert harvested_power(10.0) == pytest.approx(0.1, abs=1e-6)

    def test_turn_on_point(self):
        assert conversion_efficiency(0.07) == pytest.approx(ETA_AT_TURN_ON, rel=1e-12)

    def test_harvested_power_monotone_and_bounded(self):
        grid = np.linspace(1e-6, 1.0, 1000)
        values = np.array([harvested_power(float(x)) for x in grid])
        assert np.all(np.diff(values) >= -1e-15)
        assert np.all(values < 0.1)

    def test_zero_input(self):
        assert harvested_power(0.0) == 0.0

    def test_negative_input_rejected(self):
        with pytest.raises(HarvesterDomainError):
            conversion_efficiency(-0.5)

    def test_bad_parameters_rejected(self):
        with pytest.raises(ValueError):
            HarvesterModel(steepness=-1.0)


def test_sigma_for_target_snr_round_trip():
    rng = np.random.default_rng(3)
    gains = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    sigma = sigma_for_target_snr(gains, 0.1)
    realized = np.sum(np.abs(gains) ** 2) / (64 * sigma**2)
    assert realized == pytest.approx(0.1, rel=1e-12)
    with pytest.raises(ValueError):
        sigma_for_target_snr(gains, 0.0)

"""Channel ensembles, harvesting geometry, and the rectifier efficiency model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, HarvesterDomainError
from .signal_model import ChannelRealization

TWO_PI = 2.0 * np.pi


def generate_iid_channel(
    n_elements: int, sigma: float, rng: np.random.Generator
) -> ChannelRealization:
    """Unit-variance iid circular Gaussian gains (Rayleigh ensemble)."""
    if n_elements < 1:
        raise ValueError("need at least one element")
    gains = (
        rng.standard_normal(n_elements) + 1j * rng.standard_normal(n_elements)
    ) / np.sqrt(2.0)
    return ChannelRealization(gains, noise_sigma=sigma)


@dataclass(frozen=True)
class GeometryScenario:
    """Planar element grid plus transmitter and harvester positions.

    The elements sit on the xy-plane at half-wavelength pitch, centered at
    the origin, indexed row-major from the most negative corner. Positions
    are in meters.
    """

    wavelength: float
    rows: int
    cols: int
    tx_position: np.ndarray
    rx_position: np.ndarray
    transmit_power: float = 1.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise GeometryError("wavelength must be positive")
        if self.rows < 1 or self.cols < 1:
            raise GeometryError("element grid must be non-empty")
        if not self.transmit_power > 0:
            raise GeometryError("transmit power must be positive")
        for name in ("tx_position", "rx_position"):
            pos = np.asarray(getattr(self, name), dtype=float)
            if pos.shape != (3,):
                raise GeometryError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, pos)

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    def element_positions(self) -> np.ndarray:
        """(N, 3) element centers, row-major from the most negative corner."""
        pitch = self.wavelength / 2.0
        xs = (np.arange(self.cols) - (self.cols - 1) / 2.0) * pitch
        ys = (np.arange(self.rows) - (self.rows - 1) / 2.0) * pitch
        grid_x, grid_y = np.meshgrid(xs, ys, indexing="xy")
        points = np.column_stack(
            [grid_x.ravel(), grid_y.ravel(), np.zeros(self.n_elements)]
        )
        return points


def near_field_gains(scenario: GeometryScenario):
    """Per-element hop gains with exact spherical spreading.

    Each hop contributes amplitude lambda / (4 pi d) and phase -2 pi d /
    lambda at the exact per-element Euclidean distance; no plane-wave
    approximation. Polarization and element patterns are deliberately out of
    scope, so geometry experiments built on this are trend-level only.
    """
    positions = scenario.element_positions()
    lam = scenario.wavelength

    def hop(target: np.ndarray) -> np.ndarray:
        dists = np.linalg.norm(positions - target[None, :], axis=1)
        if np.any(dists <= 0.0):
            raise GeometryError("tx/rx position coincides with an element")
        return lam / (4.0 * np.pi * dists) * np.exp(-1j * TWO_PI * dists / lam)

    return hop(scenario.tx_position), hop(scenario.rx_position)


@dataclass(frozen=True)
class HarvesterModel:
    """Sigmoidal RF-to-DC conversion model of the harvesting circuit.

    ``steepness`` (1/W) and ``turn_on`` (W) shape the sigmoid; ``p_sat`` (W)
    is the output saturation power. Defaults match the measured rectifier
    fit used throughout the experiments.
    """

    steepness: float = 30.0
    turn_on: float = 0.07
    p_sat: float = 0.1

    def __post_init__(self):
        if self.steepness <= 0 or self.turn_on <= 0 or self.p_sat <= 0:
            raise ValueError("harvester parameters must be positive")


def conversion_efficiency(power_in: float, model: HarvesterModel | None = None) -> float:
    """Fraction of received RF power delivered as DC, for power_in > 0 watts."""
    if model is None:
        model = HarvesterModel()
    power_in = float(power_in)
    if power_in <= 0:
        raise HarvesterDomainError("conversion efficiency needs positive input power")
    a, b, p_sat = model.steepness, model.turn_on, model.p_sat
    floor = 1.0 / (1.0 + np.exp(a * b))
    logistic = 1.0 / (1.0 + np.exp(-a * (power_in - b)))
    return float(p_sat * (logistic - floor) / (power_in * (1.0 - floor)))


def harvested_power(power_in: float, model: HarvesterModel | None = None) -> float:
    """DC output power for a given RF input power; zero at zero input."""
    if power_in == 0:
        return 0.0
    return conversion_efficiency(power_in, model) * power_in


def sigma_for_target_snr(gains: np.ndarray, snr_linear: float) -> float:
    """Noise level realizing a target per-element SNR for concrete gains."""
    if snr_linear <= 0:
        raise ValueError("target SNR must be positive")
    gains = np.asarray(gains)
    mean_gain_power = float(np.mean(np.abs(gains) ** 2))
    return float(np.sqrt(mean_gain_power / snr_linear))

"""Physical signal model: channel realizations and the power-measurement oracle.

All powers are linear watts. Phases are stored canonically in [0, 2pi).
The only source of randomness here is the measurement noise, drawn from a
caller-supplied numpy Generator so that trials are reproducible and
independent streams never interfere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, UndefinedSNRError

TWO_PI = 2.0 * np.pi


def wrap_phase(theta):
    """Reduce an angle (scalar or array) to the canonical interval [0, 2pi)."""
    wrapped = np.mod(theta, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2pi; fold those to 0.
    if np.isscalar(wrapped) or wrapped.ndim == 0:
        return 0.0 if wrapped >= TWO_PI else float(wrapped)
    wrapped = np.asarray(wrapped, dtype=float)
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


def principal_angle(theta):
    """Map an angle to the principal interval (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi
    wrapped = np.where(wrapped <= -np.pi, np.pi, wrapped)
    if np.ndim(theta) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class ChannelRealization:
    """Complex per-element coefficients plus the measurement noise level.

    ``gains[n]`` lumps every propagation factor of element n (and the
    transmit amplitude) except the adjustable phase shift. ``noise_sigma``
    is the circular-Gaussian amplitude std dev sigma, so the complex noise
    variance is sigma**2. ``transmit_power`` is carried only for scenario
    bookkeeping; the gains already include it.
    """

    gains: np.ndarray
    noise_sigma: float = 0.0
    transmit_power: float = 1.0

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if gains.ndim != 1 or gains.size < 1:
            raise ValueError("channel needs at least one element gain")
        if not np.all(np.isfinite(gains.view(float))):
            raise ValueError("channel gains must be finite")
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise ValueError("noise_sigma must be finite and >= 0")
        if not self.transmit_power > 0:
            raise ValueError("transmit_power must be positive")
        object.__setattr__(self, "gains", gains)

    @property
    def n_elements(self) -> int:
        return self.gains.size

    def amplitude_sum(self) -> float:
        """Sum of gain magnitudes; its square is the maximum achievable power."""
        return float(np.sum(np.abs(self.gains)))


def _check_lengths(channel: ChannelRealization, phases) -> np.ndarray:
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    if phases.shape != (channel.n_elements,):
        raise DimensionMismatchError(
            f"phase vector of length {phases.size} applied to a channel with "
            f"{channel.n_elements} elements"
        )
    return phases


def received_power_noiseless(channel: ChannelRealization, phases) -> float:
    """Deterministic received power |sum_n z_n exp(j theta_n)|**2."""
    phases = _check_lengths(channel, phases)
    total = np.sum(channel.gains * np.exp(1j * phases))
    return float(np.abs(total) ** 2)


def received_power_noisy(channel: ChannelRealization, phases, rng: np.random.Generator) -> float:
    """One noisy power measurement |sum_n z_n exp(j theta_n) + W|**2.

    W is a fresh circular complex Gaussian with variance sigma**2 (real and
    imaginary parts each of variance sigma**2 / 2). Every call consumes
    exactly one complex draw (two standard normals) from ``rng``, so a
    measurement sequence is fully determined by the generator state.
    """
    phases = _check_lengths(channel, phases)
    total = np.sum(channel.gains * np.exp(1j * phases))
    re, im = rng.standard_normal(2)
    scale = channel.noise_sigma / np.sqrt(2.0)
    w = scale * (re + 1j * im)
    return float(np.abs(total + w) ** 2)


def average_snr(channel: ChannelRealization) -> float:
    """Per-element SNR of the concrete realization: sum |z_n|^2 / (N sigma^2).

    Linear scale. The ensemble-average definition is recovered by the
    harness averaging this quantity over generated channels.
    """
    if channel.noise_sigma == 0:
        raise UndefinedSNRError("SNR undefined for a noiseless channel (sigma = 0)")
    return float(
        np.sum(np.abs(channel.gains) ** 2)
        / (channel.n_elements * channel.noise_sigma**2)
    )


def compose_indirect(h, g, transmit_power: float, noise_sigma: float = 0.0) -> ChannelRealization:
    """Combine per-element hop gains into effective coefficients sqrt(P) h_n g_n.

    The direct-harvesting variant is the same composition with g identically
    one.
    """
    h = np.atleast_1d(np.asarray(h, dtype=complex))
    g = np.atleast_1d(np.asarray(g, dtype=complex))
    if h.shape != g.shape:
        raise DimensionMismatchError(
            f"hop gain lengths differ: {h.size} vs {g.size}"
        )
    if not transmit_power > 0:
        raise ValueError("transmit_power must be positive")
    gains = np.sqrt(transmit_power) * h * g
    return ChannelRealization(gains, noise_sigma=noise_sigma, transmit_power=transmit_power)


@dataclass
class MeasurementOracle:
    """Power meter handed to alignment algorithms.

    Exposes only phase-in power-out measurements plus a call counter; the
    underlying gains are deliberately unreachable from the algorithm side.
    With ``noiseless=True`` (or sigma = 0) measurements are deterministic and
    no random draws are consumed.
    """

    channel: ChannelRealization
    rng: np.random.Generator | None = None
    noiseless: bool = False
    count: int = field(default=0, init=False)

    def __post_init__(self):
        if not self.noiseless and self.channel.noise_sigma > 0 and self.rng is None:
            raise ValueError("noisy measurements need a random generator")

    @property
    def n_elements(self) -> int:
        return self.channel.n_elements

    def _noise_free(self) -> bool:
        return self.noiseless or self.channel.noise_sigma == 0

    def measure(self, phases) -> float:
        """Measure received power at one configuration (one counter tick)."""
        self.count += 1
        if self._noise_free():
            return received_power_noiseless(self.channel, phases)
        return received_power_noisy(self.channel, phases, self.rng)

    def measure_element_sweep(self, phases, element: int, probe_phases) -> np.ndarray:
        """Measure a batch of configurations differing only in one element.

        ``probe_phases[l]`` is the absolute phase applied to ``element`` for
        probe l; all other elements stay at ``phases``. Counts one
        measurement per probe and consumes noise draws in probe order, so the
        result is identical to looping over :meth:`measure`.
        """
        phases = _check_lengths(self.channel, phases)
        probe_phases = np.atleast_1d(np.asarray(probe_phases, dtype=float))
        gains = self.channel.gains
        rest = np.sum(gains * np.exp(1j * phases)) - gains[element] * np.exp(
            1j * phases[element]
        )
        totals = rest + gains[element] * np.exp(1j * probe_phases)
        self.count += probe_phases.size
        if self._noise_free():
            return np.abs(totals) ** 2
        draws = self.rng.standard_normal((probe_phases.size, 2))
        scale = self.channel.noise_sigma / np.sqrt(2.0)
        w = scale * (draws[:, 0] + 1j * draws[:, 1])
        return np.abs(totals + w) ** 2

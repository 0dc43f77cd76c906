"""Sequential phase-alignment driven purely by power measurements.

Every algorithm here sees the channel only through a
:class:`~risalign.signal_model.MeasurementOracle`: it proposes phase
configurations, reads back powers, and updates one element at a time.
The continuous three-probe scheme is exact per update in the noiseless
case; the L-probe least-squares and DFT schemes trade extra measurements
for noise robustness; the discrete scheme quantizes the continuous estimate
onto the hardware phase set. A uniform random search judged against the
previous measurement and an exhaustive discrete maximizer serve as the
benchmark floor and ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousPhaseError, ConfigError, SearchSpaceError
from .estimation import (
    MIN_PROBES,
    build_design_matrix,
    closed_form_three_phase,
    dft_phase_estimate,
    design_pseudoinverse,
    phase_from_x,
    probe_triple_determinant,
)
from .signal_model import TWO_PI, ChannelRealization, MeasurementOracle, wrap_phase

# Probe offsets of the exact three-measurement update: current, +pi/2, +pi.
CLOSED_FORM_OFFSETS = np.array([0.0, np.pi / 2.0, np.pi])


def _estimate_shift(x) -> float | None:
    """Optimal shift from a statistics estimate, or None when ambiguous.

    A flat power response gives x[1] = x[2] = 0 up to solver roundoff; the
    residual dust would otherwise turn into an arbitrary rotation, so
    anything far below the power scale x[0] counts as ambiguous.
    """
    if np.hypot(x[1], x[2]) <= 1e-12 * abs(x[0]):
        return None
    try:
        return phase_from_x(x)
    except AmbiguousPhaseError:
        return None


@dataclass
class AlignmentTrace:
    """Per-update log of an alignment run.

    One entry per element update (or per random proposal): the cumulative
    measurement count, the element touched, and the phase it holds after the
    update. Enough to replay the configuration sequence from the initial
    phases, which is how the harness scores runs without the algorithms ever
    touching the channel.
    """

    initial_phases: np.ndarray
    counts: list[int] = field(default_factory=list)
    elements: list[int] = field(default_factory=list)
    phases: list[float] = field(default_factory=list)

    def record(self, count: int, element: int, phase: float):
        self.counts.append(count)
        self.elements.append(element)
        self.phases.append(phase)

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def total_measurements(self) -> int:
        return self.counts[-1] if self.counts else 0


@dataclass
class AlignmentConfig:
    """Knobs shared by the alignment routines.

    ``sweeps`` is the number of full passes over the elements (for the random
    search: one proposal per element per sweep). ``probes_per_update`` is L
    for the least-squares/DFT schemes. ``measurement_phases`` overrides the
    default equally spaced probe offsets of the least-squares scheme.
    ``phase_set`` is the discrete hardware set for the discrete scheme and
    the discrete random search; ``probe_triple`` selects the three probe
    values (members of the set) used by the discrete scheme, defaulting to
    the first admissible triple in set order. ``min_sweep_change`` optionally
    stops the continuous schemes early once no element moved by more than
    this much in a full sweep (disabled by default; the discrete scheme
    always stops on an unchanged sweep).
    """

    sweeps: int = 1
    probes_per_update: int = MIN_PROBES
    initial_phases: np.ndarray | None = None
    measurement_phases: np.ndarray | None = None
    phase_set: np.ndarray | None = None
    probe_triple: tuple[float, float, float] | None = None
    min_sweep_change: float | None = None

    def __post_init__(self):
        if self.sweeps < 1:
            raise ConfigError("need at least one sweep")
        if self.probes_per_update < MIN_PROBES:
            raise ConfigError(f"need at least {MIN_PROBES} probes per update")


def validate_phase_set(values) -> np.ndarray:
    """Check a discrete phase set: size >= 3, members in [0, 2pi), distinct."""
    omega = np.atleast_1d(np.asarray(values, dtype=float))
    if omega.size < 3:
        raise ConfigError("discrete phase set needs at least 3 values")
    if np.any(omega < 0) or np.any(omega >= TWO_PI):
        raise ConfigError("discrete phase values must lie in [0, 2pi)")
    if np.unique(omega).size != omega.size:
        raise ConfigError("discrete phase values must be pairwise distinct")
    return omega


def _starting_phases(oracle: MeasurementOracle, config: AlignmentConfig) -> np.ndarray:
    if config.initial_phases is None:
        return np.zeros(oracle.n_elements)
    phases = np.asarray(config.initial_phases, dtype=float).copy()
    if phases.shape != (oracle.n_elements,):
        raise ConfigError(
            f"initial phases of length {phases.size} for {oracle.n_elements} elements"
        )
    return wrap_phase(phases)


def align_closed_form(oracle: MeasurementOracle, config: AlignmentConfig):
    """Continuous alignment with the exact three-probe update.

    Per element: measure at the current configuration and with the element
    advanced by pi/2 and pi, then rotate the element by the closed-form
    optimal shift. 3 N M measurements in total. An ambiguous estimate (flat
    power response) leaves the element untouched.
    """
    theta = _starting_phases(oracle, config)
    trace = AlignmentTrace(theta.copy())
    for _ in range(config.sweeps):
        largest_move = 0.0
        for n in range(oracle.n_elements):
            probes = wrap_phase(theta[n] + CLOSED_FORM_OFFSETS)
            y1, y2, y3 = oracle.measure_element_sweep(theta, n, probes)
            try:
                shift = closed_form_three_phase(y1, y2, y3)
            except AmbiguousPhaseError:
                shift = 0.0
            theta[n] = wrap_phase(theta[n] + shift)
            largest_move = max(largest_move, abs(shift))
            trace.record(oracle.count, n, theta[n])
        if config.min_sweep_change is not None and largest_move < config.min_sweep_change:
            break
    return theta, trace


def align_least_squares(oracle: MeasurementOracle, config: AlignmentConfig):
    """Noise-robust alignment: L probes per element, least-squares update.

    Probes the element at its current phase plus each measurement offset,
    estimates the statistics vector by least squares, and rotates the element
    by the estimated optimal shift. L N M measurements in total.
    """
    if config.measurement_phases is None:
        offsets = wrap_phase(
            TWO_PI * np.arange(config.probes_per_update) / config.probes_per_update
        )
    else:
        offsets = wrap_phase(np.asarray(config.measurement_phases, dtype=float))
        if offsets.size < MIN_PROBES:
            raise ConfigError(f"need at least {MIN_PROBES} measurement phases")
    pinv = design_pseudoinverse(build_design_matrix(offsets))
    theta = _starting_phases(oracle, config)
    trace = AlignmentTrace(theta.copy())
    for _ in range(config.sweeps):
        largest_move = 0.0
        for n in range(oracle.n_elements):
            probes = wrap_phase(theta[n] + offsets)
            powers = oracle.measure_element_sweep(theta, n, probes)
            shift = _estimate_shift(pinv @ powers)
            if shift is None:
                shift = 0.0
            theta[n] = wrap_phase(theta[n] + shift)
            largest_move = max(largest_move, abs(shift))
            trace.record(oracle.count, n, theta[n])
        if config.min_sweep_change is not None and largest_move < config.min_sweep_change:
            break
    return theta, trace


def align_dft(oracle: MeasurementOracle, config: AlignmentConfig):
    """Least-squares alignment specialized to equally spaced probes.

    The update reduces to the argument of a single DFT bin of the probe
    powers, avoiding the matrix product. Identical results (and measurement
    stream) to :func:`align_least_squares` with equally spaced offsets.
    """
    n_probes = config.probes_per_update
    offsets = wrap_phase(TWO_PI * np.arange(n_probes) / n_probes)
    theta = _starting_phases(oracle, config)
    trace = AlignmentTrace(theta.copy())
    for _ in range(config.sweeps):
        largest_move = 0.0
        for n in range(oracle.n_elements):
            probes = wrap_phase(theta[n] + offsets)
            powers = oracle.measure_element_sweep(theta, n, probes)
            try:
                shift = dft_phase_estimate(powers)
            except AmbiguousPhaseError:
                shift = 0.0
            theta[n] = wrap_phase(theta[n] + shift)
            largest_move = max(largest_move, abs(shift))
            trace.record(oracle.count, n, theta[n])
        if config.min_sweep_change is not None and largest_move < config.min_sweep_change:
            break
    return theta, trace


def quantize_phase(alpha: float, omega) -> int:
    """Index of the phase-set member closest to ``alpha`` on the circle.

    Ties break to the smallest index. Equivalent to maximizing
    cos(alpha - omega_k).
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    zeta = np.mod(alpha - omega, TWO_PI)
    distance = np.minimum(zeta, TWO_PI - zeta)
    return int(np.argmin(distance))


def default_probe_triple(omega: np.ndarray) -> tuple[float, float, float]:
    """First admissible probe triple from the phase set, in set order."""
    size = omega.size
    for i in range(size - 2):
        for j in range(i + 1, size - 1):
            for k in range(j + 1, size):
                if abs(probe_triple_determinant(omega[i], omega[j], omega[k])) > 1e-9:
                    return float(omega[i]), float(omega[j]), float(omega[k])
    raise ConfigError("phase set contains no admissible probe triple")


def align_discrete(oracle: MeasurementOracle, config: AlignmentConfig):
    """Discrete alignment: probe three set members, quantize the estimate.

    Per element: measure with the element set to each of the three probe
    values (all members of the phase set, so every visited configuration is
    hardware-feasible), recover the continuous optimum from the exact 3x3
    solve, and snap it to the closest set member. Stops early when a full
    sweep changes nothing.
    """
    if config.phase_set is None:
        raise ConfigError("discrete alignment needs a phase set")
    omega = validate_phase_set(config.phase_set)
    if config.probe_triple is None:
        triple = default_probe_triple(omega)
    else:
        triple = tuple(float(v) for v in config.probe_triple)
        for value in triple:
            if not np.any(np.isclose(value, omega, rtol=0.0, atol=1e-12)):
                raise ConfigError(f"probe phase {value} is not in the phase set")
        if abs(probe_triple_determinant(*triple)) <= 1e-9:
            raise ConfigError("probe triple gives a singular design")
    probes = np.asarray(triple)
    inverse_design = np.linalg.inv(build_design_matrix(probes))

    if config.initial_phases is None:
        start = 0.0 if np.any(omega == 0.0) else float(omega[0])
        theta = np.full(oracle.n_elements, start)
    else:
        theta = _starting_phases(oracle, config)
        for value in theta:
            if not np.any(np.isclose(value, omega, rtol=0.0, atol=1e-12)):
                raise ConfigError("initial phases must lie in the phase set")
    trace = AlignmentTrace(theta.copy())

    for _ in range(config.sweeps):
        previous = theta.copy()
        for n in range(oracle.n_elements):
            powers = oracle.measure_element_sweep(theta, n, probes)
            target = _estimate_shift(inverse_design @ powers)
            if target is None:
                trace.record(oracle.count, n, theta[n])
                continue
            theta[n] = omega[quantize_phase(target, omega)]
            trace.record(oracle.count, n, theta[n])
        if np.array_equal(previous, theta):
            break
    return theta, trace


def random_benchmark(
    oracle: MeasurementOracle, config: AlignmentConfig, rng: np.random.Generator
):
    """Uniform random search with a compare-to-previous-measurement rule.

    Cycles over the elements; each proposal redraws one element's phase
    (uniform on [0, 2pi), or uniform over the phase set excluding the current
    value in discrete mode) and keeps it only if its measured power strictly
    beats the previous power measurement. The comparison baseline is always
    the most recent measurement, accepted or not, so a rejected low reading
    makes the next acceptance easier; this is what keeps the benchmark from
    locking onto a single-move local optimum. One initial baseline
    measurement plus one measurement per proposal.
    """
    omega = None
    if config.phase_set is not None:
        omega = validate_phase_set(config.phase_set)

    if config.initial_phases is None:
        if omega is None:
            theta = np.zeros(oracle.n_elements)
        else:
            start = 0.0 if np.any(omega == 0.0) else float(omega[0])
            theta = np.full(oracle.n_elements, start)
    else:
        theta = _starting_phases(oracle, config)

    trace = AlignmentTrace(theta.copy())
    previous_power = oracle.measure(theta)
    for _ in range(config.sweeps):
        for n in range(oracle.n_elements):
            current = theta[n]
            if omega is None:
                proposal = rng.uniform(0.0, TWO_PI)
            else:
                others = omega[~np.isclose(omega, current, rtol=0.0, atol=1e-12)]
                proposal = float(others[rng.integers(others.size)])
            theta[n] = proposal
            power = oracle.measure(theta)
            if not power > previous_power:
                theta[n] = current
            previous_power = power
            trace.record(oracle.count, n, theta[n])
    return theta, trace


_SEARCH_SPACE_GUARD = 100_000_000


def exhaustive_discrete_oracle(channel: ChannelRealization, omega):
    """Exact maximizer of the noiseless power over the full discrete grid.

    Splits the elements in two halves, enumerates each half's partial complex
    sums, and scans the outer sum of the two tables; ties resolve to the
    lexicographically smallest index tuple (most significant digit first).
    Guarded against search spaces beyond 1e8 configurations.
    """
    omega = validate_phase_set(omega)
    n = channel.n_elements
    if float(omega.size) ** n > _SEARCH_SPACE_GUARD:
        raise SearchSpaceError(
            f"{omega.size}^{n} configurations exceed the exhaustive-search guard"
        )
    spin = np.exp(1j * omega)

    def half_sums(gains: np.ndarray) -> np.ndarray:
        # Partial sums for every phase assignment of `gains`, enumerated with
        # the first element as the most significant digit.
        sums = np.zeros(1, dtype=complex)
        for gain in gains:
            sums = (sums[:, None] + gain * spin[None, :]).ravel()
        return sums

    first = n // 2
    front = half_sums(channel.gains[:first])
    back = half_sums(channel.gains[first:])
    # Row-major argmax over |front_i + back_j|^2 is lexicographic over the
    # concatenated digit tuples; scan in row blocks to bound memory.
    chunk_rows = max(1, 4_000_000 // back.size)
    best_power = -1.0
    best_flat = 0
    for start in range(0, front.size, chunk_rows):
        block = np.abs(front[start : start + chunk_rows, None] + back[None, :]) ** 2
        flat = int(np.argmax(block))
        if block.flat[flat] > best_power:
            best_power = float(block.flat[flat])
            best_flat = start * back.size + flat
    best_i, best_j = divmod(best_flat, back.size)

    def decode(index: int, length: int) -> list[int]:
        digits = [0] * length
        for pos in range(length - 1, -1, -1):
            digits[pos] = index % omega.size
            index //= omega.size
        return digits

    digits = decode(best_i, first) + decode(best_j, n - first)
    phases = omega[np.asarray(digits, dtype=int)]
    return phases, best_power

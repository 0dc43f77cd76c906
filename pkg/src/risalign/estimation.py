"""Single-phase estimation from power probes.

A probe sweep measures the received power at L offsets of one element's
phase. The noiseless power is affine in the statistics vector
``x = [|z0|^2 + |z|^2, 2 Re(z0 z*), 2 Im(z0 z*)]`` through the design matrix
with rows ``[1, cos(phi_l), sin(phi_l)]``; the optimal shift for the element
is the argument of ``x[1] + j x[2]``. This module provides the design
machinery, the least-squares and DFT-form estimators, the closed-form
three-probe solver, the maximum-likelihood estimator with its projected
gradient solver, and the mean-squared-error analysis used to rank probe
designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_i1_i0_ratio, log_bessel_i0
from .errors import AmbiguousPhaseError, SingularDesignError, SolverFailureError
from .signal_model import TWO_PI, wrap_phase

MIN_PROBES = 3

# Relative magnitude below which a complex phase argument is treated as zero.
_PHASE_ATOL = 1e-12


def equally_spaced_phases(n_probes: int, rotation: float = 0.0) -> np.ndarray:
    """The probe offsets phi_l = rotation + 2 pi (l - 1) / L, reduced to [0, 2pi)."""
    if n_probes < MIN_PROBES:
        raise ValueError(f"need at least {MIN_PROBES} probes, got {n_probes}")
    return wrap_phase(rotation + TWO_PI * np.arange(n_probes) / n_probes)


def _as_offsets(phi) -> np.ndarray:
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if phi.size < MIN_PROBES:
        raise ValueError(f"need at least {MIN_PROBES} probe offsets, got {phi.size}")
    return wrap_phase(phi)


def build_design_matrix(phi) -> np.ndarray:
    """L x 3 design matrix with rows [1, cos(phi_l), sin(phi_l)]."""
    phi = _as_offsets(phi)
    return np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])


def probe_triple_determinant(phi1: float, phi2: float, phi3: float) -> float:
    """Determinant of the 3-probe design, sin(p1-p3) + sin(p2-p1) + sin(p3-p2).

    A probe triple is admissible iff this is nonzero.
    """
    return math.sin(phi1 - phi3) + math.sin(phi2 - phi1) + math.sin(phi3 - phi2)


def design_pseudoinverse(design: np.ndarray) -> np.ndarray:
    """(A^T A)^-1 A^T for a full-rank design; raises on rank deficiency."""
    design = np.asarray(design, dtype=float)
    gram = design.T @ design
    # The Gram matrix of an admissible design is well conditioned; treat a
    # tiny smallest eigenvalue (relative to L) as singular.
    eigvals = np.linalg.eigvalsh(gram)
    if eigvals[0] <= 1e-10 * design.shape[0]:
        raise SingularDesignError(
            "probe offsets give a rank-deficient design matrix"
        )
    return np.linalg.solve(gram, design.T)


def linear_estimate(powers, design: np.ndarray) -> np.ndarray:
    """Least-squares statistics estimate pinv(A) @ y (no cone projection)."""
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    if powers.size != design.shape[0]:
        raise ValueError(
            f"got {powers.size} powers for a design with {design.shape[0]} rows"
        )
    return design_pseudoinverse(design) @ powers


def _principal(angle: float) -> float:
    if angle <= -math.pi:
        return angle + TWO_PI
    return angle


def phase_from_x(x) -> float:
    """Optimal shift Arg(x[1] + j x[2]) in (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    if x[1] == 0.0 and x[2] == 0.0:
        raise AmbiguousPhaseError("phase of the zero vector is undefined")
    return _principal(math.atan2(x[2], x[1]))


def dft_phase_estimate(powers) -> float:
    """Optimal-shift estimate Arg(sum_l y_l exp(j 2 pi (l-1) / L)).

    Assumes the powers were probed at equally spaced offsets starting at 0;
    on such designs it equals the least-squares path exactly.
    """
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    if powers.size < MIN_PROBES:
        raise ValueError(f"need at least {MIN_PROBES} probe powers, got {powers.size}")
    spin = np.exp(1j * TWO_PI * np.arange(powers.size) / powers.size)
    total = np.sum(powers * spin)
    if abs(total) <= _PHASE_ATOL * max(1.0, float(np.sum(np.abs(powers)))):
        raise AmbiguousPhaseError("probe powers carry no phase information")
    return _principal(math.atan2(total.imag, total.real))


def closed_form_three_phase(y1: float, y2: float, y3: float) -> float:
    """Exact optimal shift from probes at offsets 0, pi/2, pi.

    Returns Arg(y1 - y3 + j (2 y2 - y1 - y3)).
    """
    re = y1 - y3
    im = 2.0 * y2 - y1 - y3
    if re == 0.0 and im == 0.0:
        raise AmbiguousPhaseError("probe powers carry no phase information")
    return _principal(math.atan2(im, re))


def project_to_cone(x) -> np.ndarray:
    """Euclidean projection onto the feasible set x[0] >= hypot(x[1], x[2])."""
    x = np.asarray(x, dtype=float)
    radius = math.hypot(x[1], x[2])
    if x[0] >= radius:
        return x.copy()
    if x[0] <= -radius:
        return np.zeros(3)
    scale = 0.5 * (x[0] + radius)
    out = np.empty(3)
    out[0] = scale
    out[1:] = scale * x[1:] / radius
    return out


@dataclass
class MLSolveInfo:
    """Diagnostics from the projected-gradient likelihood solver."""

    iterations: int = 0
    converged: bool = False
    objectives: list[float] = field(default_factory=list)


def _ml_objective(x, design, powers, sigma_sq):
    s = design @ x
    s = np.maximum(s, 0.0)  # feasible x gives s >= 0; clip float dust
    u = 2.0 * np.sqrt(s * powers) / sigma_sq
    return float(np.sum(s / sigma_sq - log_bessel_i0(u)))


def _ml_gradient(x, design, powers, sigma_sq):
    s = np.maximum(design @ x, 0.0)
    u = 2.0 * np.sqrt(s * powers) / sigma_sq
    q = np.empty_like(u)
    tiny = u < 1e-12
    # As s -> 0 the product ratio(u) * sqrt(y/s) tends to y / sigma^2.
    q[tiny] = powers[tiny] / sigma_sq
    if np.any(~tiny):
        q[~tiny] = bessel_i1_i0_ratio(u[~tiny]) * np.sqrt(
            powers[~tiny] / s[~tiny]
        )
    return design.T @ ((1.0 - q) / sigma_sq)


def ml_estimate(
    powers,
    design: np.ndarray,
    sigma: float,
    x0=None,
    max_iterations: int = 10_000,
    rel_tol: float = 1e-10,
    info: MLSolveInfo | None = None,
) -> np.ndarray:
    """Maximum-likelihood statistics estimate under the measurement model.

    Minimizes the convex negative log-likelihood
    ``sum_l (a_l.x / sigma^2 - log I0(2 sqrt(a_l.x y_l) / sigma^2))``
    over the cone ``x[0] >= hypot(x[1], x[2])`` by projected gradient descent
    with backtracking. The warm start is the cone-projected least-squares
    estimate. Raises :class:`SolverFailureError` (carrying the best iterate)
    if the iteration cap is hit before the relative objective change drops
    below ``rel_tol``.
    """
    if sigma <= 0:
        raise ValueError("ml_estimate needs a positive noise level")
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    design = np.asarray(design, dtype=float)
    if powers.size != design.shape[0]:
        raise ValueError(
            f"got {powers.size} powers for a design with {design.shape[0]} rows"
        )
    sigma_sq = sigma * sigma
    x = project_to_cone(linear_estimate(powers, design) if x0 is None else x0)
    obj = _ml_objective(x, design, powers, sigma_sq)
    if info is not None:
        info.objectives.append(obj)
    step = 1.0
    stalled = 0
    for iteration in range(1, max_iterations + 1):
        grad = _ml_gradient(x, design, powers, sigma_sq)
        # Backtrack until the quadratic upper bound at the current step holds.
        while True:
            candidate = project_to_cone(x - step * grad)
            delta = candidate - x
            cand_obj = _ml_objective(candidate, design, powers, sigma_sq)
            bound = obj + grad @ delta + 0.5 * (delta @ delta) / step
            if cand_obj <= bound + 1e-15 * max(1.0, abs(obj)):
                break
            step *= 0.5
            if step < 1e-18:
                break
        improvement = obj - cand_obj
        if cand_obj <= obj:
            x, obj = candidate, cand_obj
        if info is not None:
            info.iterations = iteration
            info.objectives.append(obj)
        # Converged once the relative objective change stays negligible;
        # two consecutive stalls guard against a single over-backtracked step.
        if improvement <= rel_tol * max(1.0, abs(obj)):
            stalled += 1
            if stalled >= 2:
                if info is not None:
                    info.converged = True
                return x
        else:
            stalled = 0
        step *= 2.0  # let the step recover after conservative backtracks
    raise SolverFailureError(
        f"likelihood solver did not converge in {max_iterations} iterations",
        best_x=x,
        best_objective=obj,
    )


def mse_linear(design: np.ndarray, x, sigma: float) -> float:
    """Exact mean-squared error of the least-squares estimate at true x.

    ``2 sigma^2 tr(P^T P diag(Ax)) + sigma^4 tr(P^T P) + sigma^4`` with
    P the pseudoinverse of the design.
    """
    design = np.asarray(design, dtype=float)
    x = np.asarray(x, dtype=float)
    pinv = design_pseudoinverse(design)
    col_sq = np.sum(pinv * pinv, axis=0)  # squared column norms of P
    mean_powers = design @ x
    sigma_sq = sigma * sigma
    return float(
        2.0 * sigma_sq * np.sum(col_sq * mean_powers)
        + sigma_sq * sigma_sq * np.sum(col_sq)
        + sigma_sq * sigma_sq
    )


def trace_criterion(phi) -> float:
    """Design quality tr((A^T A)^-1) = sum_i 1/d_i^2 from the probe offsets.

    Evaluated through the closed form of the Gram matrix in terms of the
    first and second circular moments of the offsets: with
    r1 e^{j d1} = mean(e^{j phi}) and r2 e^{j d2} = mean(e^{2j phi}),

        (5 - 4 r1^2 - r2^2) / (L (1 - 2 r1^2 - r2^2 + 2 r1^2 r2 cos(d2 - 2 d1)))

    The minimum over designs is 5/L, attained exactly when both moments
    vanish (equally spaced offsets at any rotation).
    """
    phi = _as_offsets(phi)
    n_probes = phi.size
    first = np.mean(np.exp(1j * phi))
    second = np.mean(np.exp(2j * phi))
    r1, d1 = abs(first), np.angle(first)
    r2, d2 = abs(second), np.angle(second)
    denom_bracket = 1.0 - 2.0 * r1 * r1 - r2 * r2 + 2.0 * r1 * r1 * r2 * math.cos(
        d2 - 2.0 * d1
    )
    if denom_bracket <= 1e-12:
        raise SingularDesignError("probe offsets give a singular design")
    numer = 5.0 - 4.0 * r1 * r1 - r2 * r2
    return float(numer / (n_probes * denom_bracket))

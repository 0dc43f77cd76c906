"""Estimating one element's optimal phase shift from power probes alone.

Walks through the single-element measurement model: probe the received
power at a few phase offsets, fit the three sufficient statistics, and read
the optimal shift off their argument. Compares the closed-form three-probe
solver, the least-squares estimator, the DFT-form shortcut, and the
maximum-likelihood estimator, first without and then with noise.

Run:  python demos/01_single_element_estimation.py
"""

import math

import numpy as np

from risalign.estimation import (
    build_design_matrix,
    closed_form_three_phase,
    dft_phase_estimate,
    equally_spaced_phases,
    linear_estimate,
    ml_estimate,
    mse_linear,
    phase_from_x,
    trace_criterion,
)

rng = np.random.default_rng(7)

# The scene: a fixed background field z0 (every other element of the
# surface) plus one adjustable element with coefficient z. Rotating the
# element by theta steers z e^{j theta}; the best rotation aligns it with
# the background.
z0 = 1.0
z = 0.8 * np.exp(1j * 2.1)
optimal = math.atan2((z0 * z.conjugate()).imag, (z0 * z.conjugate()).real)
print(f"ground truth: |z| = {abs(z):.3f}, optimal shift = {optimal:+.4f} rad")

# --- noiseless: three probes are enough -------------------------------
probes = np.array([0.0, math.pi / 2, math.pi])
powers = np.abs(z0 + z * np.exp(1j * probes)) ** 2
print("\nnoiseless probe powers at offsets 0, pi/2, pi:", np.round(powers, 4))
estimate = closed_form_three_phase(*powers)
print(f"closed-form estimate: {estimate:+.4f} rad (error {estimate - optimal:+.1e})")

# --- the same answer through the least-squares machinery --------------
design = build_design_matrix(probes)
x_hat = linear_estimate(powers, design)
print(f"fitted statistics [x1, x2, x3] = {np.round(x_hat, 4)}")
print(f"least-squares phase: {phase_from_x(x_hat):+.4f} rad")

# --- noisy probes: more measurements, equally spaced ------------------
sigma = 0.6
n_probes = 16
offsets = equally_spaced_phases(n_probes)
noise = (rng.standard_normal(n_probes) + 1j * rng.standard_normal(n_probes)) * (
    sigma / math.sqrt(2)
)
noisy_powers = np.abs(z0 + z * np.exp(1j * offsets) + noise) ** 2

dft_est = dft_phase_estimate(noisy_powers)
ml_x = ml_estimate(noisy_powers, build_design_matrix(offsets), sigma)
ml_est = phase_from_x(ml_x)
print(f"\nnoisy run with sigma = {sigma}, L = {n_probes} equally spaced probes")
print(f"DFT-form estimate:  {dft_est:+.4f} rad (error {dft_est - optimal:+.3f})")
print(f"ML estimate:        {ml_est:+.4f} rad (error {ml_est - optimal:+.3f})")

# --- why equally spaced probes: the design quality criterion ----------
print("\ndesign quality tr((A^T A)^-1), smaller is better (minimum 5/L):")
for label, phi in [
    ("equally spaced L=3", equally_spaced_phases(3)),
    ("half circle    {0, pi/2, pi}", np.array([0.0, math.pi / 2, math.pi])),
    ("clustered      {0, 0.3, 0.6}", np.array([0.0, 0.3, 0.6])),
]:
    print(f"  {label}: {trace_criterion(phi):8.4f}")

# the closed-form MSE of the least-squares estimate at the truth
x_true = np.array(
    [abs(z0) ** 2 + abs(z) ** 2, 2 * (z0 * z.conjugate()).real, 2 * (z0 * z.conjugate()).imag]
)
for n_probes in (3, 8, 32):
    design = build_design_matrix(equally_spaced_phases(n_probes))
    print(
        f"predicted estimator MSE at sigma={sigma}, L={n_probes:3d}: "
        f"{mse_linear(design, x_true, sigma):.4f}"
    )

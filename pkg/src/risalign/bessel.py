"""Stable evaluation of log I0 and the I1/I0 ratio for non-negative arguments.

The likelihood objective needs log I0(u) and its derivative ratio I1(u)/I0(u)
at arguments that can reach u ~ 1/sigma^2, far beyond the overflow point of
the plain Bessel functions. Below the switchover the power series is summed
directly; above it the standard large-argument expansion is used. The
switchover point was chosen so both branches agree to ~1e-11 there.
"""

from __future__ import annotations

import numpy as np

_SWITCHOVER = 20.0
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 11

# Large-argument expansion I_nu(u) ~ e^u / sqrt(2 pi u) * sum_k c_k / u^k,
# c_k = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (8^k k!) with alternating sign
# absorbed into the coefficients.
def _asymptotic_coeffs(nu: int, terms: int) -> np.ndarray:
    mu = 4 * nu * nu
    coeffs = np.empty(terms)
    coeffs[0] = 1.0
    acc = 1.0
    for k in range(1, terms):
        acc *= -(mu - (2 * k - 1) ** 2) / (8.0 * k)
        coeffs[k] = acc
    return coeffs


_COEFFS_I0 = _asymptotic_coeffs(0, _ASYMPTOTIC_TERMS)
_COEFFS_I1 = _asymptotic_coeffs(1, _ASYMPTOTIC_TERMS)


def _poly_in_reciprocal(u: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    inv = 1.0 / u
    total = np.full_like(u, coeffs[-1])
    for c in coeffs[-2::-1]:
        total = total * inv + c
    return total


def _series_i0(u: np.ndarray) -> np.ndarray:
    q = 0.25 * u * u
    term = np.ones_like(u)
    total = np.ones_like(u)
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * m)
        total += term
    return total


def _series_i1(u: np.ndarray) -> np.ndarray:
    q = 0.25 * u * u
    term = 0.5 * u
    total = term.copy()
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * (m + 1))
        total += term
    return total


def log_bessel_i0(u):
    """log I0(u) for u >= 0, overflow-free for arbitrarily large u."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    if np.any(u < 0):
        raise ValueError("argument must be non-negative")
    out = np.empty_like(u)
    small = u < _SWITCHOVER
    if np.any(small):
        out[small] = np.log(_series_i0(u[small]))
    if np.any(~small):
        big = u[~small]
        out[~small] = (
            big
            - 0.5 * np.log(2.0 * np.pi * big)
            + np.log(_poly_in_reciprocal(big, _COEFFS_I0))
        )
    return float(out[0]) if scalar else out


def bessel_i1_i0_ratio(u):
    """I1(u)/I0(u) for u >= 0; tends to u/2 near zero and to 1 at infinity."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    if np.any(u < 0):
        raise ValueError("argument must be non-negative")
    out = np.empty_like(u)
    small = u < _SWITCHOVER
    if np.any(small):
        us = u[small]
        out[small] = _series_i1(us) / _series_i0(us)
    if np.any(~small):
        big = u[~small]
        out[~small] = _poly_in_reciprocal(big, _COEFFS_I1) / _poly_in_reciprocal(
            big, _COEFFS_I0
        )
    return float(out[0]) if scalar else out

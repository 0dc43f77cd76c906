"""Measurement-only phase alignment for RIS energy harvesting.

A numpy library implementing power-probe phase estimators, sequential
element-by-element alignment algorithms (continuous and discrete), channel
and harvesting-geometry scenarios, and a reproducible Monte-Carlo harness,
plus a batch CLI over JSON experiment configs.
"""

__version__ = "0.1.0"

from . import alignment, bessel, config, errors, estimation, harness, scenario, signal_model

__all__ = [
    "__version__",
    "alignment",
    "bessel",
    "config",
    "errors",
    "estimation",
    "harness",
    "scenario",
    "signal_model",
]

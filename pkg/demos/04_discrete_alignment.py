"""Hardware phases come from a finite set: quantized alignment vs the truth.

Real surfaces offer a few discrete phase states per element (here 4-PSK).
The discrete scheme probes three states, solves for the continuous optimum,
and snaps it to the closest member of the set. An exhaustive search over
all |set|^N configurations provides the exact ceiling, and the uniform
random search the floor.

Run:  python demos/04_discrete_alignment.py
"""

import math

import numpy as np

from risalign.alignment import (
    AlignmentConfig,
    align_discrete,
    exhaustive_discrete_oracle,
    quantize_phase,
)
from risalign.harness import discrete_experiment, nap
from risalign.scenario import generate_iid_channel
from risalign.signal_model import MeasurementOracle

QPSK = np.array([0.0, math.pi / 2, math.pi, 3 * math.pi / 2])

# quantization on the circle: closest member in circular distance
for alpha in (0.3, 0.8, 5.9):
    k = quantize_phase(alpha, QPSK)
    print(f"continuous optimum {alpha:+.2f} rad snaps to state {k} ({QPSK[k]:.2f} rad)")

# one channel, all three answers
channel = generate_iid_channel(10, sigma=0.0, rng=np.random.default_rng(5))
best_phases, best_power = exhaustive_discrete_oracle(channel, QPSK)
theta, trace = align_discrete(
    MeasurementOracle(channel, noiseless=True),
    AlignmentConfig(sweeps=20, phase_set=QPSK),
)
print(f"\nexhaustive maximum over 4^10 configurations: NAP {nap(channel, best_phases):.4f}")
print(f"sequential discrete scheme ({trace.total_measurements} measurements): "
      f"NAP {nap(channel, theta):.4f}")

# the ensemble picture
print("\nmean NAP over 200 channels (N = 10, noiseless):")
result = discrete_experiment(omega=QPSK, trials=200, seed=11, n_elements=10, sweeps=20)
for row in result.rows:
    if row["method"] == "oracle":
        print(f"  exhaustive oracle: {row['mnap']:.4f} +- {row['ci95']:.4f}")
final = {}
for aggregate in result.aggregates:
    final[aggregate.method] = (aggregate.mnap[-1], aggregate.ci95[-1])
for method, (value, ci) in final.items():
    print(f"  {method:>9} (converged): {value:.4f} +- {ci:.4f}")
print(
    "\nthe discrete scheme lands just under the exhaustive ceiling;"
    "\nthe random search drifts far below both."
)

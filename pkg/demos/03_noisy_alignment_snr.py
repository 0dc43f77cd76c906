"""Noise changes the game: more probes per update buy back accuracy.

With measurement noise, each element update estimates its optimal shift
from L probes at equally spaced offsets. This demo sweeps the per-element
SNR and the probe count, reproducing the converged mean normalized achieved
power plateaus, and shows the measurement-budget race against a uniform
random search.

Run:  python demos/03_noisy_alignment_snr.py   (about half a minute)
"""

import numpy as np

from risalign.harness import convergence_experiment, snr_sweep

TRIALS = 60  # keeps the demo under a minute; push higher for paper-grade runs

print("converged MNAP at N = 100 (mean over", TRIALS, "channels)")
result = snr_sweep(
    n_elements=100,
    probes_list=[3, 10],
    snr_db_list=[-10.0, 0.0, 10.0],
    trials=TRIALS,
    seed=1,
    sweeps=10,
    random_sweeps=30,
)
print(f"{'method':>8} {'L':>4} {'SNR dB':>7} {'MNAP':>8} {'ci95':>8}")
for row in result.rows:
    print(
        f"{row['method']:>8} {str(row['l']):>4} {row['snr_db']:>7} "
        f"{row['mnap']:8.3f} {row['ci95']:8.3f}"
    )

print("\nmeasurement-budget race at -10 dB, L = 3 (shared grid, LVCF):")
curves = convergence_experiment(
    methods=["dft", "random"],
    n_elements=100,
    probes=3,
    sweeps=10,
    snr_db_list=[-10.0],
    trials=TRIALS,
    seed=2,
    random_sweeps=30,
)
for aggregate in curves.aggregates:
    marks = [np.searchsorted(aggregate.grid, m) for m in (100, 300, 1000, 3000)]
    line = ", ".join(
        f"@{aggregate.grid[i]}: {aggregate.mnap[i]:.3f}" for i in marks
    )
    print(f"  {aggregate.method:>7}: {line}")
print(
    "\nthe probe-based update converges within one sweep (300 measurements);"
    "\nthe random search is still far below it after ten times the budget."
)

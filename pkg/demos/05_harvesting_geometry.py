"""From aligned phases to harvested DC power in a concrete room geometry.

A square surface of half-wavelength-pitched elements sits on the xy-plane;
a 1 W transmitter and a harvesting device sit a few meters away. Two-hop
near-field gains (exact per-element distances, spherical spreading) feed
the alignment algorithms, and the sigmoidal rectifier model converts the
received RF power into DC. Bigger surfaces harvest more, with diminishing
returns, and the measurement-driven alignment tracks the full-CSI genie.

Run:  python demos/05_harvesting_geometry.py   (about a minute)
"""

import numpy as np

from risalign.harness import harvest_experiment
from risalign.scenario import (
    GeometryScenario,
    HarvesterModel,
    conversion_efficiency,
    near_field_gains,
)

# the rectifier: sigmoidal efficiency with 0.1 W output saturation
model = HarvesterModel()
print("rectifier conversion efficiency eta(x):")
for watts in (0.001, 0.01, 0.07, 0.3, 1.0):
    print(f"  x = {watts:5.3f} W -> eta = {conversion_efficiency(watts, model):.4f}")

# the scene, at a glance
scene = GeometryScenario(
    wavelength=0.125, rows=16, cols=16,
    tx_position=np.array([0.0, -3.0, 4.0]),
    rx_position=np.array([0.0, 1.0, 2.0]),
)
h, g = near_field_gains(scene)
print(
    f"\n16x16 surface: per-element |h| in [{np.abs(h).min():.2e}, "
    f"{np.abs(h).max():.2e}], |g| in [{np.abs(g).min():.2e}, {np.abs(g).max():.2e}]"
)

print("\nmean harvested power vs surface size (30 noise realizations):")
result = harvest_experiment(
    element_counts=[16, 64, 256, 1024],
    snr_db_list=[-10.0],
    trials=30,
    seed=21,
)
print(f"{'method':>8} {'N':>6} {'harvested W':>14} {'dBm':>9} {'NAP':>7}")
for row in result.rows:
    extra = dict(item.split("=") for item in row["extra"].split(";"))
    print(
        f"{row['method']:>8} {row['n']:>6} {row['mnap']:14.3e} "
        f"{float(extra['harvested_dbm']):9.2f} {float(extra['mean_nap']):7.3f}"
    )
print(
    "\nthe genie (full CSI) bounds the probe-driven scheme, which in turn"
    "\nbeats the random search; growth slows as the surface outgrows the"
    "\ndistance to the harvester."
)

"""
Valuing fitness curves
======================

Curves for different creator mixes cross, so no single time slice ranks
them.  Time to threshold and present innovation value each reduce a curve to
one number; here for a handful of settings, 10 runs each.
"""

import numpy as np

from evoc.analysis import npv, piv, rate_from_interest, time_to_threshold
from evoc.world import WorldConfig, run_simulation

settings = [(1.0, 1.0), (0.4, 1.0), (1.0, 0.2), (0.1, 0.5), (0.7, 0.6)]
runs = 10

curves = {}
for c, p in settings:
    curves[(c, p)] = np.stack(
        [run_simulation(WorldConfig(c=c, p=p, seed=100 + k)).mean_fitness for k in range(runs)]
    )

baseline = curves[(1.0, 1.0)].mean(axis=0)
r = rate_from_interest(5.0)

print(f"{'C':>5} {'p':>5} {'mean TTT':>9} {'PIV':>8} {'NPV(5%)':>9}")
for (c, p), m in curves.items():
    ttt = np.mean([time_to_threshold(row, 9.0).effective for row in m])
    avg = m.mean(axis=0)
    print(f"{c:5.2f} {p:5.2f} {ttt:9.2f} {piv(avg, baseline):8.3f} {npv(avg, r):9.2f}")

"""
A typical run
=============

One society of 1024 agents, 40% creators who always invent.  Mean fitness
climbs from immobility to a ceiling; the number of distinct actions in use
rises while new ideas spread and falls again as agents settle on the best.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from evoc.analysis import time_to_threshold
from evoc.world import WorldConfig, run_simulation

cfg = WorldConfig(c=0.4, p=1.0, seed=7)
series = run_simulation(cfg)
t = np.arange(1, cfg.iterations + 1)

tt = time_to_threshold(series.mean_fitness, cfg.tau)
print(f"mean fitness reaches {cfg.tau} after {tt.value} iterations")
print(f"final mean fitness {series.mean_fitness[-1]:.3f}")
print(f"diversity peaks at {series.diversity.max()} actions (iteration {series.diversity.argmax() + 1})")

fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
ax1.plot(t, series.mean_fitness)
ax1.axhline(cfg.tau, ls=":", c="k")
ax1.set_ylabel("mean fitness")
ax2.plot(t, series.diversity)
ax2.set_ylabel("distinct actions")
ax2.set_xlabel("iteration")
fig.tight_layout()
fig.savefig("typical_run.png", dpi=100)

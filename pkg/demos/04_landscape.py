"""
The creativity landscape
========================

A coarse sweep over the fraction of creators C and their inventiveness p,
with the time-to-threshold landscape and its ridge of optima.  The full
desk-scale grid (0.05 steps, 20 runs per cell) is ``evoc sweep --desk``;
this uses a 0.1 grid and 5 runs per cell so it finishes in a few minutes.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from evoc.analysis import DiscountParams, build_landscape, global_optimum, landscape_grid, optima_ridge
from evoc.sweep import GridSpec, run_sweep

axis = tuple(k / 10 for k in range(1, 11))
spec = GridSpec(c_values=axis, p_values=axis, runs_per_cell=5, master_seed=2012)
result = run_sweep(spec)
landscape = build_landscape(result.series_by_cell(), DiscountParams(tau=9.0))

cs, ps, z = landscape_grid(landscape, "log10_ttt")
print("global TTT optimum (C, p):", global_optimum(landscape, "ttt"))
print("global PIV optimum (C, p):", global_optimum(landscape, "piv"))
ridge = optima_ridge(landscape, axis="p")
for p, c in ridge:
    print(f"p = {p:.1f}: best C = {c:.1f}")

fig, ax = plt.subplots(figsize=(5, 4))
cf = ax.contourf(ps, cs, z, levels=20)
ax.plot([p for p, _ in ridge], [c for _, c in ridge], "w.-")
ax.set_xlabel("p")
ax.set_ylabel("C")
fig.colorbar(cf, label="log10 mean TTT")
fig.tight_layout()
fig.savefig("landscape.png", dpi=100)

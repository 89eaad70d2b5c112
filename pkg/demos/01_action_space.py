"""
The action space and its fitness
================================

Every idea in the society is one of 729 actions: six body parts, each
neutral or in one of two active positions.  This script scores all of them
under both readings of the fitness rule and lists the best actions.
"""

import collections

import numpy as np

from evoc.actions import FitnessVariant, N_ACTIONS, decode_action, fitness_table

# %%
# Score distribution under the default scoring (a still head earns 2 points)
table = fitness_table(FitnessVariant.HEAD_STATIONARY_REWARD)
counts = collections.Counter(table.tolist())
for score in sorted(counts):
    print(f"fitness {score:5.1f}: {counts[score]:3d} actions")

# %%
# The top of the landscape: arms together, legs together, hips moving, head still
best = np.flatnonzero(table == table.max())
print(f"\n{len(best)} actions reach {table.max()}:")
for k in best:
    print(" ", decode_action(k))

# %%
# The formula taken literally rewards a moving head instead and tops out at 11
verbatim = fitness_table(FitnessVariant.VERBATIM)
print(f"\nverbatim: max {verbatim.max()}, immobility scores {verbatim[0]}")
print(f"{N_ACTIONS} actions in total")

"""Seed derivation and counter-based random streams.

Every random draw in a run comes from a Philox stream whose 128-bit key is
``seed + (stream_index << 64)``: stream 0 assigns roles, stream ``t`` drives
iteration ``t``.  Within an iteration the draws are fixed-shape arrays with
one row per agent (see :func:`evoc.world.draw_step`), so an agent's random
numbers depend only on ``(seed, t, agent id)`` and never on update order.

Sweep seeds come from :func:`derive_seed`, a bijective 64-bit mix of the
master seed and the packed ``(cell, run)`` counter.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MAX_INDEX = 1 << 32


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, cell_index: int, run_index: int) -> int:
    """Seed for run ``run_index`` of grid cell ``cell_index``.

    ``splitmix64(master + (cell * 2**32 + run) * GOLDEN_GAMMA mod 2**64)``.
    Each step is a bijection mod 2**64, so distinct ``(cell, run)`` pairs
    below 2**32 always get distinct seeds.
    """
    if not (0 <= cell_index < MAX_INDEX and 0 <= run_index < MAX_INDEX):
        raise ValueError("cell and run indices must be in [0, 2**32)")
    counter = (cell_index << 32) | run_index
    return splitmix64(int(master_seed) + counter * GOLDEN_GAMMA)


def stream(seed: int, index: int) -> np.random.Generator:
    if not 0 <= int(seed) <= MASK64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    if index < 0:
        raise ValueError("stream index must be non-negative")
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(index) << 64)))

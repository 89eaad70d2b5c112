"""Action space: six body parts, three positions each, and the fitness function.

Actions are stored as integers in ``[0, 728]`` using a base-3 code over the
parts in :data:`PART_ORDER`, most significant digit first.  Lookup tables over
the whole action space (positions, movement, symmetry, fitness) are built once
at import and shared by the scalar agent code and the vectorized world.
"""

from __future__ import annotations

import enum
from typing import Iterable, Sequence

import numpy as np

N_PARTS = 6
N_POSITIONS = 3
N_ACTIONS = N_POSITIONS**N_PARTS  # 729


class Position(enum.IntEnum):
    NEUTRAL = 0
    ACTIVE_UP = 1
    ACTIVE_DOWN = 2


class BodyPart(enum.IntEnum):
    LEFT_ARM = 0
    RIGHT_ARM = 1
    LEFT_LEG = 2
    RIGHT_LEG = 3
    HEAD = 4
    HIPS = 5


PART_ORDER: tuple[BodyPart, ...] = tuple(BodyPart)

SYMMETRIC_PAIRS = (
    (BodyPart.LEFT_ARM, BodyPart.RIGHT_ARM),
    (BodyPart.LEFT_LEG, BodyPart.RIGHT_LEG),
)

# counterpart[k] is the symmetric partner of part k, or -1 (head, hips)
COUNTERPART = np.array([1, 0, 3, 2, -1, -1], dtype=np.int64)


class FitnessVariant(str, enum.Enum):
    """How the head term of the fitness function is scored.

    ``HEAD_STATIONARY_REWARD`` adds ``2 * m_h`` (a still head earns 2 points,
    fitness range 0..10 with the maximum at a still head).  ``VERBATIM`` adds
    ``2 * (1 - m_h)`` exactly as the formula is usually printed, which makes a
    moving head worth 2 and tops out at 11.
    """

    VERBATIM = "verbatim"
    HEAD_STATIONARY_REWARD = "head-stationary-reward"


DEFAULT_VARIANT = FitnessVariant.HEAD_STATIONARY_REWARD

_WEIGHTS = N_POSITIONS ** np.arange(N_PARTS - 1, -1, -1)


class Action(tuple):
    """Immutable six-tuple of :class:`Position`, one per :class:`BodyPart`."""

    __slots__ = ()

    def __new__(cls, positions: Iterable[int] = (0,) * N_PARTS):
        positions = tuple(Position(int(x)) for x in positions)
        if len(positions) != N_PARTS:
            raise ValueError(f"an action has {N_PARTS} positions, got {len(positions)}")
        return super().__new__(cls, positions)

    @classmethod
    def neutral(cls) -> "Action":
        return cls((Position.NEUTRAL,) * N_PARTS)

    @classmethod
    def from_parts(cls, **parts: Position) -> "Action":
        """Build an action by part name, e.g. ``Action.from_parts(hips=Position.ACTIVE_UP)``.

        Parts not named stay neutral.
        """
        pos = [Position.NEUTRAL] * N_PARTS
        for name, value in parts.items():
            pos[BodyPart[name.upper()]] = Position(value)
        return cls(pos)

    def __getitem__(self, key):
        return super().__getitem__(int(key) if isinstance(key, BodyPart) else key)

    def replace(self, part: BodyPart, position: Position) -> "Action":
        pos = list(self)
        pos[part] = position
        return Action(pos)

    def __repr__(self) -> str:
        inner = ", ".join(f"{p.name.lower()}={v.name}" for p, v in zip(PART_ORDER, self))
        return f"Action({inner})"


def encode_action(action: Sequence[int]) -> int:
    if len(action) != N_PARTS:
        raise ValueError(f"an action has {N_PARTS} positions, got {len(action)}")
    code = 0
    for x in action:
        x = int(x)
        if not 0 <= x < N_POSITIONS:
            raise ValueError(f"position {x} out of range")
        code = code * N_POSITIONS + x
    return code


def decode_action(index: int) -> Action:
    index = int(index)
    if not 0 <= index < N_ACTIONS:
        raise ValueError(f"action index must be in [0, {N_ACTIONS - 1}], got {index}")
    digits = []
    for _ in range(N_PARTS):
        index, d = divmod(index, N_POSITIONS)
        digits.append(d)
    return Action(reversed(digits))


def movement_count(action: Sequence[int]) -> int:
    """Number of parts (head included) not in the neutral position."""
    return sum(1 for x in action if x != Position.NEUTRAL)


def symmetry_count(action: Sequence[int]) -> int:
    """``s_a + s_t``: symmetric pairs sharing the same active position."""
    return sum(
        1
        for a, b in SYMMETRIC_PAIRS
        if action[a] != Position.NEUTRAL and action[a] == action[b]
    )


def fitness(action: Sequence[int], variant: FitnessVariant = DEFAULT_VARIANT) -> float:
    variant = FitnessVariant(variant)
    m = movement_count(action)
    s = symmetry_count(action)
    head_still = 1 if action[BodyPart.HEAD] == Position.NEUTRAL else 0
    if variant is FitnessVariant.VERBATIM:
        head_term = 2 * (1 - head_still)
    else:
        head_term = 2 * head_still
    return float(m + 1.5 * s + head_term)


def _build_tables():
    codes = np.arange(N_ACTIONS)
    positions = (codes[:, None] // _WEIGHTS[None, :]) % N_POSITIONS
    active = positions != Position.NEUTRAL
    movement = active.sum(axis=1)
    symmetry = np.zeros(N_ACTIONS, dtype=np.int64)
    for a, b in SYMMETRIC_PAIRS:
        symmetry += active[:, a] & (positions[:, a] == positions[:, b])
    head_still = (~active[:, BodyPart.HEAD]).astype(np.int64)
    base = movement + 1.5 * symmetry
    fit = {
        FitnessVariant.VERBATIM: base + 2.0 * (1 - head_still),
        FitnessVariant.HEAD_STATIONARY_REWARD: base + 2.0 * head_still,
    }
    for arr in (positions, movement, symmetry, *fit.values()):
        arr.setflags(write=False)
    return positions.astype(np.int8), movement, symmetry, fit


POSITIONS, MOVEMENT, SYMMETRY, _FITNESS = _build_tables()
POSITIONS.setflags(write=False)


def fitness_table(variant: FitnessVariant = DEFAULT_VARIANT) -> np.ndarray:
    """Read-only array of fitness values indexed by action code."""
    return _FITNESS[FitnessVariant(variant)]


def encode_positions(positions: np.ndarray) -> np.ndarray:
    """Vectorized :func:`encode_action` over the last axis."""
    return positions.astype(np.int64) @ _WEIGHTS

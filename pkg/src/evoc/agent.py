"""Single-agent behaviour: inventing, evaluating, adopting, and learning.

These functions work on one :class:`Agent` at a time and are the readable
reference for what the vectorized lattice update in :mod:`evoc.world` does in
bulk.  The learned invention biases stand in for the SYMMETRY and MOVEMENT
hidden nodes of the original neural network: an agent that keeps finding that
more movement (or more symmetry) pays off becomes more likely to propose it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .actions import (
    COUNTERPART,
    DEFAULT_VARIANT,
    N_PARTS,
    Action,
    FitnessVariant,
    Position,
    fitness,
    movement_count,
    symmetry_count,
)

CHANGE_PROBABILITY = 1.0 / 6.0
DEFAULT_BIAS = 0.5
DEFAULT_BIAS_DELTA = 0.1


class Role(str, enum.Enum):
    CREATOR = "creator"
    IMITATOR = "imitator"


@dataclass
class BiasState:
    """Probabilities steering invention; both stay inside [0, 1]."""

    move: float = DEFAULT_BIAS
    sym: float = DEFAULT_BIAS

    def __post_init__(self):
        self.move = _clamp(self.move)
        self.sym = _clamp(self.sym)


@dataclass
class Agent:
    id: int
    role: Role
    current: Action = field(default_factory=Action.neutral)
    variant: FitnessVariant = DEFAULT_VARIANT
    bias: BiasState = field(default_factory=BiasState)
    current_fitness: float = field(init=False)

    def __post_init__(self):
        self.current = Action(self.current)
        self.current_fitness = fitness(self.current, self.variant)


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def update_bias(
    agent: Agent,
    evaluated: Action,
    reference: Action,
    evaluated_is_fitter: bool,
    delta: float = DEFAULT_BIAS_DELTA,
) -> None:
    """Nudge the biases toward whatever distinguished the fitter action.

    The move bias shifts by ``delta * sign(dm)`` where ``dm`` is the change in
    active-part count from ``reference`` to ``evaluated`` (likewise the sym
    bias with the symmetric-pair count).  The shift is reversed when the
    evaluated action was not fitter.
    """
    dm = _sign(movement_count(evaluated) - movement_count(reference))
    ds = _sign(symmetry_count(evaluated) - symmetry_count(reference))
    direction = 1 if evaluated_is_fitter else -1
    agent.bias.move = _clamp(agent.bias.move + direction * delta * dm)
    agent.bias.sym = _clamp(agent.bias.sym + direction * delta * ds)


def propose_positions(
    current: Action,
    bias: BiasState,
    change_u: np.ndarray,
    move_u: np.ndarray,
    sym_u: np.ndarray,
    side_u: np.ndarray,
    change_prob: float = CHANGE_PROBABILITY,
) -> Action:
    """Invention step driven by explicit uniforms, one of each per body part.

    Kept separate from :func:`invent` so that a caller holding a pre-drawn
    block of uniforms (the lattice update does) can reproduce an agent's
    invention exactly.
    """
    new = list(current)
    for k in range(N_PARTS):
        if not change_u[k] < change_prob:
            continue
        cur = current[k]
        if cur == Position.NEUTRAL:
            # must move; pick a direction
            partner = COUNTERPART[k]
            if partner >= 0 and current[partner] != Position.NEUTRAL and sym_u[k] < bias.sym:
                new[k] = current[partner]
            else:
                new[k] = Position.ACTIVE_UP if side_u[k] < 0.5 else Position.ACTIVE_DOWN
        elif move_u[k] < bias.move:
            new[k] = Position(3 - cur)  # the other active position
        else:
            new[k] = Position.NEUTRAL
    return Action(new)


def invent(
    agent: Agent,
    rng: np.random.Generator,
    change_prob: float = CHANGE_PROBABILITY,
) -> Action:
    """Propose a modified copy of ``agent.current``; the agent is not touched.

    Each part changes with probability ``change_prob`` and, when it changes,
    always lands on a different position.
    """
    if agent.role is not Role.CREATOR:
        raise ValueError("only creators invent")
    u = rng.random((4, N_PARTS))
    return propose_positions(agent.current, agent.bias, *u, change_prob=change_prob)


def evaluate_and_adopt(
    agent: Agent,
    candidate: Action,
    variant: FitnessVariant | None = None,
    delta: float = DEFAULT_BIAS_DELTA,
) -> bool:
    variant = agent.variant if variant is None else FitnessVariant(variant)
    candidate = Action(candidate)
    cand_fitness = fitness(candidate, variant)
    fitter = cand_fitness > agent.current_fitness
    update_bias(agent, candidate, agent.current, fitter, delta)
    if fitter:
        agent.current = candidate
        agent.current_fitness = cand_fitness
    return fitter

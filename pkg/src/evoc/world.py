"""The artificial society: a toroidal lattice of creators and imitators.

World state is kept as flat numpy arrays indexed by lattice position
(``row * width + col``) so that one iteration is a handful of array
operations.  Updates are synchronous: every agent decides against the
snapshot of the lattice taken at the start of the iteration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import rng as _rng
from .actions import (
    COUNTERPART,
    DEFAULT_VARIANT,
    MOVEMENT,
    N_ACTIONS,
    N_PARTS,
    POSITIONS,
    SYMMETRY,
    Action,
    FitnessVariant,
    decode_action,
    encode_positions,
    fitness_table,
)
from .agent import (
    CHANGE_PROBABILITY,
    DEFAULT_BIAS,
    DEFAULT_BIAS_DELTA,
    Agent,
    BiasState,
    Role,
    update_bias,
)


@dataclass(frozen=True)
class WorldConfig:
    c: float = 1.0
    p: float = 1.0
    seed: int = 0
    n_agents: int = 1024
    width: int = 32
    height: int = 32
    iterations: int = 100
    variant: FitnessVariant = DEFAULT_VARIANT
    tau: float = 9.0
    bias_delta: float = DEFAULT_BIAS_DELTA
    change_prob: float = CHANGE_PROBABILITY
    learn_from_imitation: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", FitnessVariant(self.variant))
        if self.width * self.height != self.n_agents:
            raise ValueError(
                f"lattice {self.width}x{self.height} does not hold {self.n_agents} agents"
            )
        if self.width < 3 or self.height < 3:
            # smaller tori give agents duplicate neighbours
            raise ValueError("lattice sides must be at least 3")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c must be in [0, 1], got {self.c}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= int(self.seed) <= _rng.MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.bias_delta < 0:
            raise ValueError("bias_delta must be non-negative")
        if not 0.0 <= self.change_prob <= 1.0:
            raise ValueError("change_prob must be in [0, 1]")

    @property
    def n_creators(self) -> int:
        # round half up
        return int(math.floor(self.c * self.n_agents + 0.5))

    def with_(self, **changes) -> "WorldConfig":
        return replace(self, **changes)


def von_neumann_neighbors(width: int, height: int) -> np.ndarray:
    """(n, 4) indices of the up, down, left, right neighbours on a torus."""
    idx = np.arange(width * height).reshape(height, width)
    return np.stack(
        [
            np.roll(idx, 1, axis=0).ravel(),
            np.roll(idx, -1, axis=0).ravel(),
            np.roll(idx, 1, axis=1).ravel(),
            np.roll(idx, -1, axis=1).ravel(),
        ],
        axis=1,
    )


@dataclass
class World:
    config: WorldConfig
    codes: np.ndarray  # implemented action per agent
    fitness: np.ndarray
    is_creator: np.ndarray
    bias_move: np.ndarray
    bias_sym: np.ndarray
    neighbors: np.ndarray
    t: int = 0

    @property
    def n_agents(self) -> int:
        return self.codes.shape[0]

    def agent(self, i: int) -> Agent:
        """A detached :class:`Agent` copy of lattice position ``i``."""
        a = Agent(
            id=int(i),
            role=Role.CREATOR if self.is_creator[i] else Role.IMITATOR,
            current=decode_action(self.codes[i]),
            variant=self.config.variant,
            bias=BiasState(float(self.bias_move[i]), float(self.bias_sym[i])),
        )
        return a

    @property
    def agents(self) -> list[Agent]:
        return [self.agent(i) for i in range(self.n_agents)]

    def mean_fitness(self) -> float:
        return float(self.fitness.mean())

    def diversity(self) -> int:
        return int(np.count_nonzero(np.bincount(self.codes, minlength=N_ACTIONS)))


def init_world(config: WorldConfig) -> World:
    n = config.n_agents
    creators = np.zeros(n, dtype=bool)
    g = _rng.stream(config.seed, 0)
    creators[g.permutation(n)[: config.n_creators]] = True
    codes = np.zeros(n, dtype=np.int64)
    return World(
        config=config,
        codes=codes,
        fitness=fitness_table(config.variant)[codes].copy(),
        is_creator=creators,
        bias_move=np.full(n, DEFAULT_BIAS),
        bias_sym=np.full(n, DEFAULT_BIAS),
        neighbors=von_neumann_neighbors(config.width, config.height),
    )


# all 24 orders in which four neighbours can be scanned
SCAN_ORDERS = np.array(list(itertools.permutations(range(4))), dtype=np.int64)


@dataclass(frozen=True)
class StepDraws:
    """All uniforms one iteration consumes; row ``i`` belongs to agent ``i``.

    Drawn in field order from ``rng.stream(seed, t)``.  ``order`` is the
    neighbour scan order: row ``SCAN_ORDERS[k]`` for an integer ``k`` drawn
    uniformly from ``[0, 24)``.
    """

    invent: np.ndarray  # (n,)    invent-vs-imitate coin for creators
    change: np.ndarray  # (n, 6)  does part k change
    move: np.ndarray  # (n, 6)    active -> other active (else neutral)
    sym: np.ndarray  # (n, 6)     copy the symmetric partner's position
    side: np.ndarray  # (n, 6)    up vs down when leaving neutral
    order: np.ndarray  # (n, 4)


def draw_step(seed: int, t: int, n: int) -> StepDraws:
    g = _rng.stream(seed, t)
    invent = g.random(n)
    change = g.random((n, N_PARTS))
    move = g.random((n, N_PARTS))
    sym = g.random((n, N_PARTS))
    side = g.random((n, N_PARTS))
    order = SCAN_ORDERS[g.integers(0, len(SCAN_ORDERS), n)]
    return StepDraws(invent, change, move, sym, side, order)


_PARTNER_COLS = np.maximum(COUNTERPART, 0)
_HAS_PARTNER = COUNTERPART >= 0


def _propose(codes, bias_move, bias_sym, d: StepDraws, change_prob: float) -> np.ndarray:
    cur = POSITIONS[codes].astype(np.int64)
    partner = np.where(_HAS_PARTNER, cur[:, _PARTNER_COLS], 0)
    use_sym = (partner != 0) & (d.sym < bias_sym[:, None])
    from_neutral = np.where(use_sym, partner, np.where(d.side < 0.5, 1, 2))
    from_active = np.where(d.move < bias_move[:, None], 3 - cur, 0)
    new = np.where(cur == 0, from_neutral, from_active)
    return encode_positions(np.where(d.change < change_prob, new, cur))


def step(world: World, draws: StepDraws | None = None) -> None:
    """Advance the world by one synchronous iteration."""
    cfg = world.config
    t = world.t + 1
    n = world.n_agents
    d = draw_step(cfg.seed, t, n) if draws is None else draws
    table = fitness_table(cfg.variant)
    codes, fit = world.codes, world.fitness
    rows = np.arange(n)

    inventing = world.is_creator & (d.invent < cfg.p)
    imitating = ~inventing

    # invention + evaluation; biases learn from every evaluation
    cand = _propose(codes, world.bias_move, world.bias_sym, d, cfg.change_prob)
    cand_fit = table[cand]
    better = cand_fit > fit
    direction = np.where(better, 1, -1)
    dm = np.sign(MOVEMENT[cand] - MOVEMENT[codes])
    ds = np.sign(SYMMETRY[cand] - SYMMETRY[codes])
    delta = cfg.bias_delta
    new_move = np.where(
        inventing, np.clip(world.bias_move + direction * delta * dm, 0.0, 1.0), world.bias_move
    )
    new_sym = np.where(
        inventing, np.clip(world.bias_sym + direction * delta * ds, 0.0, 1.0), world.bias_sym
    )
    inv_adopt = inventing & better

    # imitation: first fitter neighbour in a random scan
    scan = world.neighbors[rows[:, None], d.order]
    fitter = fit[scan] > fit[:, None]
    found = fitter.any(axis=1)
    chosen = scan[rows, fitter.argmax(axis=1)]
    imi_adopt = imitating & found
    seen = codes[chosen]
    if cfg.learn_from_imitation:
        dm = np.sign(MOVEMENT[seen] - MOVEMENT[codes])
        ds = np.sign(SYMMETRY[seen] - SYMMETRY[codes])
        new_move = np.where(imi_adopt, np.clip(new_move + delta * dm, 0.0, 1.0), new_move)
        new_sym = np.where(imi_adopt, np.clip(new_sym + delta * ds, 0.0, 1.0), new_sym)

    new_codes = np.where(inv_adopt, cand, np.where(imi_adopt, seen, codes))
    world.codes = new_codes
    world.fitness = table[new_codes]
    world.bias_move = new_move
    world.bias_sym = new_sym
    world.t = t


def imitate(
    agent: Agent,
    neighbor_actions: Sequence[tuple[Action, float]],
    rng: np.random.Generator,
    delta: float = DEFAULT_BIAS_DELTA,
) -> bool:
    """Lazy imitation: adopt the first strictly fitter neighbour in a random scan.

    ``neighbor_actions`` holds ``(action, fitness)`` pairs as observed at the
    start of the iteration.
    """
    order = rng.permutation(len(neighbor_actions))
    return imitate_in_order(agent, neighbor_actions, order, delta)


def imitate_in_order(agent, neighbor_actions, order, delta=DEFAULT_BIAS_DELTA) -> bool:
    for j in order:
        action, fit = neighbor_actions[j]
        if fit > agent.current_fitness:
            update_bias(agent, action, agent.current, True, delta)
            agent.current = Action(action)
            agent.current_fitness = float(fit)
            return True
    return False


@dataclass
class RunSeries:
    """Per-iteration record of one run; index ``k`` holds iteration ``k + 1``."""

    mean_fitness: np.ndarray
    diversity: np.ndarray
    initial_mean_fitness: float
    initial_diversity: int = 1
    agent_fitness: np.ndarray | None = field(default=None, repr=False)

    @property
    def iterations(self) -> int:
        return len(self.mean_fitness)


def run_simulation(config: WorldConfig, record_agent_fitness: bool = False) -> RunSeries:
    world = init_world(config)
    n_it = config.iterations
    mean = np.empty(n_it)
    div = np.empty(n_it, dtype=np.int64)
    trace = np.empty((n_it + 1, config.n_agents)) if record_agent_fitness else None
    if trace is not None:
        trace[0] = world.fitness
    init_mean, init_div = world.mean_fitness(), world.diversity()
    for k in range(n_it):
        step(world)
        mean[k] = world.mean_fitness()
        div[k] = world.diversity()
        if trace is not None:
            trace[k + 1] = world.fitness
    return RunSeries(mean, div, init_mean, init_div, trace)

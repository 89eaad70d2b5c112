"""Multi-run experiments over a grid of (C, p) settings.

Work is split by cell and results are collected in cell order, so the output
depends only on the :class:`GridSpec`, never on how many worker processes ran
it.  Run ``k`` of cell ``i`` is seeded with ``derive_seed(master_seed, i, k)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterator

import numpy as np

from . import __version__
from .rng import derive_seed
from .world import WorldConfig, run_simulation

WORKERS_ENV = "EVOC_WORKERS"


def default_axis() -> tuple[float, ...]:
    """0.05, 0.10, ..., 1.00."""
    return tuple(k / 20 for k in range(1, 21))


@dataclass(frozen=True)
class GridSpec:
    c_values: tuple[float, ...] = field(default_factory=default_axis)
    p_values: tuple[float, ...] = field(default_factory=default_axis)
    runs_per_cell: int = 100
    base_config: WorldConfig = field(default_factory=WorldConfig)
    master_seed: int = 0
    allow_degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        if self.runs_per_cell < 1:
            raise ValueError("runs_per_cell must be positive")
        lo = 0.0 if self.allow_degenerate else math.ulp(0.0)
        for c in self.c_values:
            if not lo <= c <= 1.0:
                raise ValueError(f"C value {c} outside (0, 1] (C = 0 needs allow_degenerate)")
        for p in self.p_values:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p value {p} outside [0, 1]")
        if 1.0 not in self.c_values or 1.0 not in self.p_values:
            raise ValueError("the grid must include C = 1 and p = 1 (the PIV baseline cell)")
        if len(set(self.c_values)) != len(self.c_values) or len(set(self.p_values)) != len(
            self.p_values
        ):
            raise ValueError("grid values must be distinct")

    def cells(self) -> list[tuple[float, float]]:
        return [(c, p) for c in self.c_values for p in self.p_values]

    def config_for(self, cell_index: int, run_index: int) -> WorldConfig:
        c, p = self.cells()[cell_index]
        seed = derive_seed(self.master_seed, cell_index, run_index)
        return replace(self.base_config, c=c, p=p, seed=seed)


def desk_scale(**overrides) -> GridSpec:
    """The 20 x 20 grid with 20 runs per cell."""
    overrides.setdefault("runs_per_cell", 20)
    return GridSpec(**overrides)


@dataclass
class CellResult:
    c: float
    p: float
    seeds: np.ndarray  # (runs,)
    mean_fitness: np.ndarray  # (runs, iterations)
    diversity: np.ndarray  # (runs, iterations)

    @property
    def runs(self) -> int:
        return self.mean_fitness.shape[0]


@dataclass
class SweepResult:
    spec: GridSpec
    cells: dict[tuple[float, float], CellResult]

    def provenance(self) -> dict:
        return provenance(self.spec)

    def series_by_cell(self) -> dict[tuple[float, float], np.ndarray]:
        return {k: v.mean_fitness for k, v in self.cells.items()}


class SweepError(RuntimeError):
    pass


def provenance(spec: GridSpec) -> dict:
    base = asdict(spec.base_config)
    base["variant"] = spec.base_config.variant.value
    for k in ("c", "p", "seed"):
        base.pop(k)
    return {
        "code_version": f"evoc {__version__}",
        "master_seed": spec.master_seed,
        "c_values": list(spec.c_values),
        "p_values": list(spec.p_values),
        "runs_per_cell": spec.runs_per_cell,
        "allow_degenerate": spec.allow_degenerate,
        "base_config": base,
        "seed_scheme": "derive_seed(master_seed, cell_index, run_index); "
        "cell_index = i_c * len(p_values) + i_p",
    }


def run_cell(spec: GridSpec, cell_index: int) -> CellResult:
    c, p = spec.cells()[cell_index]
    try:
        configs = [spec.config_for(cell_index, k) for k in range(spec.runs_per_cell)]
        series = [run_simulation(cfg) for cfg in configs]
    except Exception as exc:
        raise SweepError(f"cell C={c}, p={p} failed: {exc}") from exc
    return CellResult(
        c=c,
        p=p,
        seeds=np.array([cfg.seed for cfg in configs], dtype=np.uint64),
        mean_fitness=np.stack([s.mean_fitness for s in series]),
        diversity=np.stack([s.diversity for s in series]),
    )


def _run_cell_task(args):
    return run_cell(*args)


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise ValueError("worker count must be at least 1")
    return workers


def iter_sweep(spec: GridSpec, workers: int | None = None) -> Iterator[CellResult]:
    """Yield cell results in grid order as they become available."""
    workers = resolve_workers(workers)
    tasks = [(spec, i) for i in range(len(spec.cells()))]
    if workers == 1:
        for t in tasks:
            yield _run_cell_task(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_run_cell_task, tasks)


def run_sweep(
    spec: GridSpec,
    workers: int | None = None,
    on_cell: Callable[[CellResult], None] | None = None,
    keep: bool = True,
) -> SweepResult:
    """Run every cell of ``spec``.

    ``on_cell`` sees each finished cell in grid order; with ``keep=False``
    cells are handed to it and then dropped, so memory does not grow with the
    grid.
    """
    cells = {}
    for cell in iter_sweep(spec, workers):
        if on_cell is not None:
            on_cell(cell)
        if keep:
            cells[(cell.c, cell.p)] = cell
    return SweepResult(spec, cells)

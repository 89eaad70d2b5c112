"""On-disk formats: series, sweep stores, landscapes and ridges.

All CSV files have fixed headers and print reals with 17 significant digits,
so reading a file back gives the exact values that were written.  Files are
written to a temporary name and renamed into place; a failure leaves no
partial output behind.

A sweep store is a directory holding ``series.csv``, ``seeds.csv`` and
``provenance.json``.
"""

from __future__ import annotations

import contextlib
import csv
import json
import os
import shutil
import tempfile
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import LandscapePoint
from .sweep import CellResult, GridSpec, SweepResult, provenance, run_sweep
from .world import RunSeries

SERIES_HEADER = ["C", "p", "run", "iteration", "mean_fitness", "diversity"]
SEEDS_HEADER = ["C", "p", "run", "seed"]
LANDSCAPE_HEADER = ["C", "p", "mean_ttt", "censored_runs", "log10_mean_ttt", "piv", "runs"]
RIDGE_HEADER = ["fixed_axis", "fixed_value", "opt_value", "valuation"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@contextlib.contextmanager
def atomic_path(path, suffix=""):
    """Yield a temporary path next to ``path``; move it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=suffix, dir=path.parent)
    os.close(fd)
    tmp = Path(tmp)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


@contextlib.contextmanager
def atomic_writer(path):
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            yield fh


def _series_rows(c, p, run, mean_fitness, diversity):
    for t, (f, d) in enumerate(zip(mean_fitness, diversity), start=1):
        yield [fmt(c), fmt(p), str(run), str(t), fmt(f), str(int(d))]


def write_run_series(path, series: RunSeries, c: float, p: float, run: int = 0) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        w.writerows(_series_rows(c, p, run, series.mean_fitness, series.diversity))


def read_series(path) -> dict[tuple[float, float], dict[str, np.ndarray]]:
    """Read a series CSV into ``{(C, p): {"mean_fitness": (runs, T), "diversity": (runs, T)}}``."""
    acc: dict = defaultdict(lambda: defaultdict(dict))
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != SERIES_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in r:
            c, p, run, t, f, d = row
            acc[(float(c), float(p))][int(run)][int(t)] = (float(f), int(d))
    out = {}
    for key, runs in acc.items():
        run_ids = sorted(runs)
        iters = sorted(runs[run_ids[0]])
        if any(sorted(runs[k]) != iters for k in run_ids):
            raise ValueError(f"{path}: runs of cell {key} have different lengths")
        out[key] = {
            "mean_fitness": np.array([[runs[k][t][0] for t in iters] for k in run_ids]),
            "diversity": np.array([[runs[k][t][1] for t in iters] for k in run_ids], dtype=np.int64),
        }
    return out


class StoreWriter:
    """Stream sweep cells into a store directory, one cell at a time."""

    def __init__(self, directory, spec: GridSpec):
        self.directory = Path(directory)
        self.spec = spec
        self._stack = contextlib.ExitStack()

    def __enter__(self):
        self.directory.parent.mkdir(parents=True, exist_ok=True)
        self._tmp = Path(
            tempfile.mkdtemp(prefix=f".{self.directory.name}.", dir=self.directory.parent)
        )
        self._series = self._stack.enter_context(open(self._tmp / "series.csv", "w", newline=""))
        self._seeds = self._stack.enter_context(open(self._tmp / "seeds.csv", "w", newline=""))
        self._w_series = csv.writer(self._series, lineterminator="\n")
        self._w_seeds = csv.writer(self._seeds, lineterminator="\n")
        self._w_series.writerow(SERIES_HEADER)
        self._w_seeds.writerow(SEEDS_HEADER)
        return self

    def write_cell(self, cell: CellResult) -> None:
        for k in range(cell.runs):
            self._w_series.writerows(
                _series_rows(cell.c, cell.p, k, cell.mean_fitness[k], cell.diversity[k])
            )
            self._w_seeds.writerow([fmt(cell.c), fmt(cell.p), str(k), str(int(cell.seeds[k]))])

    def __exit__(self, exc_type, exc, tb):
        self._stack.close()
        if exc_type is not None:
            shutil.rmtree(self._tmp, ignore_errors=True)
            return False
        with open(self._tmp / "provenance.json", "w") as fh:
            json.dump(provenance(self.spec), fh, indent=2, sort_keys=True)
            fh.write("\n")
        if self.directory.exists():
            shutil.rmtree(self.directory)
        os.replace(self._tmp, self.directory)
        return False


def sweep_to_store(spec: GridSpec, directory, workers: int | None = None) -> None:
    """Run a sweep, streaming every cell to ``directory`` without keeping it in memory."""
    with StoreWriter(directory, spec) as sw:
        run_sweep(spec, workers=workers, on_cell=sw.write_cell, keep=False)


def write_store(result: SweepResult, directory) -> None:
    with StoreWriter(directory, result.spec) as sw:
        for cell in result.cells.values():
            sw.write_cell(cell)


def read_store(directory) -> SweepResult:
    from .world import WorldConfig

    directory = Path(directory)
    for name in ("series.csv", "seeds.csv", "provenance.json"):
        if not (directory / name).exists():
            raise FileNotFoundError(f"{directory} is not a sweep store (missing {name})")
    prov = json.loads((directory / "provenance.json").read_text())
    spec = GridSpec(
        c_values=tuple(prov["c_values"]),
        p_values=tuple(prov["p_values"]),
        runs_per_cell=prov["runs_per_cell"],
        base_config=WorldConfig(**prov["base_config"]),
        master_seed=prov["master_seed"],
        allow_degenerate=prov["allow_degenerate"],
    )
    series = read_series(directory / "series.csv")
    seeds: dict = defaultdict(dict)
    with open(directory / "seeds.csv", newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for c, p, run, seed in r:
            seeds[(float(c), float(p))][int(run)] = int(seed)
    cells = {}
    for key, s in series.items():
        cells[key] = CellResult(
            c=key[0],
            p=key[1],
            seeds=np.array([seeds[key][k] for k in sorted(seeds[key])], dtype=np.uint64),
            mean_fitness=s["mean_fitness"],
            diversity=s["diversity"],
        )
    return SweepResult(spec, cells)


def write_landscape(path, landscape: Sequence[LandscapePoint]) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LANDSCAPE_HEADER)
        for pt in landscape:
            w.writerow(
                [
                    fmt(pt.c),
                    fmt(pt.p),
                    fmt(pt.mean_ttt),
                    str(pt.censored_runs),
                    fmt(pt.log10_mean_ttt),
                    fmt(pt.piv),
                    str(pt.runs),
                ]
            )


def read_landscape(path) -> list[LandscapePoint]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != LANDSCAPE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            LandscapePoint(
                c=float(c),
                p=float(p),
                mean_ttt=float(m),
                censored_runs=int(cr),
                log10_mean_ttt=float(lg),
                piv=float(pv),
                runs=int(n),
            )
            for c, p, m, cr, lg, pv, n in r
        ]


def write_ridge(path, rows: Iterable[tuple[str, float, float, str]]) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RIDGE_HEADER)
        for axis, fixed, opt, valuation in rows:
            w.writerow([axis, fmt(fixed), fmt(opt), valuation])


def read_ridge(path) -> list[tuple[str, float, float, str]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != RIDGE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [(a, float(f), float(o), v) for a, f, o, v in r]


def csv_to_json(src, dst) -> None:
    """Convert any of the CSV formats above to a JSON list of row objects.

    Numbers keep full precision: ``json`` writes floats with ``repr``.
    """
    with open(src, newline="") as fh:
        r = csv.DictReader(fh)
        rows = []
        for row in r:
            out = {}
            for k, v in row.items():
                if k in ("fixed_axis", "valuation"):
                    out[k] = v
                elif k in ("run", "iteration", "diversity", "censored_runs", "runs", "seed"):
                    out[k] = int(v)
                else:
                    out[k] = float(v)
            rows.append(out)
    with atomic_writer(dst) as fh:
        json.dump(rows, fh, indent=1)
        fh.write("\n")

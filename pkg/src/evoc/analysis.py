"""Valuing fitness time series and assembling the {C, p} landscape.

Three valuations are provided: plain exponential discounting (:func:`npv`),
time to threshold (:func:`time_to_threshold`), and the present innovation
value (:func:`piv`), which scores a series by its pointwise ratio to the
all-creators, always-inventing baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

BASELINE_CELL = (1.0, 1.0)
BASELINE_EPS = 1e-9


@dataclass(frozen=True)
class DiscountParams:
    r: float = 1.0
    tau: float = 9.0
    periods: int = 100

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"discount rate must be in (0, 1], got {self.r}")


def rate_from_interest(i: float) -> float:
    """Discount rate for a per-period interest rate ``i`` given in percent."""
    return 100.0 / (100.0 + i)


def npv(series: Sequence[float], r: float) -> float:
    b = np.asarray(series, dtype=float)
    if b.size == 0:
        raise ValueError("series is empty")
    if not 0.0 < r <= 1.0:
        raise ValueError(f"discount rate must be in (0, 1], got {r}")
    if r == 1.0:
        return float(b.sum())
    return float(np.sum(r ** np.arange(b.size) * b))


@dataclass(frozen=True)
class TTTResult:
    """Iterations until the series first reaches the threshold.

    ``value`` is ``None`` when the threshold is never reached; ``bound`` is
    the series length either way.
    """

    value: int | None
    bound: int

    @property
    def censored(self) -> bool:
        return self.value is None

    @property
    def effective(self) -> int:
        """The value, or the bound for a censored run."""
        return self.bound if self.value is None else self.value


def time_to_threshold(series: Sequence[float], tau: float) -> TTTResult:
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise ValueError("series is empty")
    hits = np.flatnonzero(s >= tau)
    return TTTResult(int(hits[0]) + 1 if hits.size else None, int(s.size))


def piv(series: Sequence[float], baseline: Sequence[float]) -> float:
    s = np.asarray(series, dtype=float)
    b = np.asarray(baseline, dtype=float)
    if s.shape != b.shape or s.ndim != 1:
        raise ValueError(f"series and baseline lengths differ: {s.shape} vs {b.shape}")
    if np.any(b <= BASELINE_EPS):
        raise ValueError("baseline has values at or below zero; PIV is undefined")
    return float(-s.size + np.sum(s / b))


@dataclass(frozen=True)
class LandscapePoint:
    c: float
    p: float
    mean_ttt: float
    censored_runs: int
    log10_mean_ttt: float
    piv: float
    runs: int

    @property
    def fully_censored(self) -> bool:
        return self.censored_runs == self.runs


def _as_matrix(runs) -> np.ndarray:
    """Stack a cell's runs into a (runs, iterations) array of mean fitness."""
    if isinstance(runs, np.ndarray):
        m = runs
    else:
        m = np.stack([getattr(r, "mean_fitness", r) for r in runs])
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] == 0:
        raise ValueError("a cell needs at least one run series")
    return m


def _find_baseline(cells):
    for key in cells:
        if math.isclose(key[0], 1.0) and math.isclose(key[1], 1.0):
            return key
    raise KeyError(
        "landscape needs the {C=1, p=1} cell: it is the PIV baseline"
    )


def build_landscape(
    cells: Mapping[tuple[float, float], object],
    params: DiscountParams = DiscountParams(),
    baseline: Sequence[float] | None = None,
    piv_per_run: bool = False,
) -> list[LandscapePoint]:
    """One :class:`LandscapePoint` per ``(C, p)`` key of ``cells``.

    Each value in ``cells`` is a sequence of run series (``RunSeries`` or
    plain arrays) or a ``(runs, iterations)`` array.  TTT is found per run and
    averaged, censored runs counting at the run length.  PIV compares the
    run-averaged series with the run-averaged baseline, or with
    ``piv_per_run`` averages per-run PIV values instead.
    """
    if baseline is None:
        base = _as_matrix(cells[_find_baseline(cells)]).mean(axis=0)
    else:
        base = np.asarray(baseline, dtype=float)
    out = []
    for (c, p), runs in cells.items():
        m = _as_matrix(runs)
        tt = [time_to_threshold(row, params.tau) for row in m]
        mean_ttt = float(np.mean([x.effective for x in tt]))
        if piv_per_run:
            value = float(np.mean([piv(row, base) for row in m]))
        else:
            value = piv(m.mean(axis=0), base)
        out.append(
            LandscapePoint(
                c=float(c),
                p=float(p),
                mean_ttt=mean_ttt,
                censored_runs=sum(x.censored for x in tt),
                log10_mean_ttt=math.log10(mean_ttt),
                piv=value,
                runs=m.shape[0],
            )
        )
    return out


def landscape_grid(landscape: Sequence[LandscapePoint], valuation: str = "ttt"):
    """Arrange a landscape as ``(c_values, p_values, Z)`` with ``Z[i, j]`` at ``(c_i, p_j)``.

    ``valuation`` is ``"ttt"`` (mean TTT), ``"log10_ttt"`` or ``"piv"``.
    Raises if the points do not form a full rectangular grid.
    """
    attr = {"ttt": "mean_ttt", "log10_ttt": "log10_mean_ttt", "piv": "piv"}[valuation]
    cs = sorted({pt.c for pt in landscape})
    ps = sorted({pt.p for pt in landscape})
    z = np.full((len(cs), len(ps)), np.nan)
    for pt in landscape:
        z[cs.index(pt.c), ps.index(pt.p)] = getattr(pt, attr)
    if np.isnan(z).any():
        raise ValueError("landscape is not a full rectangular grid")
    return np.array(cs), np.array(ps), z


def optima_ridge(
    landscape: Sequence[LandscapePoint], axis: str = "p", valuation: str = "ttt"
) -> list[tuple[float, float]]:
    """For each value of the fixed ``axis``, the best value along the other axis.

    TTT valuations are minimized and PIV is maximized.  Ties go to the
    smaller parameter value.
    """
    if axis not in ("c", "p"):
        raise ValueError("axis must be 'c' or 'p'")
    cs, ps, z = landscape_grid(landscape, valuation)
    if valuation == "piv":
        z = -z
    if axis == "c":
        return [(float(c), float(ps[np.argmin(row)])) for c, row in zip(cs, z)]
    return [(float(p), float(cs[np.argmin(col)])) for p, col in zip(ps, z.T)]


def global_optimum(landscape: Sequence[LandscapePoint], valuation: str = "ttt"):
    """``(C, p)`` of the best cell; ties go to the smallest C, then smallest p."""
    cs, ps, z = landscape_grid(landscape, valuation)
    if valuation == "piv":
        z = -z
    i, j = np.unravel_index(np.argmin(z), z.shape)
    return float(cs[i]), float(ps[j])

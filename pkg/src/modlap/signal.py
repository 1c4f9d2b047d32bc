"""Statistics of the value sequence observed at one fixed lattice cell."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .analysis import box_counting_dimension, density
from .lattice import (GridState, ModulusSchedule, NeighborhoodStencil, Trajectory,
                      iterate)

__all__ = [
    "CellSeries",
    "SpectrumReport",
    "DegenerateSeriesError",
    "StyleStats",
    "StyleComparison",
    "extract_series",
    "series_from_states",
    "mean",
    "variance",
    "shannon_entropy",
    "amplitude_spectrum",
    "dft_amplitude",
    "autocorrelation",
    "style_stats",
    "compare_styles",
]


class DegenerateSeriesError(ValueError):
    """The statistic is undefined for this series (e.g. zero variance)."""


@dataclass(frozen=True)
class CellSeries:
    values: tuple[int, ...]
    cell: tuple[int, int] = (0, 0)
    alphabet: int = 2

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.values and (min(self.values) < 0 or max(self.values) >= self.alphabet):
            raise ValueError("series values must lie in [0, alphabet)")

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class SpectrumReport:
    amplitudes: np.ndarray = field(repr=False)
    dominant_bin: int
    peak_to_median: float
    flatness: float


def series_from_states(states: Iterable[GridState], cell: tuple[int, int] = (0, 0)) -> CellSeries:
    values, alphabet = [], 2
    for g in states:
        values.append(g.at(*cell))
        alphabet = max(alphabet, g.max_state)
    return CellSeries(tuple(values), tuple(cell), alphabet)


def extract_series(trajectory: Trajectory, cell: tuple[int, int] | None = None) -> CellSeries:
    """Values of ``trajectory`` at ``cell`` (lattice coordinates; default the seed origin)."""
    return series_from_states(trajectory.states, (0, 0) if cell is None else cell)


def _values(series: CellSeries | Sequence[float]) -> np.ndarray:
    x = series.as_array() if isinstance(series, CellSeries) else np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    return x


def mean(series) -> float:
    return float(_values(series).mean())


def variance(series) -> float:
    """Population variance."""
    return float(_values(series).var())


def shannon_entropy(series) -> float:
    """Entropy of the empirical state distribution, in bits."""
    x = _values(series)
    _, counts = np.unique(x, return_counts=True)
    p = counts / x.size
    return float(max(0.0, -(p * np.log2(p)).sum()))


def amplitude_spectrum(series, full: bool = False) -> np.ndarray:
    """Unitary DFT magnitudes of the mean-removed series.

    With unitary scaling the squared amplitudes over the full spectrum sum to
    ``n * variance``.  ``full=False`` keeps bins ``0..n//2``.
    """
    x = _values(series)
    x = x - x.mean()
    if full:
        return np.abs(np.fft.fft(x, norm="ortho"))
    return np.abs(np.fft.rfft(x, norm="ortho"))


def dft_amplitude(series) -> SpectrumReport:
    x = _values(series)
    if x.size < 4:
        raise ValueError("spectrum needs at least 4 samples")
    amps = amplitude_spectrum(x)
    tail = amps[1:]
    dominant = int(np.argmax(tail)) + 1
    peak = float(tail.max())
    med = float(np.median(tail))
    if peak == 0.0:
        ratio = 1.0
    elif med == 0.0:
        ratio = math.inf
    else:
        ratio = peak / med
    arith = float(tail.mean())
    if arith == 0.0:
        flat = 1.0
    elif (tail == 0).any():
        flat = 0.0
    else:
        flat = float(np.exp(np.log(tail).mean()) / arith)
    return SpectrumReport(amps, dominant, ratio, min(flat, 1.0))


def autocorrelation(series, max_lag: int | None = None) -> np.ndarray:
    """Biased autocorrelation normalised so that ``r[0] == 1``.

    Raises DegenerateSeriesError for a constant series.
    """
    x = _values(series)
    n = x.size
    if max_lag is None:
        max_lag = n // 2
    if not 0 <= max_lag <= n // 2:
        raise ValueError(f"max_lag must lie in [0, {n // 2}]")
    d = x - x.mean()
    denom = float(d @ d)
    if denom == 0.0:
        raise DegenerateSeriesError("autocorrelation of a constant series is undefined")
    return np.array([float(d[:n - tau] @ d[tau:]) / denom for tau in range(max_lag + 1)])


@dataclass(frozen=True)
class StyleStats:
    schedule: str
    series: CellSeries = field(repr=False)
    entropy: float
    mean: float
    variance: float
    spectrum: SpectrumReport = field(repr=False)
    acf: np.ndarray | None = field(repr=False)
    box_dimension: float | None
    final_density: float
    final: GridState = field(repr=False)


@dataclass(frozen=True)
class StyleComparison:
    steps: int
    cell: tuple[int, int]
    styles: dict[str, StyleStats]

    def __getitem__(self, label: str) -> StyleStats:
        return self.styles[label]


def style_stats(seed: GridState, stencil: NeighborhoodStencil, schedule: ModulusSchedule,
                steps: int, cell: tuple[int, int] = (0, 0), max_lag: int | None = None) -> StyleStats:
    """Run one schedule, keeping only the fixed-cell series and the final figure."""
    values, alphabet, final = [], 2, seed
    for g in iterate(seed, stencil, schedule, steps):
        values.append(g.at(*cell))
        alphabet = max(alphabet, g.max_state)
        final = g
    series = CellSeries(tuple(values), tuple(cell), alphabet)
    try:
        acf = autocorrelation(series, max_lag)
    except DegenerateSeriesError:
        acf = None
    fit = box_counting_dimension(final)
    return StyleStats(
        schedule=schedule.label,
        series=series,
        entropy=shannon_entropy(series),
        mean=mean(series),
        variance=variance(series),
        spectrum=dft_amplitude(series),
        acf=acf,
        box_dimension=None if fit is None else fit.slope,
        final_density=density(final),
        final=final,
    )


def compare_styles(seed: GridState, stencil: NeighborhoodStencil, steps: int,
                   cell: tuple[int, int] = (0, 0),
                   schedules: Sequence[ModulusSchedule] | None = None,
                   max_lag: int | None = None) -> StyleComparison:
    """Side-by-side statistics, by default for the 2222 and 2322 schedules."""
    if steps < 100:
        raise ValueError("style comparison needs at least 100 steps")
    if schedules is None:
        schedules = (ModulusSchedule.constant(2), ModulusSchedule.two_n_two_two(3))
    styles = {s.label: style_stats(seed, stencil, s, steps, cell, max_lag) for s in schedules}
    return StyleComparison(steps, tuple(cell), styles)

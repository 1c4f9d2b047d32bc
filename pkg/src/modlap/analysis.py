"""Spatial metrics of a single configuration: density, components, bridging
distance between components and box-counting dimension."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial import cKDTree

from .lattice import GridState, Trajectory, support_bounds

__all__ = [
    "MetricsRow",
    "BoxCountFit",
    "DensityMode",
    "density",
    "connected_components",
    "connectivity_distance",
    "connectivity_distance_pairwise",
    "box_counting_dimension",
    "box_counts",
    "grid_metrics",
    "metrics_over",
]

_STRUCTURE = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True)
class DensityMode:
    """``paper`` uses a fixed 3-cell seed side and radius 1; ``general`` takes both."""

    kind: str = "paper"
    seed_side: int = 3
    radius: int = 1

    def __post_init__(self):
        if self.kind not in ("paper", "general"):
            raise ValueError(f"unknown density mode {self.kind!r}")
        if self.kind == "paper":
            object.__setattr__(self, "seed_side", 3)
            object.__setattr__(self, "radius", 1)
        if self.seed_side < 1 or self.radius < 1:
            raise ValueError("seed_side and radius must be >= 1")

    def denominator(self, iteration: int) -> int:
        return (self.seed_side + 2 * self.radius * iteration) ** 2


PAPER_DENSITY = DensityMode()


@dataclass(frozen=True)
class MetricsRow:
    iteration: int
    density: float
    occupied: int
    components: int
    connectivity_distance: int
    box_dimension: float | None = None


@dataclass(frozen=True)
class BoxCountFit:
    sizes: tuple[int, ...]
    counts: tuple[int, ...]
    slope: float
    intercept: float
    r_squared: float


def density(grid: GridState, mode: DensityMode = PAPER_DENSITY) -> float:
    return grid.occupied() / mode.denominator(grid.iteration)


def _check_adjacency(adjacency: int) -> None:
    if adjacency not in _STRUCTURE:
        raise ValueError("adjacency must be 4 or 8")


def connected_components(grid: GridState, adjacency: int = 8) -> tuple[int, np.ndarray]:
    """Label occupied cells; returns ``(count, labels)`` with labels aligned to ``grid.cells``."""
    _check_adjacency(adjacency)
    labels, count = ndimage.label(grid.cells > 0, structure=_STRUCTURE[adjacency])
    return int(count), labels


def _connected_at(mask: np.ndarray, reach: int) -> bool:
    # Boxes of side `reach` around every cell touch (8-wise) iff the cells are
    # within Chebyshev distance `reach`, so one label means the threshold graph is connected.
    padded = np.pad(mask, reach)
    if reach > 1:
        padded = ndimage.maximum_filter(padded, size=reach)
    _, n = ndimage.label(padded, structure=_STRUCTURE[8])
    return n == 1


def _bottleneck_chebyshev(mask: np.ndarray) -> int:
    lo, hi = 1, max(mask.shape)
    if _connected_at(mask, lo):
        return 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _connected_at(mask, mid):
            hi = mid
        else:
            lo = mid
    return hi - 1


def connectivity_distance_pairwise(grid: GridState, adjacency: int = 8) -> int:
    """Bottleneck MST over the complete component graph with exact pairwise costs.

    Cost between two components is the shortest cell-to-cell distance minus 1
    (Chebyshev under 8-adjacency, Manhattan under 4-adjacency).
    """
    count, labels = connected_components(grid, adjacency)
    if count == 0:
        raise ValueError("connectivity distance is undefined for an empty grid")
    if count == 1:
        return 0
    p = np.inf if adjacency == 8 else 1
    coords = [np.argwhere(labels == k) for k in range(1, count + 1)]
    trees = [cKDTree(c) for c in coords]
    weights = np.zeros((count, count))
    for a in range(count):
        for b in range(a + 1, count):
            small, big = (a, b) if len(coords[a]) <= len(coords[b]) else (b, a)
            d, _ = trees[big].query(coords[small], p=p)
            # stored as raw distance (cost + 1) so zero-cost bridges stay explicit edges
            weights[a, b] = round(d.min())
    mst = minimum_spanning_tree(csr_matrix(weights))
    return int(mst.data.max()) - 1


def connectivity_distance(grid: GridState, adjacency: int = 8) -> int:
    """Smallest k such that bridges no longer than k join every component."""
    _check_adjacency(adjacency)
    mask = grid.cells > 0
    if not mask.any():
        raise ValueError("connectivity distance is undefined for an empty grid")
    if adjacency == 8:
        return _bottleneck_chebyshev(mask)
    return connectivity_distance_pairwise(grid, adjacency)


def box_counts(mask: np.ndarray, sizes: Iterable[int]) -> list[int]:
    """Number of ``s x s`` boxes, anchored at the top-left corner, holding an occupied cell."""
    out = []
    h, w = mask.shape
    for s in sizes:
        ph, pw = -(-h // s) * s, -(-w // s) * s
        padded = np.zeros((ph, pw), dtype=bool)
        padded[:h, :w] = mask
        blocks = padded.reshape(ph // s, s, pw // s, s).any(axis=(1, 3))
        out.append(int(blocks.sum()))
    return out


def box_counting_dimension(grid: GridState) -> BoxCountFit | None:
    """Least-squares slope of log N(eps) against log(1/eps) over eps = 1, 2, 4, ... <= side/2.

    Returns None when the support is too small to give at least two box sizes.
    """
    bounds = support_bounds(grid)
    if bounds is None or grid.occupied() < 2:
        return None
    xmin, ymin, xmax, ymax = bounds
    mask = grid.window(xmin, ymin, xmax, ymax) > 0
    side = max(mask.shape)
    sizes = []
    s = 1
    while s <= side / 2:
        sizes.append(s)
        s *= 2
    if len(sizes) < 2:
        return None
    counts = box_counts(mask, sizes)
    x = np.log(1.0 / np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float((resid ** 2).sum()) / ss_tot)
    return BoxCountFit(tuple(sizes), tuple(counts), float(slope), float(intercept), min(r2, 1.0))


def grid_metrics(grid: GridState, adjacency: int = 8, mode: DensityMode = PAPER_DENSITY,
                 with_dimension: bool = True) -> MetricsRow:
    count, _ = connected_components(grid, adjacency)
    k = connectivity_distance(grid, adjacency) if count else 0
    fit = box_counting_dimension(grid) if with_dimension else None
    return MetricsRow(grid.iteration, density(grid, mode), grid.occupied(), count, k,
                      None if fit is None else fit.slope)


def metrics_over(trajectory: Trajectory | Iterable[GridState], adjacency: int = 8,
                 mode: DensityMode = PAPER_DENSITY, with_dimension: bool = True) -> list[MetricsRow]:
    states = trajectory.states if isinstance(trajectory, Trajectory) else trajectory
    return [grid_metrics(g, adjacency, mode, with_dimension) for g in states]

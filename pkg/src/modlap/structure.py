"""Checks of the replication structure of mod-2 figures: seed copies at
iterations 8k, the early block pattern, and the 2^(k+1)-1 checkpoints."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .analysis import box_counting_dimension
from .lattice import (DIAG, GridState, ModulusSchedule, NeighborhoodStencil, iterate,
                      make_seed, support_bounds)

__all__ = [
    "CopyReport",
    "SierpinskiReport",
    "Checkpoint",
    "TraceEntry",
    "detect_seed_copies",
    "reassemble",
    "verify_dissociation",
    "appendix_trace",
    "first_step_template",
    "is_d4_symmetric",
    "sierpinski_report",
    "all_binary_seeds",
]

MOD2 = ModulusSchedule.constant(2)


@dataclass(frozen=True)
class CopyReport:
    """Result of tiling a figure with translated copies of a seed.

    ``offsets`` are lattice translations of the seed frame; ``gap`` is the
    Chebyshev clearance between copy frames (``math.inf`` for fewer than two copies).
    """

    matched: bool
    offsets: tuple[tuple[int, int], ...]
    gap: float
    residue: int
    iteration: int = 0

    def relative_offsets(self) -> set[tuple[int, int]]:
        if not self.offsets:
            return set()
        bx = min(dx for dx, _ in self.offsets)
        by = min(dy for _, dy in self.offsets)
        return {(dx - bx, dy - by) for dx, dy in self.offsets}


def _frame(seed: GridState) -> tuple[int, int, int, int]:
    return seed.extent


def _box_gap(a, b) -> int:
    gx = max(0, b[0] - a[2], a[0] - b[2])
    gy = max(0, b[1] - a[3], a[1] - b[3])
    return max(gx, gy) - 1


def detect_seed_copies(grid: GridState, seed: GridState) -> CopyReport:
    """Greedy row-major tiling of ``grid`` by exact translates of the seed frame.

    The seed frame is the seed's full array (zeros included), so a copy only
    matches where its surrounding frame cells are empty as well.
    """
    if not seed.cells.any():
        raise ValueError("seed has no occupied cell")
    fx0, fy0, fx1, fy1 = _frame(seed)
    pattern = seed.cells
    anchor_row, anchor_col = np.argwhere(pattern)[0]
    anchor = (int(anchor_col) + fx0, int(anchor_row) + fy0)

    ox, oy = grid.origin
    covered = np.zeros(grid.cells.shape, dtype=bool)
    offsets, boxes = [], []
    residue = 0
    for row, col in np.argwhere(grid.cells):
        if covered[row, col]:
            continue
        x, y = int(col) - ox, int(row) - oy
        dx, dy = x - anchor[0], y - anchor[1]
        box = (fx0 + dx, fy0 + dy, fx1 + dx, fy1 + dy)
        window = grid.window(*box)
        clash = _covered_window(covered, grid, box).any()
        if not clash and np.array_equal(window, pattern):
            _mark(covered, grid, box, pattern)
            offsets.append((dx, dy))
            boxes.append(box)
        else:
            residue += 1
            covered[row, col] = True
    disjoint = all(_box_gap(a, b) >= 0 for a, b in combinations(boxes, 2))
    gap = min((_box_gap(a, b) for a, b in combinations(boxes, 2)), default=math.inf)
    matched = residue == 0 and bool(offsets) and disjoint
    return CopyReport(matched, tuple(offsets), gap, residue, grid.iteration)


def _covered_window(covered, grid, box) -> np.ndarray:
    ox, oy = grid.origin
    x0, y0, x1, y1 = box
    r0, r1 = max(y0 + oy, 0), min(y1 + oy + 1, covered.shape[0])
    c0, c1 = max(x0 + ox, 0), min(x1 + ox + 1, covered.shape[1])
    return covered[r0:r1, c0:c1]


def _mark(covered, grid, box, pattern) -> None:
    ox, oy = grid.origin
    x0, y0 = box[0], box[1]
    for r, c in np.argwhere(pattern):
        covered[r + y0 + oy, c + x0 + ox] = True


def reassemble(seed: GridState, offsets, like: GridState) -> GridState:
    """Place seed copies at ``offsets`` on an empty grid framed like ``like``."""
    cells = np.zeros(like.cells.shape, dtype=np.int64)
    fx0, fy0, _, _ = _frame(seed)
    ox, oy = like.origin
    for dx, dy in offsets:
        for r, c in np.argwhere(seed.cells):
            cells[r + fy0 + dy + oy, c + fx0 + dx + ox] += seed.cells[r, c]
    return GridState(cells, like.origin, like.iteration, max(like.max_state, int(cells.max()) + 1))


def verify_dissociation(seed: GridState, k_max: int, stencil: NeighborhoodStencil = DIAG,
                        strict: bool = True) -> list[CopyReport]:
    """Copy reports at iterations 8, 16, ..., 8*k_max under the mod-2 dynamics."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if seed.width > 3 or seed.height > 3:
        msg = f"seed frame {seed.width}x{seed.height} exceeds 3x3"
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=2)
    reports = []
    for g in iterate(seed, stencil, MOD2, 8 * k_max):
        if g.iteration and g.iteration % 8 == 0:
            reports.append(detect_seed_copies(g, seed))
    return reports


# Entries of the first iterate of a 3x3 seed a..i under the diagonal stencil;
# each string lists the seed letters whose mod-2 sum gives the cell.
_F1_TEMPLATE = (
    ("a", "b", "ac", "b", "c"),
    ("d", "e", "df", "e", "f"),
    ("ag", "bh", "acgi", "bh", "ci"),
    ("d", "e", "df", "e", "f"),
    ("g", "h", "gi", "h", "i"),
)


def first_step_template(seed: GridState) -> np.ndarray:
    """Concrete 5x5 first iterate predicted by the symbolic template."""
    if seed.cells.shape != (3, 3):
        raise ValueError("template applies to 3x3 seeds")
    letters = dict(zip("abcdefghi", seed.cells.ravel().tolist()))
    return np.array([[sum(letters[ch] for ch in entry) % 2 for entry in row]
                     for row in _F1_TEMPLATE], dtype=np.uint8)


@dataclass(frozen=True)
class TraceEntry:
    step: str
    passed: bool
    detail: str = ""


def _spacing_check(grid: GridState, seed: GridState, spacing: int) -> tuple[bool, str]:
    rep = detect_seed_copies(grid, seed)
    want = {(0, 0), (spacing, 0), (0, spacing), (spacing, spacing)}
    got = rep.relative_offsets()
    ok = rep.matched and got == want
    return ok, f"matched={rep.matched} offsets={sorted(got)}"


def _within(grid: GridState, box) -> bool:
    b = support_bounds(grid)
    return b is None or (b[0] >= box[0] and b[1] >= box[1] and b[2] <= box[2] and b[3] <= box[3])


def appendix_trace(seed: GridState) -> list[TraceEntry]:
    """Pass/fail ledger for the first four mod-2 iterates of a 3x3 seed (diagonal stencil)."""
    if seed.cells.shape != (3, 3):
        raise ValueError("trace requires a 3x3 seed")
    states = list(iterate(seed, DIAG, MOD2, 4))
    fx0, fy0, fx1, fy1 = _frame(seed)
    symmetric = is_d4_symmetric(seed, about=(fx0, fy0, fx1, fy1))
    entries = []
    for i in (1, 3):
        g = states[i]
        box = (fx0 - i, fy0 - i, fx1 + i, fy1 + i)
        ok = _within(g, box)
        detail = f"support within {box}"
        if symmetric:
            ok = ok and is_d4_symmetric(g, about=box)
            detail += "; D4-symmetric"
        if i == 1:
            ok = ok and np.array_equal(g.window(*box), first_step_template(seed))
            detail += "; matches symbolic template"
        entries.append(TraceEntry(f"F{i}", bool(ok), detail))
    for i, spacing in ((2, 4), (4, 8)):
        ok, detail = _spacing_check(states[i], seed, spacing)
        entries.append(TraceEntry(f"F{i}", ok, detail))
    entries.sort(key=lambda e: e.step)
    return entries


def is_d4_symmetric(grid: GridState, about: tuple[int, int, int, int] | None = None) -> bool:
    """Invariance under the square's symmetry group, about the center of ``about``.

    ``about`` defaults to the support bounding box; an empty grid is symmetric.
    """
    box = about if about is not None else support_bounds(grid)
    if box is None:
        return True
    w = grid.window(*box)
    if w.shape[0] != w.shape[1]:
        return False
    return np.array_equal(w, np.rot90(w)) and np.array_equal(w, w.T)


@dataclass(frozen=True)
class Checkpoint:
    k: int
    iteration: int
    box_dimension: float | None
    d4_symmetric: bool


@dataclass(frozen=True)
class SierpinskiReport:
    checkpoints: tuple[Checkpoint, ...] = field(default=())

    def dimensions(self) -> dict[int, float | None]:
        return {c.iteration: c.box_dimension for c in self.checkpoints}


def sierpinski_report(seed: GridState, stencil: NeighborhoodStencil = DIAG,
                      k_max: int = 6) -> SierpinskiReport:
    """Box dimension and D4 symmetry at iterations 2^(k+1)-1 for k = 0..k_max."""
    if not 0 <= k_max <= 6:
        raise ValueError("k_max must lie in [0, 6]")
    marks = {2 ** (k + 1) - 1: k for k in range(k_max + 1)}
    points = []
    for g in iterate(seed, stencil, MOD2, max(marks)):
        if g.iteration in marks:
            fit = box_counting_dimension(g)
            points.append(Checkpoint(marks[g.iteration], g.iteration,
                                     None if fit is None else fit.slope, is_d4_symmetric(g)))
    return SierpinskiReport(tuple(points))


def all_binary_seeds(side: int = 3):
    """Every nonzero binary seed on a ``side x side`` frame, in bitmask order."""
    n = side * side
    for mask in range(1, 2 ** n):
        bits = [(mask >> j) & 1 for j in range(n)]
        rows = ["".join(str(b) for b in bits[r * side:(r + 1) * side]) for r in range(side)]
        yield make_seed(rows)

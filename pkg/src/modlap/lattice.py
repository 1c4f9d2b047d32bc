"""Lattice configurations and the modular Laplacian evolution.

A configuration is a finite-support integer field on the square lattice.
Lattice point ``(x, y)`` is stored at ``cells[y + oy, x + ox]`` where
``origin == (ox, oy)``; rows grow downward.  Everything outside the array
reads as 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "GridState",
    "NeighborhoodStencil",
    "ModulusSchedule",
    "Trajectory",
    "VON_NEUMANN",
    "DIAG",
    "MOORE",
    "make_seed",
    "stencil_by_name",
    "stencil_from_mask",
    "parse_schedule",
    "modulus_at",
    "laplacian",
    "step",
    "iterate",
    "evolve",
    "support_bounds",
]


@dataclass(frozen=True, eq=False)
class GridState:
    cells: np.ndarray
    origin: tuple[int, int]
    iteration: int = 0
    max_state: int = 2

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.size == 0:
            raise ValueError("cells must be a non-empty 2D array")
        if self.max_state < 1:
            raise ValueError("max_state must be positive")
        if cells.min() < 0 or cells.max() >= self.max_state:
            raise ValueError(f"cell values must lie in [0, {self.max_state})")
        if self.iteration < 0:
            raise ValueError("iteration must be non-negative")
        cells = cells.astype(np.uint8, copy=True)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def extent(self) -> tuple[int, int, int, int]:
        """Lattice box covered by the array as ``(xmin, ymin, xmax, ymax)``."""
        ox, oy = self.origin
        return -ox, -oy, self.width - 1 - ox, self.height - 1 - oy

    def at(self, x: int, y: int) -> int:
        col, row = x + self.origin[0], y + self.origin[1]
        if 0 <= row < self.height and 0 <= col < self.width:
            return int(self.cells[row, col])
        return 0

    def window(self, xmin: int, ymin: int, xmax: int, ymax: int) -> np.ndarray:
        """Values on the lattice box (inclusive), zero-filled off the array."""
        out = np.zeros((ymax - ymin + 1, xmax - xmin + 1), dtype=np.uint8)
        exmin, eymin, exmax, eymax = self.extent
        lo_x, hi_x = max(xmin, exmin), min(xmax, exmax)
        lo_y, hi_y = max(ymin, eymin), min(ymax, eymax)
        if lo_x <= hi_x and lo_y <= hi_y:
            ox, oy = self.origin
            out[lo_y - ymin:hi_y - ymin + 1, lo_x - xmin:hi_x - xmin + 1] = \
                self.cells[lo_y + oy:hi_y + oy + 1, lo_x + ox:hi_x + ox + 1]
        return out

    def occupied(self) -> int:
        return int(np.count_nonzero(self.cells))

    def same_field(self, other: "GridState") -> bool:
        """Cellwise equality of the lattice fields, ignoring array framing."""
        xmin = min(self.extent[0], other.extent[0])
        ymin = min(self.extent[1], other.extent[1])
        xmax = max(self.extent[2], other.extent[2])
        ymax = max(self.extent[3], other.extent[3])
        return np.array_equal(self.window(xmin, ymin, xmax, ymax),
                              other.window(xmin, ymin, xmax, ymax))

    def __eq__(self, other):
        if not isinstance(other, GridState):
            return NotImplemented
        return (self.origin == other.origin and self.iteration == other.iteration
                and self.max_state == other.max_state
                and np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash((self.origin, self.iteration, self.max_state, self.cells.tobytes()))

    def __repr__(self):
        return (f"GridState({self.width}x{self.height}, origin={self.origin}, "
                f"iteration={self.iteration}, max_state={self.max_state})")


@dataclass(frozen=True)
class NeighborhoodStencil:
    offsets: tuple[tuple[int, int], ...]
    name: str = "custom"

    def __post_init__(self):
        offsets = tuple((int(dx), int(dy)) for dx, dy in self.offsets)
        if not offsets:
            raise ValueError("stencil needs at least one offset")
        if (0, 0) in offsets:
            raise ValueError("stencil must not contain the center offset (0, 0)")
        if len(set(offsets)) != len(offsets):
            raise ValueError("duplicate stencil offsets")
        object.__setattr__(self, "offsets", tuple(sorted(offsets)))

    @property
    def radius(self) -> int:
        return max(max(abs(dx), abs(dy)) for dx, dy in self.offsets)

    def __len__(self):
        return len(self.offsets)


VON_NEUMANN = NeighborhoodStencil(((1, 0), (-1, 0), (0, 1), (0, -1)), "von-neumann")
DIAG = NeighborhoodStencil(((1, 1), (1, -1), (-1, 1), (-1, -1)), "diag")
MOORE = NeighborhoodStencil(VON_NEUMANN.offsets + DIAG.offsets, "moore")

_STENCILS = {
    "von-neumann": VON_NEUMANN, "vn": VON_NEUMANN, "vonneumann": VON_NEUMANN,
    "diag": DIAG, "diag-neumann": DIAG, "diagonal": DIAG,
    "moore": MOORE,
}


def stencil_by_name(name: str) -> NeighborhoodStencil:
    try:
        return _STENCILS[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown neighborhood {name!r}") from None


def stencil_from_mask(rows: Sequence[str]) -> NeighborhoodStencil:
    """Build a stencil from an odd-sized 0/1 mask whose center is the cell itself."""
    rows = [r.strip() for r in rows if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("mask rows must be non-empty and of equal length")
    h, w = len(rows), len(rows[0])
    if h % 2 == 0 or w % 2 == 0:
        raise ValueError("mask dimensions must be odd")
    cy, cx = h // 2, w // 2
    offsets = []
    for r, line in enumerate(rows):
        for c, ch in enumerate(line):
            if ch not in "01":
                raise ValueError(f"mask entries must be 0 or 1, got {ch!r}")
            if ch == "1":
                if (r, c) == (cy, cx):
                    raise ValueError("mask center must be 0")
                offsets.append((c - cx, r - cy))
    return NeighborhoodStencil(tuple(offsets), "custom")


@dataclass(frozen=True)
class ModulusSchedule:
    """Rule giving the modulus applied at step ``i`` (``i >= 1``).

    ``kind`` is ``"constant"``, ``"two_n_two_two"`` or ``"explicit"``.
    """

    kind: str
    n: int = 2
    values: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "two_n_two_two", "explicit"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "explicit":
            object.__setattr__(self, "values", tuple(int(v) for v in self.values))
            if not self.values or min(self.values) < 2:
                raise ValueError("explicit schedule needs moduli >= 2")
        elif self.n < 2:
            raise ValueError("modulus must be >= 2")

    @classmethod
    def constant(cls, n: int) -> "ModulusSchedule":
        return cls("constant", n=n)

    @classmethod
    def two_n_two_two(cls, n: int) -> "ModulusSchedule":
        return cls("two_n_two_two", n=n)

    @classmethod
    def explicit(cls, values: Sequence[int]) -> "ModulusSchedule":
        return cls("explicit", values=tuple(values))

    @property
    def label(self) -> str:
        if self.kind == "constant":
            return "2222" if self.n == 2 else f"const:{self.n}"
        if self.kind == "two_n_two_two":
            return f"2{self.n}22" if self.n < 10 else f"2n22:{self.n}"
        return "explicit:" + ",".join(map(str, self.values))

    def max_modulus(self, steps: int | None = None) -> int:
        if self.kind == "explicit":
            vals = self.values if steps is None else self.values[:steps]
            return max(vals, default=2)
        return max(self.n, 2)


def parse_schedule(spec: str) -> ModulusSchedule:
    """Parse ``2222``, ``2322``, ``2n22:5``, ``const:3`` or ``explicit:2,3,2,2``."""
    s = spec.strip().lower()
    try:
        if s.startswith("const:"):
            return ModulusSchedule.constant(int(s[6:]))
        if s.startswith("2n22:"):
            return ModulusSchedule.two_n_two_two(int(s[5:]))
        if s.startswith("explicit:"):
            return ModulusSchedule.explicit([int(v) for v in s[9:].split(",")])
        if len(s) == 4 and s.isdigit() and s[0] == "2" and s[2:] == "22":
            n = int(s[1])
            return ModulusSchedule.constant(2) if n == 2 else ModulusSchedule.two_n_two_two(n)
    except ValueError as exc:
        raise ValueError(f"bad schedule {spec!r}: {exc}") from None
    raise ValueError(f"unrecognised schedule {spec!r}")


def modulus_at(schedule: ModulusSchedule, i: int) -> int:
    if i < 1:
        raise ValueError("step index starts at 1")
    if schedule.kind == "constant":
        return schedule.n
    if schedule.kind == "two_n_two_two":
        return schedule.n if i % 4 == 2 else 2
    if i > len(schedule.values):
        raise IndexError(f"explicit schedule has no modulus for step {i}")
    return schedule.values[i - 1]


def make_seed(pattern: str | Sequence[str]) -> GridState:
    """Parse digit rows (``"101/010/101"`` or a list of rows) into an iteration-0 grid."""
    if isinstance(pattern, str):
        rows = [r for r in pattern.replace("\n", "/").split("/") if r.strip()]
    else:
        rows = list(pattern)
    rows = [r.strip() for r in rows]
    if not rows or not rows[0]:
        raise ValueError("seed pattern is empty")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("seed rows are ragged")
    if not all(r.isdigit() for r in rows):
        raise ValueError("seed rows must contain digits 0-9 only")
    cells = np.array([[int(ch) for ch in r] for r in rows], dtype=np.uint8)
    if not cells.any():
        raise ValueError("seed has no occupied cell")
    h, w = cells.shape
    return GridState(cells, ((w - 1) // 2, (h - 1) // 2), 0, max(int(cells.max()) + 1, 2))


def laplacian(grid: GridState, stencil: NeighborhoodStencil) -> tuple[np.ndarray, tuple[int, int]]:
    """Integer Laplacian ``sum_g (v(g) - v(p))`` on the input box dilated by the radius.

    Returns ``(values, origin)`` with the same indexing convention as GridState.
    """
    r = stencil.radius
    src = np.pad(grid.cells.astype(np.int64), 2 * r)
    h, w = grid.height + 2 * r, grid.width + 2 * r
    center = src[r:r + h, r:r + w]
    acc = np.zeros((h, w), dtype=np.int64)
    for dx, dy in stencil.offsets:
        acc += src[r + dy:r + dy + h, r + dx:r + dx + w]
    acc -= len(stencil) * center
    ox, oy = grid.origin
    return acc, (ox + r, oy + r)


def step(grid: GridState, stencil: NeighborhoodStencil, modulus: int) -> GridState:
    if modulus < 2:
        raise ValueError("modulus must be >= 2")
    values, origin = laplacian(grid, stencil)
    # numpy's % on signed ints already yields the Euclidean residue for modulus > 0
    return GridState(np.mod(values, modulus), origin, grid.iteration + 1, max(modulus, 2))


def iterate(seed: GridState, stencil: NeighborhoodStencil, schedule: ModulusSchedule,
            steps: int) -> Iterator[GridState]:
    """Yield the seed followed by ``steps`` successive iterates."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if schedule.kind == "explicit" and len(schedule.values) < steps:
        raise ValueError(f"explicit schedule covers {len(schedule.values)} steps, need {steps}")
    state = seed
    yield state
    for i in range(1, steps + 1):
        state = step(state, stencil, modulus_at(schedule, i))
        yield state


@dataclass(frozen=True)
class Trajectory:
    seed: GridState
    stencil: NeighborhoodStencil
    schedule: ModulusSchedule
    states: tuple[GridState, ...] = field(repr=False)

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    @property
    def final(self) -> GridState:
        return self.states[-1]

    def __getitem__(self, i: int) -> GridState:
        return self.states[i]

    def __len__(self):
        return len(self.states)


def evolve(seed: GridState, stencil: NeighborhoodStencil, schedule: ModulusSchedule,
           steps: int) -> Trajectory:
    return Trajectory(seed, stencil, schedule, tuple(iterate(seed, stencil, schedule, steps)))


def support_bounds(grid: GridState) -> tuple[int, int, int, int] | None:
    """Tight lattice box ``(xmin, ymin, xmax, ymax)`` of nonzero cells, or None if empty."""
    rows = np.flatnonzero(grid.cells.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(grid.cells.any(axis=0))
    ox, oy = grid.origin
    return int(cols[0]) - ox, int(rows[0]) - oy, int(cols[-1]) - ox, int(rows[-1]) - oy

"""Snapshot files, image rendering, CSV export and KEY=VALUE config files."""
from __future__ import annotations

import colorsys
import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import MetricsRow
from .lattice import GridState

__all__ = [
    "SnapshotError",
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
    "write_snapshot",
    "read_snapshot",
    "dumps_snapshot",
    "loads_snapshot",
    "render",
    "PALETTE",
    "METRICS_HEADER",
    "export_metrics_csv",
    "format_float",
    "write_csv",
    "read_config",
]

SNAPSHOT_MAGIC = "MODLAP-SNAPSHOT"
SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    pass


def dumps_snapshot(grid: GridState) -> str:
    if grid.max_state > 10:
        raise SnapshotError("snapshot format stores single digits (max_state <= 10)")
    header = (f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}\n"
              f"{grid.width} {grid.height} {grid.iteration} {grid.origin[0]} {grid.origin[1]} "
              f"{grid.max_state}\n")
    body = "\n".join("".join(map(str, row)) for row in grid.cells.tolist())
    return header + body + "\n"


def loads_snapshot(text: str) -> GridState:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2:
        raise SnapshotError("truncated snapshot header")
    magic = lines[0].split()
    if len(magic) != 2 or magic[0] != SNAPSHOT_MAGIC:
        raise SnapshotError("not a snapshot file")
    if magic[1] != str(SNAPSHOT_VERSION):
        raise SnapshotError(f"unsupported snapshot version {magic[1]!r}")
    try:
        width, height, iteration, ox, oy, max_state = map(int, lines[1].split())
    except ValueError:
        raise SnapshotError("malformed snapshot header") from None
    if width < 1 or height < 1 or not 1 <= max_state <= 10 or iteration < 0:
        raise SnapshotError("snapshot header out of range")
    rows = lines[2:]
    if len(rows) != height:
        raise SnapshotError(f"expected {height} rows, found {len(rows)}")
    if any(len(r) != width or not r.isdigit() for r in rows):
        raise SnapshotError(f"rows must be {width} digits")
    cells = np.array([[int(ch) for ch in r] for r in rows], dtype=np.uint8)
    if cells.max() >= max_state:
        raise SnapshotError(f"digit exceeds max_state {max_state}")
    return GridState(cells, (ox, oy), iteration, max_state)


def write_snapshot(grid: GridState, destination) -> None:
    text = dumps_snapshot(grid)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="ascii", newline="\n")


def read_snapshot(source) -> GridState:
    if hasattr(source, "read"):
        return loads_snapshot(source.read())
    return loads_snapshot(Path(source).read_text(encoding="ascii"))


def _palette() -> np.ndarray:
    # 0 white, 1 black, 2 red, 3 blue, then six evenly spaced hues
    colors = [(255, 255, 255), (0, 0, 0), (255, 0, 0), (0, 0, 255)]
    for j in range(6):
        r, g, b = colorsys.hsv_to_rgb(j / 6 + 1 / 12, 1.0, 1.0)
        colors.append((round(r * 255), round(g * 255), round(b * 255)))
    return np.array(colors, dtype=np.uint8)


PALETTE = _palette()


def render(grid: GridState, fmt: str = "ascii", scale: int = 1,
           palette: np.ndarray | None = None) -> bytes:
    """Render one cell per character (ascii) or per ``scale x scale`` pixel block."""
    if scale < 1:
        raise ValueError("scale must be >= 1")
    cells = grid.cells
    if fmt == "ascii":
        lines = ["".join("·" if v == 0 else str(v) for v in row) for row in cells.tolist()]
        return ("\n".join(lines) + "\n").encode("utf-8")
    big = np.kron(cells, np.ones((scale, scale), dtype=np.uint8)) if scale > 1 else cells
    h, w = big.shape
    if fmt == "pgm":
        top = max(grid.max_state - 1, 1)
        gray = ((255 * (top - big.astype(np.int64))) // top).clip(0, 255).astype(np.uint8)
        return f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes()
    if fmt == "ppm":
        pal = PALETTE if palette is None else np.asarray(palette, dtype=np.uint8)
        if big.max() >= len(pal):
            raise ValueError("palette too short for grid states")
        return f"P6\n{w} {h}\n255\n".encode("ascii") + pal[big].tobytes()
    raise ValueError(f"unknown render format {fmt!r}")


METRICS_HEADER = ("iteration", "density", "occupied", "components",
                  "connectivity_distance", "box_dimension")


def format_float(value: float | None) -> str:
    # repr gives the shortest round-tripping form and never depends on locale
    if value is None:
        return ""
    return repr(float(value))


def write_csv(destination, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    def cell(v):
        if isinstance(v, float) or v is None:
            return format_float(v)
        return str(v)

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([cell(v) for v in r])

    if hasattr(destination, "write"):
        emit(destination)
    else:
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def export_metrics_csv(rows: Iterable[MetricsRow], destination) -> None:
    write_csv(destination, METRICS_HEADER,
              ((r.iteration, float(r.density), r.occupied, r.components,
                r.connectivity_distance, r.box_dimension) for r in rows))


def read_config(source) -> dict[str, str]:
    """Parse flat ``KEY=VALUE`` lines; ``#`` starts a comment, keys are case-insensitive."""
    text = source.read() if hasattr(source, "read") else Path(source).read_text(encoding="utf-8")
    out = {}
    for lineno, raw in enumerate(io.StringIO(text), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected KEY=VALUE")
        key, value = line.split("=", 1)
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out

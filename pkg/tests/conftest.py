import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).resolve().parent))

from modlap.lattice import GridState  # noqa: E402

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def data_dir():
    return DATA


def grid_to_field(grid):
    """GridState -> {(x, y): value} for comparison with the oracle."""
    ox, oy = grid.origin
    return {(int(c) - ox, int(r) - oy): int(grid.cells[r, c])
            for r, c in np.argwhere(grid.cells)}


@st.composite
def binary_seeds(draw, max_side=5):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    bits = draw(st.lists(st.integers(0, 1), min_size=h * w, max_size=h * w))
    if not any(bits):
        bits[draw(st.integers(0, h * w - 1))] = 1
    cells = np.array(bits, dtype=np.uint8).reshape(h, w)
    return GridState(cells, ((w - 1) // 2, (h - 1) // 2), 0, 2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

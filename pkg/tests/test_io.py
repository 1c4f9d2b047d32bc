import csv
import io

import numpy as np
import pytest

from modlap.analysis import MetricsRow
from modlap.io import (METRICS_HEADER, PALETTE, SnapshotError, dumps_snapshot,
                       export_metrics_csv, loads_snapshot, read_config, read_snapshot,
                       render, write_snapshot)
from modlap.lattice import DIAG, VON_NEUMANN, GridState, ModulusSchedule, evolve, make_seed, step


def random_reachable(rng, n_states):
    states = []
    sched = ModulusSchedule.two_n_two_two(3)
    for _ in range(n_states):
        rows = ["".join(str(b) for b in rng.integers(0, 2, 3)) for _ in range(3)]
        if "1" not in "".join(rows):
            rows[0] = "100"
        traj = evolve(make_seed(rows), DIAG, sched, int(rng.integers(0, 41)))
        states.append(traj.final)
    return states


class TestSnapshot:
    def test_round_trip_2322_at_40(self, tmp_path):
        g = evolve(make_seed("110/011/010"), DIAG, ModulusSchedule.two_n_two_two(3), 40).final
        write_snapshot(g, tmp_path / "a.snap")
        assert read_snapshot(tmp_path / "a.snap") == g

    def test_layout(self):
        text = dumps_snapshot(make_seed("10/01"))
        assert text == "MODLAP-SNAPSHOT 1\n2 2 0 0 0 2\n10\n01\n"

    def test_file_objects(self):
        buf = io.StringIO()
        g = step(make_seed("1"), DIAG, 3)
        write_snapshot(g, buf)
        buf.seek(0)
        assert read_snapshot(buf) == g

    @pytest.mark.parametrize("text", [
        "MODLAP-SNAPSHOT 1\n2 2 0 0 0 2\n10\n",          # truncated body
        "MODLAP-SNAPSHOT 1\n",                            # truncated header
        "MODLAP-SNAPSHOT 1\n2 2 0 0 x 2\n10\n01\n",      # malformed header
        "NOPE 1\n1 1 0 0 0 2\n1\n",                       # wrong magic
        "MODLAP-SNAPSHOT 1\n2 2 0 0 0 2\n12\n01\n",      # digit >= max_state
        "MODLAP-SNAPSHOT 1\n3 2 0 0 0 2\n10\n01\n",      # width mismatch
    ])
    def test_malformed(self, text):
        with pytest.raises(SnapshotError):
            loads_snapshot(text)

    def test_version_mismatch(self):
        with pytest.raises(SnapshotError, match="version"):
            loads_snapshot("MODLAP-SNAPSHOT 2\n1 1 0 0 0 2\n1\n")

    def test_too_many_states(self):
        g = GridState(np.array([[10]]), (0, 0), 0, 11)
        with pytest.raises(SnapshotError):
            dumps_snapshot(g)


class TestRender:
    def test_single_point_pgm(self):
        assert render(make_seed("1"), "pgm") == b"P5\n1 1\n255\n\x00"

    def test_three_state_gray_levels(self):
        g = GridState(np.array([[0, 1, 2]]), (0, 0), 0, 3)
        blob = render(g, "pgm")
        assert blob.endswith(bytes([255, 127, 0]))

    def test_plus_ascii(self):
        g = step(make_seed("1"), VON_NEUMANN, 2)
        assert render(g, "ascii").decode("utf-8") == "·1·\n1·1\n·1·\n"

    def test_ppm_palette(self):
        g = GridState(np.array([[0, 1, 2, 3]]), (0, 0), 0, 4)
        blob = render(g, "ppm")
        assert blob.startswith(b"P6\n4 1\n255\n")
        px = np.frombuffer(blob[len(b"P6\n4 1\n255\n"):], dtype=np.uint8).reshape(4, 3)
        assert px.tolist() == [[255, 255, 255], [0, 0, 0], [255, 0, 0], [0, 0, 255]]
        assert len({tuple(c) for c in PALETTE.tolist()}) == 10

    def test_scale(self):
        blob = render(make_seed("10"), "pgm", scale=3)
        assert blob.startswith(b"P5\n6 3\n255\n")
        body = blob[len(b"P5\n6 3\n255\n"):]
        assert body == bytes([0, 0, 0, 255, 255, 255] * 3)

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render(make_seed("1"), "png")


class TestMetricsCsv:
    def test_one_row(self):
        buf = io.StringIO()
        export_metrics_csv([MetricsRow(8, 36 / 361, 36, 4, 13, None)], buf)
        lines = buf.getvalue().split("\n")
        assert lines[0] == ",".join(METRICS_HEADER)
        assert len(buf.getvalue().splitlines()) == 2
        fields = lines[1].split(",")
        assert fields[-1] == ""
        digits = fields[1].replace("0.", "", 1).lstrip("0")
        assert len(digits) >= 10 and float(fields[1]) == 36 / 361

    def test_reader_round_trip(self, tmp_path):
        rows = [MetricsRow(i, i / 7, i, 1, 0, 1.5 if i else None) for i in range(5)]
        path = tmp_path / "m.csv"
        export_metrics_csv(rows, path)
        assert b"\r\n" not in path.read_bytes()
        with open(path, newline="") as fh:
            parsed = list(csv.DictReader(fh))
        assert [float(r["density"]) for r in parsed] == [r.density for r in rows]
        assert parsed[0]["box_dimension"] == "" and parsed[1]["box_dimension"] == "1.5"


def test_config(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# comment\nSEED = 111/111/111\nsched=2322  # inline\n\nsteps=12\n")
    assert read_config(p) == {"seed": "111/111/111", "sched": "2322", "steps": "12"}
    p.write_text("oops\n")
    with pytest.raises(ValueError):
        read_config(p)


def test_random_reachable_round_trip():
    rng = np.random.default_rng(11)
    for g in random_reachable(rng, 20):
        assert loads_snapshot(dumps_snapshot(g)) == g

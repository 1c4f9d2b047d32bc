import math

import numpy as np
import pytest

from conftest import grid_to_field
from oracle import rows_to_field, run
from modlap.analysis import density
from modlap.lattice import (DIAG, MOORE, GridState, ModulusSchedule, evolve, make_seed)
from modlap.structure import (all_binary_seeds, appendix_trace, detect_seed_copies,
                              first_step_template, is_d4_symmetric, reassemble,
                              sierpinski_report, verify_dissociation)

MOD2 = ModulusSchedule.constant(2)
SQUARE16 = {(0, 0), (16, 0), (0, 16), (16, 16)}


def at(pattern, i):
    return evolve(make_seed(pattern), DIAG, MOD2, i).final


class TestDetectCopies:
    def test_seed_itself(self):
        s = make_seed("110/011/001")
        rep = detect_seed_copies(s, s)
        assert rep.matched and rep.offsets == ((0, 0),) and rep.gap == math.inf

    def test_dissociated_all_ones(self):
        rep = detect_seed_copies(at("111/111/111", 8), make_seed("111/111/111"))
        assert rep.matched and rep.residue == 0
        assert set(rep.offsets) == {(-8, -8), (8, -8), (-8, 8), (8, 8)}
        assert rep.relative_offsets() == SQUARE16
        assert rep.gap == 13

    def test_spacing_four_at_two(self):
        rep = detect_seed_copies(at("111/111/111", 2), make_seed("111/111/111"))
        assert rep.matched and rep.relative_offsets() == {(0, 0), (4, 0), (0, 4), (4, 4)}

    def test_mismatch(self):
        rep = detect_seed_copies(at("111/111/111", 3), make_seed("111/111/111"))
        assert not rep.matched and rep.residue > 0

    def test_partial_copy_counts_residue(self):
        seed = make_seed("11")
        grid = GridState(np.array([[1, 1, 0, 0, 1]]), (0, 0))
        rep = detect_seed_copies(grid, seed)
        assert not rep.matched and rep.residue == 1 and rep.offsets == ((0, 0),)

    def test_soundness_reassembly(self):
        seed = make_seed("101/011/100")
        g = at("101/011/100", 16)
        rep = detect_seed_copies(g, seed)
        assert rep.matched
        assert reassemble(seed, rep.offsets, g).same_field(g)

    def test_empty_seed_rejected(self):
        with pytest.raises(ValueError):
            detect_seed_copies(make_seed("1"), GridState(np.zeros((1, 1)), (0, 0)))


class TestDissociation:
    def test_all_ones_two_periods(self):
        reps = verify_dissociation(make_seed("111/111/111"), 2)
        assert [r.iteration for r in reps] == [8, 16]
        assert all(r.matched and r.gap >= 13 for r in reps)

    def test_single_point_against_oracle(self):
        reps = verify_dissociation(make_seed("1"), 1)
        assert reps[0].matched and len(reps[0].offsets) == 4
        oracle = run(rows_to_field(["1"]), DIAG.offsets, [2] * 8)[-1]
        assert oracle == {(x, y): 1 for x in (-8, 8) for y in (-8, 8)}
        assert set(reps[0].offsets) == set(oracle)

    def test_strict_size(self):
        with pytest.raises(ValueError):
            verify_dissociation(make_seed("1111"), 1)
        with pytest.warns(UserWarning):
            verify_dissociation(make_seed("1111"), 1, strict=False)

    def test_bad_kmax(self):
        with pytest.raises(ValueError):
            verify_dissociation(make_seed("1"), 0)

    def test_other_neighborhood_is_explored_not_asserted(self):
        reps = verify_dissociation(make_seed("1"), 1, stencil=MOORE)
        assert reps[0].iteration == 8

    @pytest.mark.parametrize("pattern", ["111/111/111", "101/010/101", "100/000/000",
                                         "010/111/010", "110/000/011"])
    def test_offsets_and_density(self, pattern):
        rep = verify_dissociation(make_seed(pattern), 1)[0]
        assert rep.matched and rep.gap == 13 and rep.relative_offsets() == SQUARE16
        assert density(at(pattern, 8)) <= 36 / 361


def oracle_states(pattern, steps):
    return run(rows_to_field(pattern.split("/")), DIAG.offsets, [2] * steps)


class TestAppendixTrace:
    @pytest.mark.parametrize("pattern", ["111/111/111", "101/010/101", "100/000/000"])
    def test_all_entries_pass(self, pattern):
        entries = appendix_trace(make_seed(pattern))
        assert [e.step for e in entries] == ["F1", "F2", "F3", "F4"]
        assert all(e.passed for e in entries), entries

    @pytest.mark.parametrize("pattern", ["111/111/111", "101/010/101", "100/000/000"])
    def test_block_structure_by_oracle(self, pattern):
        seed = rows_to_field(pattern.split("/"))
        f2, f4 = oracle_states(pattern, 4)[2], oracle_states(pattern, 4)[4]
        for fk, shift in ((f2, 2), (f4, 4)):
            expected = {(x + sx, y + sy): 1 for (x, y) in seed
                        for sx in (-shift, shift) for sy in (-shift, shift)}
            assert fk == expected

    def test_template_matches_engine(self):
        for seed in list(all_binary_seeds())[::7]:
            f1 = evolve(seed, DIAG, MOD2, 1).final
            assert np.array_equal(f1.window(-2, -2, 2, 2), first_step_template(seed))

    def test_rejects_non_3x3(self):
        with pytest.raises(ValueError):
            appendix_trace(make_seed("11/11"))


class TestSymmetry:
    def test_basic(self):
        assert is_d4_symmetric(make_seed("101/010/101"))
        assert not is_d4_symmetric(make_seed("110/000/000"))
        assert not is_d4_symmetric(make_seed("11"))
        assert is_d4_symmetric(GridState(np.zeros((2, 2)), (0, 0)))

    def test_about_explicit_box(self):
        g = make_seed("100/000/000")
        assert is_d4_symmetric(g)
        assert not is_d4_symmetric(g, about=(-1, -1, 1, 1))


class TestSierpinski:
    def test_checkpoints(self):
        rep = sierpinski_report(make_seed("1"), DIAG, 5)
        assert [c.iteration for c in rep.checkpoints] == [1, 3, 7, 15, 31, 63]
        assert all(c.d4_symmetric for c in rep.checkpoints)

    def test_exact_counts_single_point(self):
        # at i = 2^(k+1)-1 the figure is every odd-odd cell of a (2i+1)-square
        g = evolve(make_seed("1"), DIAG, MOD2, 63).final
        field = grid_to_field(g)
        assert field == {(x, y): 1 for x in range(-63, 64, 2) for y in range(-63, 64, 2)}
        rep = sierpinski_report(make_seed("1"), DIAG, 5)
        assert rep.dimensions()[63] == pytest.approx(12 / 7)

    def test_asymmetric_seed(self):
        rep = sierpinski_report(make_seed("11/10"), DIAG, 4)
        later = [c for c in rep.checkpoints if c.iteration >= 3]
        assert not any(c.d4_symmetric for c in later)
        assert all(c.box_dimension is not None for c in later)

    def test_kmax_range(self):
        with pytest.raises(ValueError):
            sierpinski_report(make_seed("1"), DIAG, 7)


def test_all_binary_seeds():
    seeds = list(all_binary_seeds())
    assert len(seeds) == 511
    assert len({s.cells.tobytes() for s in seeds}) == 511
    assert all(s.cells.shape == (3, 3) for s in seeds)

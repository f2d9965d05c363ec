"""
Tests for the skyline fill and the initial solution.
"""

from app.models.instance import Instance, SolveStatus
from app.services.heuristic_service import Skyline, bin_fill, initial_solution, try_pack
from app.services.instance_service import verify_solution


class TestBinFill:

    def test_residual_bin(self):
        inst = Instance.from_dims(3, 10, [(3, 10)])
        packed, placement = bin_fill(inst.items, 3, 10)
        assert packed == [0]
        assert placement.coords[0] == (0, 0)

    def test_three_squares_only_one_fits(self, three_squares):
        packed, _ = bin_fill(three_squares.items, 10, 10)
        assert len(packed) == 1

    def test_big_and_two_small(self, one_big_two_small):
        packed, placement = bin_fill(one_big_two_small.items, 10, 10)
        assert packed == [0, 1, 2]
        assert placement.coords == {0: (0, 0), 1: (6, 0), 2: (6, 4)}

    def test_oversize_item_skipped(self):
        inst = Instance.from_dims(10, 10, [(4, 4)])
        packed, _ = bin_fill(inst.items, 3, 3)
        assert packed == []

    def test_skyline_merges_equal_segments(self):
        skyline = Skyline(10, 10)
        skyline.place(0, 5, 3)
        skyline.place(5, 5, 3)
        assert skyline.segments == [[0, 10, 3]]


class TestInitialSolution:

    def test_try_pack_tiling(self, two_halves):
        assert try_pack(two_halves.items, 10, 10) is not None

    def test_heuristic_solution_verifies(self, small_corpus):
        for inst in small_corpus:
            sol = initial_solution(inst)
            assert sol.status == SolveStatus.FEASIBLE
            assert sol.upper_bound == len(sol.bins)
            assert verify_solution(inst, sol).ok, inst

    def test_three_squares_three_bins(self, three_squares):
        sol = initial_solution(three_squares)
        assert sol.upper_bound == 3
        assert sol.lower_bound == 2

    def test_external_value(self, three_squares):
        sol = initial_solution(three_squares, u0=3)
        assert sol.external_bound
        assert sol.upper_bound == 3
        assert sol.bins == []

"""
Tests for the single-bin feasibility check.
"""

import random

import pytest

from app.models.instance import Instance, Placement
from app.models.search import Axis, OppVerdict
from app.services.instance_service import verify_placement
from app.services.opp_service import (
    YCheck,
    mim_positions,
    mim_threshold,
    normal_patterns,
    opp_brute_force,
    opp_check,
)


def _items(dims):
    return Instance.from_dims(max(w for w, _ in dims), max(h for _, h in dims), dims).items


def _valid(items, W, H, placement) -> bool:
    dims = {item.id: item.dims for item in items}
    return verify_placement(dims, W, H, dims.keys(), placement) is None


class TestPositionSets:

    def test_normal_patterns(self):
        items = _items([(3, 1), (4, 1)])
        assert normal_patterns(items, 10)[0] == [0, 4]

    def test_normal_single_item(self):
        assert normal_patterns(_items([(4, 4)]), 10) == {0: [0]}

    def test_normal_equal_sizes(self):
        assert normal_patterns(_items([(5, 1), (5, 1)]), 10) == {0: [0, 5], 1: [0, 5]}

    def test_normal_heights(self):
        items = _items([(1, 3), (1, 4)])
        assert normal_patterns(items, 10, Axis.HEIGHT)[1] == [0, 3]

    def test_mim_merges_mirror(self):
        positions = mim_positions(_items([(5, 1), (5, 1)]), 10, t=5)
        assert positions == {0: [0, 5], 1: [0, 5]}

    def test_mim_fixed_threshold(self):
        positions = mim_positions(_items([(3, 1), (4, 1)]), 10, t=4)
        assert positions[0] == [0, 7]

    def test_mim_single_item_best_threshold(self):
        items = _items([(4, 4)])
        assert mim_threshold(items, 10) == 7
        assert mim_positions(items, 10) == {0: [0]}

    def test_mim_ties_take_smaller_threshold(self):
        assert mim_threshold(_items([(5, 1), (5, 1)]), 10) == 1

    def test_mim_never_larger_than_normal(self):
        rng = random.Random(11)
        for _ in range(25):
            cap = rng.randint(5, 20)
            items = _items([(rng.randint(1, cap), 1) for _ in range(rng.randint(1, 6))])
            normal = normal_patterns(items, cap)
            mim = mim_positions(items, cap)
            assert sum(map(len, mim.values())) <= sum(map(len, normal.values()))
            for item in items:
                assert all(0 <= p <= cap - item.width for p in mim[item.id])


class TestYCheck:

    def test_stacked_pair(self):
        ys = YCheck(10, None).solve([(0, 0, 4, 5), (1, 2, 4, 5)])
        assert sorted(ys.values()) == [0, 5]

    def test_column_overflow(self):
        assert YCheck(10, None).solve([(0, 0, 4, 6), (1, 2, 4, 6)]) is None

    def test_disjoint_intervals_all_on_floor(self):
        ys = YCheck(10, None).solve([(0, 0, 4, 9), (1, 4, 4, 9)])
        assert ys == {0: 0, 1: 0}

    def test_bridge_item(self):
        rects = [(0, 0, 3, 4), (1, 5, 3, 4), (2, 2, 4, 6)]
        ys = YCheck(10, None).solve(rects)
        assert ys is not None
        placement = Placement(coords={j: (x, ys[j]) for j, x, _, _ in rects})
        dims = {j: (w, h) for j, _, w, h in rects}
        assert verify_placement(dims, 8, 10, dims.keys(), placement) is None

    def test_bridge_too_tall(self):
        assert YCheck(10, None).solve([(0, 0, 3, 5), (1, 5, 3, 4), (2, 2, 4, 6)]) is None


class TestOppCheck:

    def test_side_by_side(self, two_halves):
        result = opp_check(two_halves.items, 10, 10)
        assert result.verdict == OppVerdict.FEASIBLE
        assert sorted(x for x, _ in result.placement.coords.values()) == [0, 5]

    def test_three_squares_infeasible(self, three_squares):
        assert opp_check(three_squares.items, 10, 10).infeasible

    def test_two_squares_infeasible_by_search(self):
        items = Instance.from_dims(10, 10, [(6, 6), (6, 6)]).items
        assert opp_check(items, 10, 10).verdict == OppVerdict.INFEASIBLE

    def test_full_item(self):
        result = opp_check(Instance.from_dims(10, 10, [(10, 10)]).items, 10, 10)
        assert result.feasible
        assert result.placement.coords == {0: (0, 0)}

    def test_empty_set(self):
        assert opp_check([], 10, 10).feasible

    def test_oversize_item(self):
        items = Instance.from_dims(10, 10, [(10, 10)]).items
        assert opp_check(items, 9, 10).infeasible

    def test_agrees_with_brute_force(self):
        rng = random.Random(5)
        for _ in range(500):
            W, H = rng.randint(3, 8), rng.randint(3, 8)
            dims = [(rng.randint(1, W), rng.randint(1, H)) for _ in range(rng.randint(2, 5))]
            items = Instance.from_dims(W, H, dims).items
            fast = opp_check(items, W, H)
            exact = opp_brute_force(items, W, H)
            assert fast.verdict == exact.verdict, (W, H, dims)
            if fast.feasible:
                assert _valid(items, W, H, fast.placement), (W, H, dims)


class TestBruteForce:

    def test_three_squares(self, three_squares):
        assert opp_brute_force(three_squares.items, 10, 10).infeasible

    def test_big_and_two_small(self, one_big_two_small):
        result = opp_brute_force(one_big_two_small.items, 10, 10)
        assert result.feasible
        assert _valid(one_big_two_small.items, 10, 10, result.placement)

    def test_empty(self):
        assert opp_brute_force([], 10, 10).verdict == OppVerdict.FEASIBLE

    @pytest.mark.parametrize("dims", [[(5, 10), (5, 10)], [(3, 3)] * 4, [(2, 5), (3, 5), (5, 5)]])
    def test_tilings(self, dims):
        W = 10 if len(dims) == 2 else (6 if len(dims) == 4 else 5)
        H = 10 if len(dims) == 2 else (6 if len(dims) == 4 else 10)
        items = Instance.from_dims(W, H, dims).items
        assert opp_brute_force(items, W, H).feasible

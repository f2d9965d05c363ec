"""
Tests for bin shrinking, item enlarging and fixing/removal.
"""

import random

import pytest

from app.models.instance import Instance
from app.models.search import BinContext
from app.services.heuristic_service import initial_solution
from app.services.instance_service import verify_bins
from app.services.master_service import brute_force_optimum
from app.services.preprocess_service import (
    enlarge_items,
    fix_and_remove,
    max_reachable,
    per_bin_reduce,
    preprocess_report,
    reduce_dimensions,
    replay,
    restore,
    shrink_bin,
)


class TestDimensionReduction:

    @pytest.mark.parametrize(
        "values,cap,expected",
        [([3, 4], 10, 7), ([], 9, 0), ([5, 5], 10, 10), ([11], 10, 0)],
    )
    def test_max_reachable(self, values, cap, expected):
        assert max_reachable(values, cap) == expected

    def test_shrink_widths(self):
        inst = Instance.from_dims(10, 10, [(3, 1), (4, 1)])
        assert shrink_bin(inst)[0] == 7

    def test_shrink_identity(self):
        inst = Instance.from_dims(10, 10, [(10, 2)])
        assert shrink_bin(inst)[0] == 10

    def test_shrink_heights(self, three_squares):
        assert shrink_bin(three_squares)[1] == 6

    def test_enlarge_wide_item(self):
        inst = Instance.from_dims(10, 10, [(6, 1), (3, 1)])
        lifted = enlarge_items(inst)
        assert lifted[0][0] == 7
        # the companion sees the enlarged width, so the pair still fits side by side
        assert lifted[1][0] == 3
        assert lifted[0][0] + lifted[1][0] <= 10

    def test_enlarge_keeps_side_by_side_rows(self):
        inst = Instance.from_dims(10, 10, [(10, 3), (2, 8), (5, 3), (2, 9)])
        lifted = enlarge_items(inst)
        assert [lifted[j][0] for j in range(4)] == [10, 3, 5, 2]
        assert lifted[1][0] + lifted[2][0] + lifted[3][0] <= 10

    def test_enlarge_single_item(self):
        inst = Instance.from_dims(10, 10, [(4, 4)])
        assert enlarge_items(inst)[0] == (10, 10)

    def test_enlarge_exact_companion(self):
        inst = Instance.from_dims(10, 10, [(5, 2), (5, 2)])
        lifted = enlarge_items(inst)
        assert lifted[0][0] == 5
        assert lifted[1][0] == 5

    def test_reduce_dimensions_fixpoint(self, small_corpus):
        for inst in small_corpus:
            reduced = reduce_dimensions(inst)
            assert reduce_dimensions(reduced).dims == reduced.dims
            assert reduced.W <= inst.W and reduced.H <= inst.H
            for old, new in zip(inst.dims, reduced.dims):
                assert new[0] >= old[0] and new[1] >= old[1]

    def test_per_bin_singleton(self):
        inst = Instance.from_dims(10, 10, [(6, 6), (3, 3)])
        ctx = per_bin_reduce(inst, [BinContext(index=0, allowed=frozenset({0}))])[0]
        assert (ctx.W, ctx.H) == (6, 6)
        assert ctx.widths == {0: 6}

    def test_per_bin_pair(self):
        inst = Instance.from_dims(10, 10, [(6, 6), (3, 3)])
        ctx = per_bin_reduce(inst, [BinContext(index=0, allowed=frozenset({0, 1}))])[0]
        assert ctx.W == 9
        assert ctx.widths[0] == 6


class TestFixAndRemove:

    def test_wide_item_with_strip_companion(self):
        inst = Instance.from_dims(10, 10, [(7, 10), (3, 10)])
        reduced, record = fix_and_remove(inst)
        assert reduced.n == 0
        assert record.fixed_full_bins == 1
        assert record.removed_items == [(1, "wide")]

        bins = restore(record, [])
        assert len(bins) == 1
        assert verify_bins(inst, bins).ok

    def test_incompatible_squares_fixed(self):
        inst = Instance.from_dims(10, 10, [(6, 6), (6, 6)])
        reduced, record = fix_and_remove(inst)
        assert reduced.n == 0
        assert record.fixed_full_bins == 2
        assert verify_bins(inst, restore(record, [])).ok

    def test_small_items_untouched(self):
        inst = Instance.from_dims(10, 10, [(2, 2), (3, 3)])
        reduced, record = fix_and_remove(inst, reduce=False)
        assert reduced.dims == [(2, 2), (3, 3)]
        assert (reduced.W, reduced.H) == (10, 10)
        assert record.removed_count == 0

    def test_replay_reproduces_reduced(self, small_corpus):
        for inst in small_corpus:
            reduced, record = fix_and_remove(inst)
            again = replay(inst, record)
            assert again.dims == reduced.dims
            assert (again.W, again.H) == (reduced.W, reduced.H)

    def test_restore_keeps_packings_valid(self, small_corpus):
        for inst in small_corpus:
            reduced, record = fix_and_remove(inst)
            bins = initial_solution(reduced).bins
            restored = restore(record, bins)
            assert len(restored) == len(bins) + record.fixed_full_bins
            result = verify_bins(inst, restored)
            assert result.ok, (inst, result.violation)

    def test_report(self):
        report = preprocess_report(Instance.from_dims(10, 10, [(7, 10), (3, 10)]))
        assert report.remaining == 0
        assert report.removed_pct == 100.0
        payload = report.to_dict()
        assert payload["removed_items"] == [{"id": 1, "rule": "wide"}]
        assert payload["fixed_bins"] == 1


class TestOptimumPreserved:

    @staticmethod
    def _corpus(seed: int, count: int):
        rng = random.Random(seed)
        for _ in range(count):
            W, H = rng.randint(4, 10), rng.randint(4, 10)
            dims = [(rng.randint(1, W), rng.randint(1, H)) for _ in range(rng.randint(1, 6))]
            yield Instance.from_dims(W, H, dims)

    @pytest.mark.parametrize(
        "dims,optimum",
        [
            ([(10, 3), (2, 8), (5, 3), (2, 9)], 2),
            ([(1, 4), (3, 7), (10, 10)], 2),
            ([(6, 1), (3, 1)], 1),
        ],
    )
    def test_known_optimum(self, dims, optimum):
        inst = Instance.from_dims(10, 10, dims)
        reduced, record = fix_and_remove(inst)
        reduced_optimum, bins = brute_force_optimum(reduced)
        assert reduced_optimum + record.fixed_full_bins == optimum
        assert verify_bins(inst, restore(record, bins)).ok

    def test_matches_brute_force(self):
        for inst in self._corpus(seed=77, count=150):
            optimum, _ = brute_force_optimum(inst)
            reduced, record = fix_and_remove(inst)
            reduced_optimum, bins = brute_force_optimum(reduced)
            assert reduced_optimum + record.fixed_full_bins == optimum, inst.dims
            assert verify_bins(inst, restore(record, bins)).ok

    def test_dimension_reduction_alone(self):
        for inst in self._corpus(seed=78, count=150):
            assert brute_force_optimum(reduce_dimensions(inst))[0] == brute_force_optimum(inst)[0], inst.dims

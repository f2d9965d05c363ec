"""
Tests for MIS reduction, cut lifting and the cut pool.
"""

import itertools
import random

import pytest

from app.models.instance import Instance
from app.models.search import BinContext, Cut, OppVerdict
from app.services.cut_service import CheckMemo, CutPool, find_mis, lift_cut, separate, ukp_value
from app.services.opp_service import opp_brute_force


def _feasible_subsets(inst: Instance):
    for r in range(1, inst.n + 1):
        for subset in itertools.combinations(range(inst.n), r):
            if opp_brute_force([inst.items[j] for j in subset], inst.W, inst.H).feasible:
                yield subset


class TestCheckMemo:

    def test_hit_on_same_sizes_other_ids(self):
        memo = CheckMemo()
        inst = Instance.from_dims(10, 10, [(5, 10), (6, 6), (5, 10)])
        first = memo.check([inst.items[0], inst.items[1]], 10, 10)
        second = memo.check([inst.items[2], inst.items[1]], 10, 10)
        assert first.verdict == second.verdict
        assert memo.hits == 1
        assert memo.calls == 1
        assert len(memo) == 1

    def test_cached_placement_uses_new_ids(self):
        memo = CheckMemo()
        inst = Instance.from_dims(10, 10, [(5, 10), (5, 10), (5, 10)])
        memo.check([inst.items[0], inst.items[1]], 10, 10)
        result = memo.check([inst.items[1], inst.items[2]], 10, 10)
        assert result.feasible
        assert set(result.placement.coords) == {1, 2}
        assert sorted(x for x, _ in result.placement.coords.values()) == [0, 5]


class TestFindMis:

    def test_three_squares_reduce_to_pair(self, three_squares):
        found = find_mis([0, 1, 2], three_squares.items, 10, 10)
        assert found == [frozenset({1, 2})]

    def test_minimal_set_returned_whole(self):
        inst = Instance.from_dims(10, 10, [(6, 6), (6, 6)])
        assert find_mis([0, 1], inst.items, 10, 10) == [frozenset({0, 1})]

    def test_forced_item_kept(self, three_squares):
        ctx = BinContext(index=0, allowed=frozenset({0, 1, 2}), forced=0)
        found = find_mis([0, 1, 2], three_squares.items, 10, 10, ctx=ctx)
        assert all(0 in subset for subset in found)

    def test_randomized_passes_deduplicated(self, three_squares):
        found = find_mis([0, 1, 2], three_squares.items, 10, 10, gamma=2, seed=4)
        assert 1 <= len(found) <= 3
        assert len(set(found)) == len(found)
        for subset in found:
            assert opp_brute_force([three_squares.items[j] for j in subset], 10, 10).infeasible

    def test_first_pass_minimal(self):
        rng = random.Random(9)
        for _ in range(20):
            inst = Instance.from_dims(8, 8, [(rng.randint(3, 8), rng.randint(3, 8)) for _ in range(5)])
            all_items = list(range(inst.n))
            if not opp_brute_force(inst.items, 8, 8).infeasible:
                continue
            (mis,) = find_mis(all_items, inst.items, 8, 8, exhaustive=True)
            assert opp_brute_force([inst.items[j] for j in mis], 8, 8).infeasible
            for j in mis:
                rest = [inst.items[k] for k in mis if k != j]
                assert opp_brute_force(rest, 8, 8).feasible


class TestLifting:

    def test_ukp_empty_set(self):
        dims = {0: (6, 6)}
        assert ukp_value({}, dims, 0, 10, 10) == pytest.approx(0.0)

    def test_ukp_small_items(self):
        dims = {0: (2, 2), 1: (2, 2)}
        assert ukp_value({0: 1.0}, dims, 1, 10, 10) == pytest.approx(1.0)

    def test_ukp_three_squares_below_one(self):
        dims = {j: (6, 6) for j in range(4)}
        value = ukp_value({0: 1.0, 1: 1.0, 2: 1.0}, dims, 3, 10, 10)
        assert 0.0 <= value < 1.0

    def test_ukp_rejects_profit_on_forced(self):
        with pytest.raises(ValueError):
            ukp_value({0: 1.0}, {0: (2, 2)}, 0, 10, 10)

    def test_lift_pair_of_squares(self, three_squares):
        cut = lift_cut([0, 1], three_squares.items, 10, 10)
        assert cut.rhs == 1
        assert cut.coefficients == {2: 1}
        assert cut.scope is None

    def test_small_item_not_lifted(self):
        inst = Instance.from_dims(10, 10, [(6, 6), (6, 6), (1, 1)])
        cut = lift_cut([0, 1], inst.items, 10, 10)
        assert cut.coefficients == {}

    def test_no_candidates(self):
        inst = Instance.from_dims(10, 10, [(6, 6), (6, 6)])
        cut = lift_cut([0, 1], inst.items, 10, 10)
        assert cut == Cut(base=frozenset({0, 1}))

    def test_excluded_item_makes_cut_local(self, three_squares):
        ctx = BinContext(index=1, allowed=frozenset({0, 1}))
        cut = lift_cut([0, 1], three_squares.items, 10, 10, ctx=ctx)
        assert cut.scope == 1
        assert cut.coefficients == {}

    def test_lifted_cuts_are_valid(self):
        rng = random.Random(13)
        checked = 0
        for _ in range(1000):
            if checked == 200:
                break
            W, H = rng.randint(5, 9), rng.randint(5, 9)
            inst = Instance.from_dims(W, H, [(rng.randint(2, W), rng.randint(2, H)) for _ in range(6)])
            if not opp_brute_force(inst.items, W, H).infeasible:
                continue
            mis = find_mis(list(range(inst.n)), inst.items, W, H)[0]
            cut = lift_cut(mis, inst.items, W, H)
            for subset in _feasible_subsets(inst):
                assert cut.is_satisfied_by(subset), (inst.dims, cut, subset)
            checked += 1
        assert checked == 200


class TestCutPool:

    def test_dedupe_and_version(self):
        pool = CutPool()
        assert pool.add(Cut(base=frozenset({0, 1}), coefficients={2: 1}))
        assert not pool.add(Cut(base=frozenset({1, 0}), coefficients={2: 1}))
        assert pool.add(Cut(base=frozenset({0, 1}), scope=3))
        assert len(pool) == 2
        assert pool.version == 2

    def test_matrix(self):
        pool = CutPool()
        pool.add(Cut(base=frozenset({0, 1}), coefficients={2: 1}))
        pool.add(Cut(base=frozenset({1, 2, 3}), scope=1))
        coef, rhs, scope = pool.matrix(4)
        assert coef.tolist() == [[1, 1, 1, 0], [0, 1, 1, 1]]
        assert rhs.tolist() == [1, 2]
        assert scope.tolist() == [-1, 1]


class TestSeparate:

    def test_global_cut_for_open_bin(self, three_squares):
        result = separate([0, 1, 2], three_squares.items, 10, 10)
        assert len(result.cuts) == 1
        assert result.cuts[0].scope is None

    def test_local_cut_comes_with_global_cover(self, three_squares):
        ctx = BinContext(index=0, allowed=frozenset({0, 1}), forced=0)
        result = separate([0, 1], three_squares.items, 10, 10, ctx=ctx)
        scopes = sorted((cut.scope is None) for cut in result.cuts)
        assert scopes == [False, True]
        assert all(cut.base == frozenset({0, 1}) for cut in result.cuts)

    def test_empty_memo_is_filled(self, three_squares):
        memo = CheckMemo()
        assert len(memo) == 0
        separate([0, 1, 2], three_squares.items, 10, 10, memo=memo)
        assert memo.calls > 0
        assert len(memo) > 0

    def test_memo_shared_across_calls(self, three_squares):
        memo = CheckMemo()
        separate([0, 1, 2], three_squares.items, 10, 10, memo=memo)
        calls = memo.calls
        separate([0, 1, 2], three_squares.items, 10, 10, memo=memo)
        assert memo.calls == calls
        assert memo.hits > 0
        assert all(v[0] != OppVerdict.TIMEOUT for v in memo._store.values())

"""
Property suites over generated instances.
"""

import itertools

from hypothesis import given, settings, strategies as st

from app.models.instance import Instance
from app.services.dff_service import f0, f2, l0
from app.services.instance_service import continuous_bound, parse_instance, serialize_instance
from app.services.lp_service import knapsack_01
from app.services.master_service import MasterConfig, brute_force_optimum, solve
from app.services.opp_service import opp_brute_force, opp_check


@st.composite
def instances(draw, max_items: int = 5, max_side: int = 9):
    W = draw(st.integers(min_value=3, max_value=max_side))
    H = draw(st.integers(min_value=3, max_value=max_side))
    dims = draw(st.lists(
        st.tuples(st.integers(min_value=1, max_value=W), st.integers(min_value=1, max_value=H)),
        min_size=1,
        max_size=max_items,
    ))
    return Instance.from_dims(W, H, dims)


FAST = MasterConfig(time_limit=60.0, alpha=10, beta=10, eta=2)


@given(instances(max_items=8), st.randoms())
def test_continuous_bound_ignores_order(inst, rnd):
    dims = list(inst.dims)
    rnd.shuffle(dims)
    assert continuous_bound(Instance.from_dims(inst.W, inst.H, dims)) == continuous_bound(inst)


@given(instances(max_items=8), st.sampled_from(["native", "2bp"]), st.sampled_from(["wh", "hw"]))
def test_serialized_instance_reads_back(inst, fmt, order):
    back = parse_instance(serialize_instance(inst, fmt, order), fmt, order)
    assert (back.W, back.H) == (inst.W, inst.H)
    assert back.dims == inst.dims


@given(st.integers(min_value=2, max_value=30), st.data())
def test_dff_keeps_feasible_sets_feasible(C, data):
    k = data.draw(st.integers(min_value=1, max_value=C // 2))
    sizes = data.draw(st.lists(st.integers(min_value=0, max_value=C), max_size=6))
    if sum(sizes) > C:
        return
    assert sum(f0(k, C, x) for x in sizes) <= f0(k, C, C)
    assert sum(f2(k, C, x) for x in sizes) <= f2(k, C, C)


@given(
    st.lists(st.tuples(st.integers(min_value=1, max_value=9), st.integers(min_value=0, max_value=9)), max_size=7),
    st.integers(min_value=0, max_value=25),
)
def test_knapsack_matches_enumeration(pairs, capacity):
    weights = [w for w, _ in pairs]
    profits = [float(p) for _, p in pairs]
    value, chosen = knapsack_01(weights, capacity, profits)
    best = max(
        sum(profits[i] for i in subset)
        for r in range(len(pairs) + 1)
        for subset in itertools.combinations(range(len(pairs)), r)
        if sum(weights[i] for i in subset) <= capacity
    )
    assert abs(value - best) < 1e-9
    assert sum(weights[i] for i in chosen) <= capacity


@settings(max_examples=500, deadline=None)
@given(instances(max_items=5, max_side=8))
def test_opp_check_matches_brute_force(inst):
    assert opp_check(inst.items, inst.W, inst.H).verdict == opp_brute_force(inst.items, inst.W, inst.H).verdict


@settings(max_examples=25, deadline=None)
@given(instances(max_items=5, max_side=8), st.randoms())
def test_solve_value_ignores_item_order(inst, rnd):
    optimum, _ = brute_force_optimum(inst)
    dims = list(inst.dims)
    rnd.shuffle(dims)
    shuffled = Instance.from_dims(inst.W, inst.H, dims)
    assert l0(inst, eta=2) <= optimum
    assert solve(inst, FAST).upper_bound == optimum
    assert solve(shuffled, FAST).upper_bound == optimum

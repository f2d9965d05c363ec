"""
OPP Checker Service

Decides whether a set of items fits into one W x H bin.

The check is a two-level search. The x-master assigns each item an
x-coordinate from its meet-in-the-middle position set, keeping the
stacked height of every unit column within H. The y-check then decides
whether the fixed x-intervals admit y-coordinates; when they do not, the
conflicting assignment is reduced and stored as a no-good for the
x-master.
"""

import logging
import time
from itertools import product
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.models.instance import Item, Placement
from app.models.search import Axis, OppResult, OppVerdict, PositionSet
from app.services.heuristic_service import try_pack
from app.services.preprocess_service import subset_sums

logger = logging.getLogger(__name__)


class _Timeout(Exception):
    pass


def _bits_to_list(bits: int) -> List[int]:
    out = []
    position = 0
    while bits:
        if bits & 1:
            out.append(position)
        bits >>= 1
        position += 1
    return out


def _sizes(items: Sequence[Item], axis: Axis) -> List[int]:
    return [item.width if axis == Axis.WIDTH else item.height for item in items]


def _normal_bits(sizes: Sequence[int], cap: int) -> List[int]:
    """Per item, bitset of subset sums of the other items that leave room for it."""
    bits = []
    for j, size in enumerate(sizes):
        others = list(sizes[:j]) + list(sizes[j + 1:])
        bits.append(subset_sums(others, cap - size))
    return bits


def normal_patterns(items: Sequence[Item], cap: int, axis: Axis = Axis.WIDTH) -> PositionSet:
    """Normal positions: subset sums of the other items' sizes, at most cap - size."""
    sizes = _sizes(items, axis)
    return {item.id: _bits_to_list(bits) for item, bits in zip(items, _normal_bits(sizes, cap))}


def _mim_counts(sizes: Sequence[int], cap: int, normal: Sequence[List[int]]) -> np.ndarray:
    """Total position count for every threshold t in 1..cap."""
    totals = np.zeros(cap + 1, dtype=np.int64)
    for size, positions in zip(sizes, normal):
        left = np.zeros(cap + 2, dtype=np.int64)
        right = np.zeros(cap + 2, dtype=np.int64)
        for p in positions:
            left[p + 1] += 1  # p counts for every t > p
            right[cap - size - p] += 1
        left_counts = np.cumsum(left)[: cap + 1]
        right_counts = np.cumsum(right[::-1])[::-1][: cap + 1]
        totals += left_counts + right_counts
    totals[0] = np.iinfo(np.int64).max
    return totals


def mim_threshold(items: Sequence[Item], cap: int, axis: Axis = Axis.WIDTH) -> int:
    """Threshold minimizing the total number of positions; ties go to the smaller t."""
    sizes = _sizes(items, axis)
    normal = [_bits_to_list(bits) for bits in _normal_bits(sizes, cap)]
    return int(np.argmin(_mim_counts(sizes, cap, normal)))


def mim_positions(items: Sequence[Item], cap: int, axis: Axis = Axis.WIDTH, t: Optional[int] = None) -> PositionSet:
    """
    Meet-in-the-middle positions: left-aligned normal positions below t
    plus mirrored right-aligned normal positions at or above t.
    When t is omitted the best threshold is used.
    """
    sizes = _sizes(items, axis)
    normal = [_bits_to_list(bits) for bits in _normal_bits(sizes, cap)]
    if t is None:
        t = int(np.argmin(_mim_counts(sizes, cap, normal))) if items else 1
    positions = {}
    for item, size, candidates in zip(items, sizes, normal):
        left = {p for p in candidates if p < t}
        right = {cap - size - p for p in candidates if cap - size - p >= t}
        positions[item.id] = sorted(left | right)
    return positions


class YCheck:
    """
    Decides whether items with fixed x-intervals can be given y-coordinates.
    Items are dropped one at a time in non-decreasing y order onto the
    current column profile; failed states are memoized.
    """

    def __init__(self, H: int, deadline: Optional[float]):
        self.H = H
        self.deadline = deadline
        self.cache: Dict[FrozenSet[Tuple[int, int]], Optional[Dict[int, int]]] = {}
        self.nodes = 0

    def solve(self, rects: Sequence[Tuple[int, int, int, int]]) -> Optional[Dict[int, int]]:
        """rects are (id, x, w, h); returns id -> y or None when infeasible."""
        key = frozenset((r[0], r[1]) for r in rects)
        if key in self.cache:
            return self.cache[key]
        result: Optional[Dict[int, int]] = {}
        for component in _components(rects):
            ys = self._solve_component(component)
            if ys is None:
                result = None
                break
            result.update(ys)
        self.cache[key] = result
        return result

    def _solve_component(self, rects: Sequence[Tuple[int, int, int, int]]) -> Optional[Dict[int, int]]:
        if len(rects) == 1:
            return {rects[0][0]: 0} if rects[0][3] <= self.H else None
        start = min(r[1] for r in rects)
        span = max(r[1] + r[2] for r in rects) - start
        local = [(r[0], r[1] - start, r[2], r[3]) for r in rects]
        coverage = np.zeros((len(local), span), dtype=np.int64)
        for k, (_, x, w, h) in enumerate(local):
            coverage[k, x:x + w] = h
        if coverage.sum(axis=0).max() > self.H:
            return None

        profile = np.zeros(span, dtype=np.int64)
        ys: Dict[int, int] = {}
        failed = set()
        full = (1 << len(local)) - 1

        def search(mask: int, y_last: int) -> bool:
            self.nodes += 1
            if mask == full:
                return True
            if self.deadline is not None and self.nodes % 256 == 0 and time.perf_counter() > self.deadline:
                raise _Timeout()
            state = (mask, y_last, profile.tobytes())
            if state in failed:
                return False

            remaining = [k for k in range(len(local)) if not mask >> k & 1]
            floor = np.maximum(profile, y_last)
            if (floor + coverage[remaining].sum(axis=0)).max() > self.H:
                failed.add(state)
                return False

            drops = []
            for k in remaining:
                _, x, w, h = local[k]
                drop = int(profile[x:x + w].max())
                if max(drop, y_last) + h > self.H:
                    failed.add(state)
                    return False
                if drop >= y_last:
                    drops.append((drop, -h, -w, k))
            drops.sort()

            for drop, _, _, k in drops:
                _, x, w, h = local[k]
                saved = profile[x:x + w].copy()
                profile[x:x + w] = drop + h
                ys[local[k][0]] = drop
                if search(mask | (1 << k), drop):
                    return True
                profile[x:x + w] = saved
                del ys[local[k][0]]
            failed.add(state)
            return False

        return dict(ys) if search(0, 0) else None


def _components(rects: Sequence[Tuple[int, int, int, int]]) -> List[List[Tuple[int, int, int, int]]]:
    """Connected components of the x-interval overlap graph."""
    ordered = sorted(rects, key=lambda r: (r[1], r[1] + r[2]))
    components: List[List[Tuple[int, int, int, int]]] = []
    reach = -1
    for rect in ordered:
        if components and rect[1] < reach:
            components[-1].append(rect)
            reach = max(reach, rect[1] + rect[2])
        else:
            components.append([rect])
            reach = rect[1] + rect[2]
    return components


class OppChecker:
    """One feasibility check; not reusable across calls."""

    def __init__(self, items: Sequence[Item], W: int, H: int, time_limit: Optional[float]):
        self.items = list(items)
        self.W = W
        self.H = H
        self.started = time.perf_counter()
        self.deadline = None if time_limit is None else self.started + time_limit
        self.ycheck = YCheck(H, self.deadline)
        self.nodes = 0

    def _result(self, verdict: OppVerdict, placement: Optional[Placement] = None) -> OppResult:
        return OppResult(
            verdict=verdict,
            placement=placement,
            nodes=self.nodes + self.ycheck.nodes,
            seconds=time.perf_counter() - self.started,
        )

    def run(self) -> OppResult:
        if not self.items:
            return self._result(OppVerdict.FEASIBLE, Placement())
        if any(item.width > self.W or item.height > self.H for item in self.items):
            return self._result(OppVerdict.INFEASIBLE)
        if sum(item.area for item in self.items) > self.W * self.H:
            return self._result(OppVerdict.INFEASIBLE)

        placement = try_pack(self.items, self.W, self.H)
        if placement is not None:
            return self._result(OppVerdict.FEASIBLE, placement)

        try:
            found = self._search()
        except _Timeout:
            logger.debug(f"⚠️ OPP check timed out after {self.nodes} nodes")
            return self._result(OppVerdict.TIMEOUT)
        if found is None:
            return self._result(OppVerdict.INFEASIBLE)
        return self._result(OppVerdict.FEASIBLE, found)

    def _search(self) -> Optional[Placement]:
        items = sorted(self.items, key=lambda i: (-i.area, -i.width, -i.height, i.id))
        n = len(items)
        domains = mim_positions(items, self.W, Axis.WIDTH)
        widths = [i.width for i in items]
        heights = [i.height for i in items]
        ids = [i.id for i in items]
        twin = [k > 0 and items[k - 1].dims == items[k].dims for k in range(n)]
        domain_arrays = [np.asarray(domains[i.id], dtype=np.int64) for i in items]

        loads = np.zeros(self.W, dtype=np.int64)
        xs: List[int] = [-1] * n
        nogoods: Dict[Tuple[int, int], List[Tuple[Tuple[int, int], ...]]] = {}

        def blocked(k: int, x: int) -> bool:
            for nogood in nogoods.get((k, x), ()):
                if all(xs[j] == xj for j, xj in nogood if j != k):
                    return True
            return False

        def forward_ok(start: int) -> bool:
            windows: Dict[int, np.ndarray] = {}
            for u in range(start, n):
                w = widths[u]
                if w not in windows:
                    windows[w] = sliding_window_view(loads, w).max(axis=1)
                if not np.any(windows[w][domain_arrays[u]] + heights[u] <= self.H):
                    return False
            return True

        def rects(members: Sequence[int]) -> List[Tuple[int, int, int, int]]:
            return [(j, xs[j], widths[j], heights[j]) for j in members]

        def component_of(k: int) -> List[int]:
            assigned = [j for j in range(n) if xs[j] >= 0]
            seen = {k}
            frontier = [k]
            while frontier:
                a = frontier.pop()
                for b in assigned:
                    if b not in seen and xs[a] < xs[b] + widths[b] and xs[b] < xs[a] + widths[a]:
                        seen.add(b)
                        frontier.append(b)
            return sorted(seen)

        def learn(members: List[int]) -> None:
            core = list(members)
            for j in sorted(members, key=lambda j: (widths[j] * heights[j], j)):
                trial = [m for m in core if m != j]
                if len(trial) >= 2 and self.ycheck.solve(rects(trial)) is None:
                    core = trial
            nogood = tuple((j, xs[j]) for j in core)
            for pair in nogood:
                nogoods.setdefault(pair, []).append(nogood)

        def search(k: int) -> bool:
            self.nodes += 1
            if self.deadline is not None and self.nodes % 64 == 0 and time.perf_counter() > self.deadline:
                raise _Timeout()
            if k == n:
                return True
            w, h = widths[k], heights[k]
            for x in domains[ids[k]]:
                if twin[k] and x < xs[k - 1]:
                    continue
                if loads[x:x + w].max() + h > self.H:
                    continue
                if blocked(k, x):
                    continue
                loads[x:x + w] += h
                xs[k] = x
                ok = forward_ok(k + 1)
                if ok:
                    members = component_of(k)
                    if len(members) > 1 and self.ycheck.solve(rects(members)) is None:
                        learn(members)
                        ok = False
                if ok and search(k + 1):
                    return True
                loads[x:x + w] -= h
                xs[k] = -1
            return False

        if not search(0):
            return None

        ys = self.ycheck.solve(rects(range(n)))
        if ys is None:
            return None
        return Placement(coords={ids[k]: (xs[k], ys[k]) for k in range(n)})


def opp_check(items: Sequence[Item], W: int, H: int, time_limit: Optional[float] = None) -> OppResult:
    """
    Decide whether items fit into one W x H bin.

    Returns:
        OppResult: Feasible with a placement, Infeasible after exhaustive
        search, or Timeout when time_limit elapses first
    """
    return OppChecker(items, W, H, time_limit).run()


def opp_brute_force(items: Sequence[Item], W: int, H: int) -> OppResult:
    """Exhaustive search over normal (x, y) coordinates. Exact, for small sets only."""
    started = time.perf_counter()
    if not items:
        return OppResult(OppVerdict.FEASIBLE, Placement(), 0, 0.0)
    if any(item.width > W or item.height > H for item in items):
        return OppResult(OppVerdict.INFEASIBLE, None, 0, time.perf_counter() - started)

    ordered = sorted(items, key=lambda i: (-i.area, -i.width, i.id))
    xs = normal_patterns(ordered, W, Axis.WIDTH)
    ys = normal_patterns(ordered, H, Axis.HEIGHT)
    candidates = [list(product(xs[i.id], ys[i.id])) for i in ordered]
    placed: List[Tuple[int, int, int, int]] = []
    nodes = 0

    def free(x: int, y: int, w: int, h: int) -> bool:
        return all(not (x < px + pw and px < x + w and y < py + ph and py < y + h) for px, py, pw, ph in placed)

    def search(k: int) -> bool:
        nonlocal nodes
        nodes += 1
        if k == len(ordered):
            return True
        item = ordered[k]
        for x, y in candidates[k]:
            if k > 0 and ordered[k - 1].dims == item.dims and (x, y) < placed[-1][:2]:
                continue
            if not free(x, y, item.width, item.height):
                continue
            placed.append((x, y, item.width, item.height))
            if search(k + 1):
                return True
            placed.pop()
        return False

    if search(0):
        coords = {item.id: (x, y) for item, (x, y, _, _) in zip(ordered, placed)}
        return OppResult(OppVerdict.FEASIBLE, Placement(coords=coords), nodes, time.perf_counter() - started)
    return OppResult(OppVerdict.INFEASIBLE, None, nodes, time.perf_counter() - started)

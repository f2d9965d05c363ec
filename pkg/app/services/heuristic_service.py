"""
Heuristic Start Service

Skyline bottom-left fill for single bins and the first-fit-decreasing
initial solution that provides U0.
"""

import logging
from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple

from app.models.instance import Instance, Item, PackedBin, Placement, Solution, SolveStatus

logger = logging.getLogger(__name__)


class Skyline:
    """
    Upper contour of a partially filled bin, as contiguous
    (x_start, width, height) segments spanning [0, W).
    """

    def __init__(self, W: int, H: int):
        self.W = W
        self.H = H
        self.segments: List[List[int]] = [[0, W, 0]]

    def find_position(self, w: int, h: int) -> Optional[Tuple[int, int]]:
        """Lowest, then leftmost, segment start where a w x h item fits."""
        best = None
        for index, (x, _, _) in enumerate(self.segments):
            if x + w > self.W:
                break
            y = 0
            reach = x + w
            k = index
            while k < len(self.segments) and self.segments[k][0] < reach:
                y = max(y, self.segments[k][2])
                k += 1
            if y + h > self.H:
                continue
            if best is None or (y, x) < best:
                best = (y, x)
        if best is None:
            return None
        return best[1], best[0]

    def place(self, x: int, w: int, top: int) -> None:
        """Raise the contour over [x, x + w) to top."""
        end = x + w
        updated = []
        for sx, sw, sh in self.segments:
            se = sx + sw
            if se <= x or sx >= end:
                updated.append([sx, sw, sh])
                continue
            if sx < x:
                updated.append([sx, x - sx, sh])
            if se > end:
                updated.append([end, se - end, sh])
        updated.append([x, w, top])
        updated.sort(key=lambda s: s[0])

        merged = [updated[0]]
        for segment in updated[1:]:
            if segment[2] == merged[-1][2]:
                merged[-1][1] += segment[1]
            else:
                merged.append(segment)
        self.segments = merged


def bin_fill(items: Sequence[Item], W: int, H: int) -> Tuple[List[int], Placement]:
    """
    Place items in the given order at the lowest-then-leftmost skyline
    position where each fits. Items that do not fit are skipped.

    Returns:
        Tuple[List[int], Placement]: ids actually placed and their coordinates
    """
    skyline = Skyline(W, H)
    packed: List[int] = []
    coords: Dict[int, Tuple[int, int]] = {}
    for item in items:
        if item.width > W or item.height > H:
            continue
        position = skyline.find_position(item.width, item.height)
        if position is None:
            continue
        x, y = position
        skyline.place(x, item.width, y + item.height)
        packed.append(item.id)
        coords[item.id] = (x, y)
    return packed, Placement(coords=coords)


def _height_order(items: Sequence[Item]) -> List[Item]:
    return sorted(items, key=lambda item: (-item.height, -item.width, item.id))


def try_pack(items: Sequence[Item], W: int, H: int) -> Optional[Placement]:
    """Placement of all items via bin_fill, trying a few orders, or None."""
    orders = (
        _height_order(items),
        sorted(items, key=lambda item: (-item.width, -item.height, item.id)),
        sorted(items, key=lambda item: (-item.area, -item.height, item.id)),
    )
    for order in orders:
        packed, placement = bin_fill(order, W, H)
        if len(packed) == len(items):
            return placement
    return None


class HeuristicStart:
    """First-fit decreasing over skyline-filled bins, then one emptying pass."""

    def solve(self, inst: Instance) -> List[PackedBin]:
        ordered = sorted(inst.items, key=lambda item: (-item.area, -item.height, -item.width, item.id))
        contents: List[List[Item]] = []
        placements: List[Placement] = []

        for item in ordered:
            for index, content in enumerate(contents):
                if sum(i.area for i in content) + item.area > inst.A:
                    continue
                placement = try_pack(content + [item], inst.W, inst.H)
                if placement is not None:
                    content.append(item)
                    placements[index] = placement
                    break
            else:
                contents.append([item])
                placements.append(Placement(coords={item.id: (0, 0)}))

        self._empty_least_filled(inst, contents, placements)
        return [
            PackedBin(items=[i.id for i in content], placement=placement)
            for content, placement in zip(contents, placements)
        ]

    def _empty_least_filled(self, inst: Instance, contents: List[List[Item]], placements: List[Placement]) -> None:
        """Try to redistribute the least-filled bin into the others."""
        if len(contents) < 2:
            return
        victim = min(range(len(contents)), key=lambda b: (sum(i.area for i in contents[b]), b))
        trial_contents = {b: list(c) for b, c in enumerate(contents) if b != victim}
        trial_placements: Dict[int, Placement] = {}

        for item in sorted(contents[victim], key=lambda i: -i.area):
            for b, content in trial_contents.items():
                if sum(i.area for i in content) + item.area > inst.A:
                    continue
                placement = try_pack(content + [item], inst.W, inst.H)
                if placement is not None:
                    content.append(item)
                    trial_placements[b] = placement
                    break
            else:
                return

        for b, placement in trial_placements.items():
            contents[b] = trial_contents[b]
            placements[b] = placement
        del contents[victim]
        del placements[victim]
        logger.debug(f"📦 Emptied bin {victim} during the improvement pass")


heuristic_start = HeuristicStart()


def initial_solution(inst: Instance, u0: Optional[int] = None) -> Solution:
    """
    Initial upper bound.

    Args:
        inst (Instance): instance to pack
        u0 (Optional[int]): externally known value; when given no packing
            is built and the solution is flagged as an external bound

    Returns:
        Solution: Feasible solution of value U0
    """
    lower = ceil(Fraction(inst.total_area, inst.A)) if inst.items else 0
    if u0 is not None:
        logger.info(f"📊 Using external upper bound U0={u0}")
        return Solution(
            status=SolveStatus.FEASIBLE,
            lower_bound=min(lower, u0),
            upper_bound=u0,
            external_bound=True,
        )

    bins = heuristic_start.solve(inst)
    logger.info(f"📦 Heuristic packing uses {len(bins)} bins for {inst.n} items")
    return Solution(status=SolveStatus.FEASIBLE, lower_bound=lower, upper_bound=len(bins), bins=bins)

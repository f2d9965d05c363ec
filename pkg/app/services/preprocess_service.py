"""
Preprocessing Service

Bin shrinking, item enlarging and item fixing/removal. None of the
reductions loses an optimal solution; the ReductionRecord maps a
solution of the reduced instance back to the original one.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from app.models.instance import Instance, Item, PackedBin, Placement
from app.models.search import BinContext, EnlargementEvent, ReductionRecord, RemovalEvent
from app.services.heuristic_service import bin_fill

logger = logging.getLogger(__name__)

FillHeuristic = Callable[[Sequence[Item], int, int], Tuple[List[int], Placement]]


def subset_sums(values: Iterable[int], cap: int) -> int:
    """Bitset of the subset sums of values that do not exceed cap (bit s set when s is reachable)."""
    if cap < 0:
        return 0
    mask = (1 << (cap + 1)) - 1
    bits = 1
    for v in values:
        if v <= cap:
            bits = (bits | (bits << v)) & mask
    return bits


def max_reachable(values: Iterable[int], cap: int) -> int:
    """Largest subset sum not exceeding cap."""
    if cap <= 0:
        return 0
    return subset_sums(values, cap).bit_length() - 1


def shrink_bin(inst: Instance) -> Tuple[int, int]:
    """Largest width and height actually reachable by item combinations."""
    return max_reachable(inst.widths, inst.W), max_reachable(inst.heights, inst.H)


def _lift(sizes: Sequence[int], cap: int) -> List[int]:
    """Enlarge one size at a time against the current sizes of the others, until stable."""
    lifted = list(sizes)
    changed = True
    while changed:
        changed = False
        for j, size in enumerate(lifted):
            others = lifted[:j] + lifted[j + 1:]
            grown = cap - max_reachable(others, cap - size)
            if grown > size:
                lifted[j] = grown
                changed = True
    return lifted


def enlarge_items(inst: Instance) -> Dict[int, Tuple[int, int]]:
    """
    Lifted sizes w*_j = W - max_reachable(other widths, W - w_j), and the
    same for heights, applied item by item so every earlier enlargement is
    seen by the later ones. Meant to run on an already shrunk bin.
    """
    widths = _lift(inst.widths, inst.W)
    heights = _lift(inst.heights, inst.H)
    return {item.id: (widths[item.id], heights[item.id]) for item in inst.items}


def reduce_dimensions(inst: Instance) -> Instance:
    """Shrink the bin and enlarge the items until nothing changes."""
    current = inst
    while current.items:
        W, H = shrink_bin(current)
        shrunk = current.with_bin(W, H)
        lifted = enlarge_items(shrunk)
        reduced = Instance.from_dims(
            W, H, [lifted[item.id] for item in shrunk.items],
            name=inst.name, problem_class=inst.problem_class,
        )
        if reduced.W == current.W and reduced.H == current.H and reduced.dims == current.dims:
            return reduced
        current = reduced
    return current


def per_bin_reduce(inst: Instance, contexts: List[BinContext]) -> List[BinContext]:
    """
    Shrink each bin and lift item sizes using only the items allowed in it.
    The lifted sizes use the reduced bin as base.
    """
    updated = []
    for ctx in contexts:
        members = sorted(ctx.allowed)
        widths = [inst.items[j].width for j in members]
        heights = [inst.items[j].height for j in members]
        W_i = max_reachable(widths, inst.W)
        H_i = max_reachable(heights, inst.H)
        lifted_w = _lift(widths, W_i)
        lifted_h = _lift(heights, H_i)
        updated.append(replace(
            ctx,
            W=W_i,
            H=H_i,
            widths=dict(zip(members, lifted_w)),
            heights=dict(zip(members, lifted_h)),
        ))
    return updated


class _ReductionState:
    """Mutable working copy used by fix_and_remove."""

    def __init__(self, inst: Instance):
        self.W = inst.W
        self.H = inst.H
        self.dims: Dict[int, Tuple[int, int]] = {item.id: item.dims for item in inst.items}
        self.record = ReductionRecord(
            original_dims=list(inst.dims),
            original_bin=(inst.W, inst.H),
            shrunk_bin=(inst.W, inst.H),
        )

    def items(self, ids: Iterable[int]) -> List[Item]:
        return [Item(id=j, width=self.dims[j][0], height=self.dims[j][1]) for j in ids]

    def present(self) -> List[int]:
        return sorted(self.dims)

    def reduce(self) -> bool:
        ids = self.present()
        if not ids:
            return False
        local = Instance.from_dims(self.W, self.H, [self.dims[j] for j in ids])
        reduced = reduce_dimensions(local)
        changed = (reduced.W, reduced.H) != (self.W, self.H)
        self.W, self.H = reduced.W, reduced.H
        for j, dims in zip(ids, reduced.dims):
            if dims != self.dims[j]:
                changed = True
                self.dims[j] = dims
        return changed

    def enlarge(self, j: int, dims: Tuple[int, int], offset: Tuple[int, int] = (0, 0)) -> None:
        self.record.events.append(EnlargementEvent(item=j, old_dims=self.dims[j], new_dims=dims, offset=offset))
        self.dims[j] = dims

    def remove(self, j: int, host: int, rule: str, offset: Tuple[int, int]) -> None:
        self.record.events.append(RemovalEvent(item=j, host=host, rule=rule, offset=offset))
        self.record.removed_items.append((j, rule))
        del self.dims[j]


class Preprocessor:
    """
    Item fixing and removal for wide, tall and big items.

    Each rule picks a set C of items that cannot share their width (or
    height, or bin) with each other, collects the companions R that could
    only be packed beside them, and tries to fit R into the residual space
    next to C. On success R leaves the instance and C is enlarged.
    """

    def __init__(self, fill: FillHeuristic = bin_fill):
        self.fill = fill

    def run(self, inst: Instance, reduce: bool = True) -> Tuple[Instance, ReductionRecord]:
        state = _ReductionState(inst)
        passes = 0
        while True:
            passes += 1
            improved = state.reduce() if reduce else False
            if self._strip_pass(state, axis=0) or self._strip_pass(state, axis=1) or self._big_pass(state):
                continue
            if not improved:
                break

        for j in state.present():
            if state.dims[j] == (state.W, state.H):
                state.record.fixed_hosts.append(j)
                del state.dims[j]

        record = state.record
        record.shrunk_bin = (state.W, state.H)
        record.kept_ids = state.present()
        record.enlarged = {
            j: state.dims[j] for j in record.kept_ids if state.dims[j] != record.original_dims[j]
        }
        reduced = Instance.from_dims(
            state.W, state.H, [state.dims[j] for j in record.kept_ids],
            name=inst.name, problem_class=inst.problem_class,
        )
        logger.info(
            f"✂️ Preprocessing removed {record.removed_count}/{inst.n} items "
            f"({record.removed_pct:.1f}%), {record.fixed_full_bins} fixed bins, bin {state.W}x{state.H}, {passes} passes"
        )
        return reduced, record

    # wide (axis 0) and tall (axis 1) items
    def _strip_pass(self, state: _ReductionState, axis: int) -> bool:
        cap = state.W if axis == 0 else state.H
        size = lambda j: state.dims[j][axis]  # noqa: E731
        other = lambda j: state.dims[j][1 - axis]  # noqa: E731

        candidates = sorted(
            (j for j in state.present() if 2 * size(j) > cap),
            key=lambda j: (-size(j), -other(j), j),
        )
        for c in candidates:
            if self._try_strip(state, [c], axis):
                return True
        if len(candidates) < 2:
            return False

        chosen = candidates[:2]
        if self._try_strip(state, chosen, axis):
            return True
        for c in candidates[2:]:
            chosen = chosen + [c]
            if self._try_strip(state, chosen, axis):
                return True
        return False

    def _try_strip(self, state: _ReductionState, C: List[int], axis: int) -> bool:
        cap = state.W if axis == 0 else state.H
        spare = cap - min(state.dims[c][axis] for c in C)
        members = set(C)
        R = [j for j in state.present() if j not in members and state.dims[j][axis] <= spare]

        if not R:
            grow = [c for c in C if state.dims[c][axis] < cap]
            for c in grow:
                self._enlarge_to_cap(state, c, axis)
            return bool(grow)

        # residual bins next to each host, narrowest first
        hosts = sorted(C, key=lambda c: (cap - state.dims[c][axis], c))
        remaining = sorted(R, key=lambda j: (-state.dims[j][1 - axis], -state.dims[j][axis], j))
        assignment: List[Tuple[int, int, Tuple[int, int]]] = []
        for c in hosts:
            if not remaining:
                break
            w_c, h_c = state.dims[c]
            if axis == 0:
                bin_w, bin_h = state.W - w_c, h_c
            else:
                bin_w, bin_h = w_c, state.H - h_c
            if bin_w <= 0 or bin_h <= 0:
                continue
            packed, placement = self.fill(state.items(remaining), bin_w, bin_h)
            for j in packed:
                x, y = placement.coords[j]
                offset = (w_c + x, y) if axis == 0 else (x, h_c + y)
                assignment.append((j, c, offset))
            packed_set = set(packed)
            remaining = [j for j in remaining if j not in packed_set]

        if remaining:
            return False

        rule = "wide" if axis == 0 else "tall"
        for c in C:
            self._enlarge_to_cap(state, c, axis)
        for j, c, offset in assignment:
            state.remove(j, c, rule, offset)
        logger.debug(f"✂️ {rule} rule removed {len(assignment)} items next to {sorted(C)}")
        return True

    def _enlarge_to_cap(self, state: _ReductionState, c: int, axis: int) -> None:
        w, h = state.dims[c]
        dims = (state.W, h) if axis == 0 else (w, state.H)
        if dims != (w, h):
            state.enlarge(c, dims)

    def _big_pass(self, state: _ReductionState) -> bool:
        candidates = sorted(
            (j for j in state.present() if 2 * state.dims[j][0] > state.W and 2 * state.dims[j][1] > state.H),
            key=lambda j: (-state.dims[j][0] * state.dims[j][1], -state.dims[j][0], j),
        )
        candidates = [c for c in candidates if state.dims[c] != (state.W, state.H)]
        for c in candidates:
            if self._try_big(state, [c]):
                return True
        if len(candidates) < 2:
            return False

        chosen = candidates[:2]
        if self._try_big(state, chosen):
            return True
        for c in candidates[2:]:
            chosen = chosen + [c]
            if self._try_big(state, chosen):
                return True
        return False

    def _try_big(self, state: _ReductionState, C: List[int]) -> bool:
        members = set(C)
        R = [
            j for j in state.present()
            if j not in members and any(
                state.dims[j][0] + state.dims[c][0] <= state.W or state.dims[j][1] + state.dims[c][1] <= state.H
                for c in C
            )
        ]
        remaining = sorted(R, key=lambda j: (-state.dims[j][0] * state.dims[j][1], -state.dims[j][1], j))
        plans = []
        for c in C:
            packed, placement = self.fill(state.items([c] + remaining), state.W, state.H)
            if c not in placement.coords:
                return False
            anchor = placement.coords[c]
            plans.append((c, anchor, [(j, placement.coords[j]) for j in packed if j != c]))
            packed_set = set(packed)
            remaining = [j for j in remaining if j not in packed_set]

        if remaining:
            return False

        # the enlarged host fills the bin, so companion offsets are their
        # fill coordinates; restore must see them before the enlargement
        for c, anchor, companions in plans:
            state.enlarge(c, (state.W, state.H), offset=anchor)
            for j, (x, y) in companions:
                state.remove(j, c, "big", (x, y))
        logger.debug(f"✂️ big rule fixed {sorted(C)} with {len(R)} companions")
        return True


preprocessor = Preprocessor()


def fix_and_remove(
    inst: Instance, fill: Optional[FillHeuristic] = None, reduce: bool = True
) -> Tuple[Instance, ReductionRecord]:
    """
    Apply the fixing and removal rules until no improvement is found.

    Args:
        inst (Instance): original instance
        fill (Optional[FillHeuristic]): single-bin heuristic, bin_fill by default
        reduce (bool): interleave bin shrinking and item enlarging

    Returns:
        Tuple[Instance, ReductionRecord]: reduced instance (items re-indexed)
        and the record needed to restore solutions
    """
    worker = preprocessor if fill is None else Preprocessor(fill)
    return worker.run(inst, reduce=reduce)


def replay(inst: Instance, record: ReductionRecord) -> Instance:
    """Apply a record to the original instance, reproducing the reduced instance."""
    dims = []
    for j in record.kept_ids:
        dims.append(record.enlarged.get(j, inst.items[j].dims))
    W, H = record.shrunk_bin
    return Instance.from_dims(W, H, dims, name=inst.name, problem_class=inst.problem_class)


def restore(record: ReductionRecord, bins: Sequence[PackedBin]) -> List[PackedBin]:
    """
    Map bins of the reduced instance (reduced ids) to bins of the original
    instance, re-inserting removed items and the fixed full bins.
    """
    bin_of: Dict[int, int] = {}
    anchor: Dict[int, Tuple[int, int]] = {}
    for b, packed in enumerate(bins):
        for j in packed.items:
            original = record.kept_ids[j]
            bin_of[original] = b
            anchor[original] = packed.placement.coords[j]

    for k, host in enumerate(record.fixed_hosts):
        bin_of[host] = len(bins) + k
        anchor[host] = (0, 0)

    for event in reversed(record.events):
        if isinstance(event, RemovalEvent):
            hx, hy = anchor[event.host]
            anchor[event.item] = (hx + event.offset[0], hy + event.offset[1])
            bin_of[event.item] = bin_of[event.host]
        elif isinstance(event, EnlargementEvent):
            x, y = anchor[event.item]
            anchor[event.item] = (x + event.offset[0], y + event.offset[1])

    total = len(bins) + len(record.fixed_hosts)
    restored = [PackedBin() for _ in range(total)]
    for j in sorted(bin_of):
        packed = restored[bin_of[j]]
        packed.items.append(j)
        packed.placement.coords[j] = anchor[j]
    return restored


@dataclass
class PreprocessReport:
    """What preprocessing did to an instance."""

    n: int
    remaining: int
    fixed_bins: int
    removed_pct: float
    removed_items: List[Tuple[int, str]]
    reduced_bin: Tuple[int, int]
    shrunk_bin: Tuple[int, int]
    enlarged: Dict[int, Tuple[Tuple[int, int], Tuple[int, int]]]
    lc_reduced: Fraction

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "remaining": self.remaining,
            "fixed_bins": self.fixed_bins,
            "removed_pct": self.removed_pct,
            "removed_items": [{"id": j, "rule": rule} for j, rule in self.removed_items],
            "reduced_bin": list(self.reduced_bin),
            "shrunk_bin": list(self.shrunk_bin),
            "enlarged": [
                {"id": j, "from": list(old), "to": list(new)} for j, (old, new) in sorted(self.enlarged.items())
            ],
            "lc_reduced": float(self.lc_reduced),
        }


def preprocess_report(inst: Instance) -> PreprocessReport:
    """Dimension reduction of the original instance plus the outcome of fix_and_remove."""
    dim_reduced = reduce_dimensions(inst)
    reduced, record = fix_and_remove(inst)
    return PreprocessReport(
        n=inst.n,
        remaining=reduced.n,
        fixed_bins=record.fixed_full_bins,
        removed_pct=record.removed_pct,
        removed_items=list(record.removed_items),
        reduced_bin=(dim_reduced.W, dim_reduced.H),
        shrunk_bin=record.shrunk_bin,
        enlarged={j: (record.original_dims[j], dims) for j, dims in record.enlarged.items()},
        lc_reduced=dim_reduced.continuous(),
    )

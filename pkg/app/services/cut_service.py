"""
Cut Engine Service

Turns an infeasible bin content into lifted combinatorial cuts: the
content is first reduced to a (near) minimal infeasible subset, then the
cover inequality on that subset is lifted with coefficients derived from
the bar relaxation of the single-bin knapsack.
"""

import logging
import random
import threading
import time
from dataclasses import dataclass
from math import floor
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from app.models.instance import Item, Placement
from app.models.search import BinContext, Cut, OppResult, OppVerdict, Pattern, PatternAxis
from app.services.exceptions import LpError
from app.services.heuristic_service import try_pack
from app.services.lp_service import LinearProgram, LpStatus, knapsack_01, solve_lp
from app.services.opp_service import opp_check

logger = logging.getLogger(__name__)

PRICING_TOL = 1e-7
VALUE_GUARD = 1e-9
ARTIFICIAL_TOL = 1e-6
MAX_PRICING_ROUNDS = 500

Dims = Dict[int, Tuple[int, int]]


class CheckMemo:
    """
    Single-bin verdicts keyed by the bin size and the sorted item sizes.
    Only definite verdicts are stored; timeouts are always re-checked.
    """

    def __init__(self):
        self._store: Dict[Tuple, Tuple[OppVerdict, Optional[List[Tuple[int, int]]]]] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.calls = 0
        self.seconds = 0.0

    @staticmethod
    def _canonical(items: Sequence[Item]) -> List[Item]:
        return sorted(items, key=lambda i: (i.width, i.height, i.id))

    def key(self, items: Sequence[Item], W: int, H: int) -> Tuple:
        return (W, H, tuple(i.dims for i in self._canonical(items)))

    def check(self, items: Sequence[Item], W: int, H: int, time_limit: Optional[float] = None) -> OppResult:
        """opp_check with memoization; placements are remapped to the given ids."""
        key = self.key(items, W, H)
        canonical = self._canonical(items)
        with self._lock:
            cached = self._store.get(key)
            if cached is not None:
                self.hits += 1
        if cached is not None:
            verdict, coords = cached
            placement = None
            if coords is not None:
                placement = Placement(coords={item.id: xy for item, xy in zip(canonical, coords)})
            return OppResult(verdict=verdict, placement=placement)

        result = opp_check(items, W, H, time_limit=time_limit)
        with self._lock:
            self.calls += 1
            self.seconds += result.seconds
            if result.verdict != OppVerdict.TIMEOUT:
                coords = None
                if result.placement is not None:
                    coords = [result.placement.coords[item.id] for item in canonical]
                self._store[key] = (result.verdict, coords)
        return result

    def __len__(self) -> int:
        return len(self._store)


def find_mis(
    S: Sequence[int],
    items: Sequence[Item],
    W: int,
    H: int,
    ctx: Optional[BinContext] = None,
    per_check_limit: float = 2.0,
    gamma: int = 0,
    seed: int = 0,
    memo: Optional[CheckMemo] = None,
    exhaustive: bool = False,
) -> List[FrozenSet[int]]:
    """
    Reduce an infeasible item set by removing one item at a time.

    The first pass removes items from the smallest area to the largest;
    gamma further passes use random orders. A pass stops at the first
    removal that is not proven infeasible, unless exhaustive is set, in
    which case every item is tried once.

    Args:
        S (Sequence[int]): infeasible item ids
        items (Sequence[Item]): all items, indexed by id
        ctx (Optional[BinContext]): the forced item of the bin is never removed

    Returns:
        List[FrozenSet[int]]: at most gamma + 1 distinct infeasible subsets
    """
    if memo is None:
        memo = CheckMemo()
    keep = {ctx.forced} if ctx is not None and ctx.forced is not None else set()
    removable = sorted((j for j in S if j not in keep), key=lambda j: (items[j].area, j))

    def reduce(order: Sequence[int]) -> FrozenSet[int]:
        current = set(S)
        for j in order:
            trial = current - {j}
            result = memo.check([items[k] for k in trial], W, H, time_limit=per_check_limit)
            if result.infeasible:
                current = trial
            elif not exhaustive:
                break
        return frozenset(current)

    found: List[FrozenSet[int]] = [reduce(removable)]
    rng = random.Random(seed)
    for _ in range(gamma):
        order = list(removable)
        rng.shuffle(order)
        subset = reduce(order)
        if subset not in found:
            found.append(subset)
    return found


class _BarRelaxation:
    """Restricted master of the bar relaxation with its pattern columns."""

    def __init__(self, profits: Dict[int, float], dims: Dims, forced: Set[int], W: int, H: int):
        self.members = sorted(set(profits) | forced)
        self.profits = profits
        self.dims = dims
        self.forced = forced
        self.W = W
        self.H = H
        self.patterns: List[Pattern] = []
        self._seen: Set[Pattern] = set()
        for j in self.members:
            self.add(Pattern(frozenset([j]), PatternAxis.W_FEASIBLE))
            self.add(Pattern(frozenset([j]), PatternAxis.H_FEASIBLE))
        self.penalty = (1.0 + sum(profits.values())) * (W + H)

    def add(self, pattern: Pattern) -> bool:
        if pattern in self._seen:
            return False
        self._seen.add(pattern)
        self.patterns.append(pattern)
        return True

    def build(self) -> Tuple[LinearProgram, Dict[str, List[int]]]:
        lp = LinearProgram(sense="max")
        z = {}
        for j in self.members:
            fixed = j in self.forced
            z[j] = lp.add_variable(self.profits.get(j, 0.0), lower=1.0 if fixed else 0.0, upper=1.0)
        columns = [lp.add_variable(0.0) for _ in self.patterns]
        artificials = {j: lp.add_variable(-self.penalty) for j in self.members if j in self.forced}

        rows: Dict[str, List[int]] = {"h_cover": [], "w_cover": [], "capacity": []}
        for j in self.members:
            w, h = self.dims[j]
            slices = {col: 1.0 for col, p in zip(columns, self.patterns) if p.axis == PatternAxis.W_FEASIBLE and j in p.items}
            slices[z[j]] = -float(h)
            if j in artificials:
                slices[artificials[j]] = 1.0
            rows["h_cover"].append(lp.add_row(slices, ">=", 0.0))

            bars = {col: 1.0 for col, p in zip(columns, self.patterns) if p.axis == PatternAxis.H_FEASIBLE and j in p.items}
            bars[z[j]] = -float(w)
            if j in artificials:
                bars[artificials[j]] = 1.0
            rows["w_cover"].append(lp.add_row(bars, ">=", 0.0))

        by_axis = {axis: {col: 1.0 for col, p in zip(columns, self.patterns) if p.axis == axis} for axis in PatternAxis}
        rows["capacity"].append(lp.add_row(by_axis[PatternAxis.W_FEASIBLE], "<=", float(self.H)))
        rows["capacity"].append(lp.add_row(by_axis[PatternAxis.H_FEASIBLE], "<=", float(self.W)))
        rows["artificials"] = list(artificials.values())
        return lp, rows

    def price(self, duals: Sequence[float], rows: Dict[str, List[int]]) -> int:
        """Add the most profitable pattern of each axis when it improves the master."""
        added = 0
        mu_H, mu_W = (duals[r] for r in rows["capacity"])
        widths = [self.dims[j][0] for j in self.members]
        heights = [self.dims[j][1] for j in self.members]

        pi = [max(0.0, -duals[r]) for r in rows["h_cover"]]
        value, chosen = knapsack_01(widths, self.W, pi)
        if value > mu_H + PRICING_TOL:
            added += self.add(Pattern(frozenset(self.members[k] for k in chosen), PatternAxis.W_FEASIBLE))

        pi = [max(0.0, -duals[r]) for r in rows["w_cover"]]
        value, chosen = knapsack_01(heights, self.H, pi)
        if value > mu_W + PRICING_TOL:
            added += self.add(Pattern(frozenset(self.members[k] for k in chosen), PatternAxis.H_FEASIBLE))
        return added


def ukp_value(
    profits: Dict[int, float],
    dims: Dims,
    forced: int,
    W: int,
    H: int,
    extra_forced: Iterable[int] = (),
) -> Optional[float]:
    """
    Value of the continuous bar relaxation of the single-bin knapsack with
    the item forced into the bin.

    W-feasible patterns are unit-height slices whose widths fit W; every
    selected item must be crossed by h_j of them, and at most H slices are
    used. H-feasible patterns are the same in the other axis.

    Returns:
        Optional[float]: the relaxation value; -inf when the forced items
        cannot be covered; None when the column generation did not converge
    """
    if forced in profits:
        raise ValueError(f"forced item {forced} must not carry a profit")
    relaxation = _BarRelaxation(dict(profits), dims, {forced, *extra_forced}, W, H)

    for _ in range(MAX_PRICING_ROUNDS):
        lp, rows = relaxation.build()
        try:
            result = solve_lp(lp)
        except LpError as e:
            logger.warning(f"⚠️ Bar relaxation LP failed: {e}")
            return None
        if result.status != LpStatus.OPTIMAL:
            logger.warning(f"⚠️ Bar relaxation LP ended with status {result.status.value}")
            return None
        if relaxation.price(result.duals, rows) == 0:
            if any(result.x[a] > ARTIFICIAL_TOL for a in rows["artificials"]):
                return float("-inf")
            return float(sum(relaxation.profits.get(j, 0.0) * result.x[k] for k, j in enumerate(relaxation.members)))
    logger.warning("⚠️ Bar relaxation pricing hit the round cap")
    return None


def lift_cut(
    C: Iterable[int],
    items: Sequence[Item],
    W: int,
    H: int,
    ctx: Optional[BinContext] = None,
) -> Cut:
    """
    Lift the cover inequality of an infeasible set C.

    Candidates are visited by non-increasing area. Items excluded from the
    bin are skipped and the forced item of the bin enters the relaxation as
    fixed; either makes the cut local to that bin.

    Returns:
        Cut: base C, positive lifting coefficients and the scope
    """
    base = frozenset(C)
    rhs = len(base) - 1
    dims: Dims = {item.id: item.dims for item in items}
    profits: Dict[int, float] = {j: 1.0 for j in base}
    coefficients: Dict[int, int] = {}

    forced: Tuple[int, ...] = ()
    local = False
    if ctx is not None and ctx.forced is not None and ctx.forced not in base:
        forced = (ctx.forced,)
        local = True

    candidates = sorted((item for item in items if item.id not in base), key=lambda i: (-i.area, i.id))
    for candidate in candidates:
        j = candidate.id
        if j in forced:
            continue
        if ctx is not None and j not in ctx.allowed:
            local = True
            continue
        if rhs == 0:
            break

        others = [items[k] for k in forced]
        fits_beside = any(
            try_pack([candidate] + others + [items[k] for k in base if k != c], W, H) is not None
            for c in sorted(base)
        )
        if fits_beside:
            continue

        value = ukp_value(profits, dims, j, W, H, extra_forced=forced)
        if value is None:
            continue
        if value == float("-inf"):
            alpha = rhs
        else:
            alpha = max(0, rhs - floor(value + VALUE_GUARD))
        alpha = min(alpha, rhs)
        if alpha > 0:
            coefficients[j] = alpha
            profits[j] = float(alpha)

    scope = ctx.index if (local and ctx is not None) else None
    return Cut(base=base, coefficients=coefficients, scope=scope)


class CutPool:
    """Cuts found so far, deduplicated, with a version counter bumped on every insert."""

    def __init__(self):
        self.cuts: List[Cut] = []
        self._keys: Set[Tuple] = set()
        self._lock = threading.Lock()
        self.version = 0

    def add(self, cut: Cut) -> bool:
        with self._lock:
            if cut.key in self._keys:
                return False
            self._keys.add(cut.key)
            self.cuts.append(cut)
            self.version += 1
            return True

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self):
        return iter(list(self.cuts))

    def matrix(self, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coefficient matrix (cuts x items), right-hand sides and scopes (-1 for global)."""
        with self._lock:
            coef = np.zeros((len(self.cuts), n), dtype=np.int64)
            rhs = np.zeros(len(self.cuts), dtype=np.int64)
            scope = np.full(len(self.cuts), -1, dtype=np.int64)
            for r, cut in enumerate(self.cuts):
                for j in cut.base:
                    coef[r, j] = 1
                for j, a in cut.coefficients.items():
                    coef[r, j] = a
                rhs[r] = cut.rhs
                if cut.scope is not None:
                    scope[r] = cut.scope
        return coef, rhs, scope


@dataclass
class SeparationResult:
    cuts: List[Cut]
    seconds: float


def separate(
    S: Sequence[int],
    items: Sequence[Item],
    W: int,
    H: int,
    ctx: Optional[BinContext] = None,
    per_check_limit: float = 2.0,
    gamma: int = 0,
    seed: int = 0,
    memo: Optional[CheckMemo] = None,
) -> SeparationResult:
    """MIS reduction followed by lifting; a local lifted cut comes with its global unlifted cover."""
    started = time.perf_counter()
    cuts: List[Cut] = []
    for subset in find_mis(S, items, W, H, ctx, per_check_limit, gamma, seed, memo):
        cut = lift_cut(subset, items, W, H, ctx)
        cuts.append(cut)
        if cut.scope is not None:
            cuts.append(Cut(base=subset))
    logger.debug(f"✂️ Separated {len(cuts)} cuts from a bin of {len(S)} items")
    return SeparationResult(cuts=cuts, seconds=time.perf_counter() - started)

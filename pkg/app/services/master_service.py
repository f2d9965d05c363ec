"""
Master Search Service

Exact solution of an instance: preprocessing, initial bounds, then a
branch-and-cut over item-to-bin assignments. Complete assignments are
checked bin by bin with the OPP checker; infeasible bins produce lifted
cuts that the search enforces from then on.
"""

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from math import ceil
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.config.settings import SolverSettings, get_settings
from app.models.instance import Instance, PackedBin, Placement, Solution, SolveStats, SolveStatus
from app.models.search import BinContext, DffPair, ScalePair
from app.services.cut_service import CheckMemo, CutPool, lift_cut, separate
from app.services.dff_service import bound_report, conservative_scales, evaluate, l2_ccm, rank_scale_pairs
from app.services.exceptions import DffParameterError, InvariantViolation
from app.services.heuristic_service import initial_solution
from app.services.instance_service import verify_bins, verify_solution
from app.services.opp_service import opp_brute_force
from app.services.preprocess_service import fix_and_remove, per_bin_reduce, restore
from app.services.solve_log_service import SolveLog

logger = logging.getLogger(__name__)

FILTER_TOL = 1e-9
BOUND_GUARD = 1e-9


class MasterConfig(BaseModel):
    """Parameters of one solve. u0 set means the GivenU0 start mode."""

    time_limit: float = Field(3600.0, gt=0, description="Wall-clock limit in seconds")
    alpha: int = Field(700, ge=0, description="DFF pairs used as bin inequalities")
    beta: int = Field(700, ge=0, description="Conservative scale pairs used as bin inequalities")
    gamma: int = Field(0, ge=0, description="Randomized MIS passes")
    tilde_n: int = Field(18, ge=2, description="OPP suppression threshold")
    per_check_limit: float = Field(2.0, gt=0, description="OPP limit inside MIS reduction")
    eta: int = Field(8, ge=1, description="Conservative scale iterations")
    seed: int = Field(0, description="Seed of the randomized MIS passes")
    u0: Optional[int] = Field(None, ge=0, description="Externally known solution value")
    root_clique_cuts: bool = Field(True, description="Lift incompatible pairs at the root")
    max_root_cuts: int = Field(200, ge=0, description="Cap on root pair cuts")
    solve_log: Optional[str] = Field(None, description="JSON-lines solve log path")

    @classmethod
    def from_settings(cls, settings: Optional[SolverSettings] = None, **overrides) -> "MasterConfig":
        """Defaults from settings; None overrides are ignored."""
        settings = settings or get_settings()
        values = {
            "time_limit": settings.time_limit,
            "alpha": settings.alpha,
            "beta": settings.beta,
            "gamma": settings.gamma,
            "tilde_n": settings.tilde_n,
            "per_check_limit": settings.per_check_limit,
            "eta": settings.eta,
            "seed": settings.seed,
            "root_clique_cuts": settings.root_clique_cuts,
            "max_root_cuts": settings.max_root_cuts,
            "solve_log": settings.solve_log,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def start_mode(self) -> str:
        return "Heuristic" if self.u0 is None else "GivenU0"


class SearchTimeout(Exception):
    pass


# ---------------------------------------------------------------------------
# Clique fixing and bin contexts
# ---------------------------------------------------------------------------

def incompatibility(inst: Instance) -> np.ndarray:
    """Pairs that can never share a bin: too wide side by side and too tall stacked."""
    w = np.asarray(inst.widths, dtype=np.int64)
    h = np.asarray(inst.heights, dtype=np.int64)
    graph = ((w[:, None] + w[None, :]) > inst.W) & ((h[:, None] + h[None, :]) > inst.H)
    np.fill_diagonal(graph, False)
    return graph


def max_clique(adjacency: np.ndarray) -> List[int]:
    """Maximum clique by branch-and-bound with a greedy coloring bound."""
    n = len(adjacency)
    if n == 0:
        return []
    neighbours = [set(np.flatnonzero(adjacency[v]).tolist()) for v in range(n)]
    best: List[int] = []

    def color_order(candidates: List[int]) -> List[Tuple[int, int]]:
        classes: List[List[int]] = []
        for v in candidates:
            for members in classes:
                if not neighbours[v].intersection(members):
                    members.append(v)
                    break
            else:
                classes.append([v])
        return [(v, color + 1) for color, members in enumerate(classes) for v in members]

    def expand(clique: List[int], candidates: List[int]) -> None:
        nonlocal best
        remaining = list(candidates)
        for v, color in reversed(color_order(candidates)):
            if len(clique) + color <= len(best):
                return
            clique.append(v)
            inner = [u for u in remaining if u in neighbours[v]]
            if inner:
                expand(clique, inner)
            elif len(clique) > len(best):
                best = list(clique)
            clique.pop()
            remaining.remove(v)

    start = sorted(range(n), key=lambda v: (-len(neighbours[v]), v))
    expand([], start)
    return sorted(best)


def clique_order(inst: Instance, clique: Sequence[int]) -> List[int]:
    """Clique members first, then the other items by non-increasing area."""
    members = set(clique)
    first = sorted(clique, key=lambda j: (-inst.items[j].area, j))
    rest = sorted((j for j in range(inst.n) if j not in members), key=lambda j: (-inst.items[j].area, j))
    return first + rest


def build_contexts(inst: Instance, clique: Sequence[int]) -> List[BinContext]:
    """
    One context per potential bin. Item j may only enter bins i <= j; the
    first len(clique) bins each hold their clique item, and items
    incompatible with that item are excluded from the bin.
    """
    t = len(clique)
    if sorted(clique) != list(range(t)):
        raise ValueError("clique items must be the first items of the instance")
    graph = incompatibility(inst)
    contexts = []
    for i in range(inst.n):
        allowed = set(range(i, inst.n))
        forced = None
        excluded: frozenset = frozenset()
        if i < t:
            forced = i
            excluded = frozenset(j for j in allowed if graph[i, j])
            allowed -= excluded
        contexts.append(BinContext(index=i, allowed=frozenset(allowed), forced=forced, excluded_by_forced=excluded))
    return per_bin_reduce(inst, contexts)


# ---------------------------------------------------------------------------
# DFF inequalities
# ---------------------------------------------------------------------------

@dataclass
class BinFilter:
    """Capacity rows of one bin: matrix @ x <= caps for the bin's item indicator x."""

    matrix: np.ndarray
    caps: np.ndarray

    def admits(self, items: Sequence[int]) -> bool:
        if not len(items):
            return True
        load = self.matrix[:, list(items)].sum(axis=1)
        return bool(np.all(load <= self.caps + FILTER_TOL))


def _dedupe(rows: List[np.ndarray], caps: List[float]) -> Tuple[np.ndarray, np.ndarray]:
    seen = set()
    kept_rows, kept_caps = [], []
    for row, cap in zip(rows, caps):
        key = tuple(np.round(row / cap, 9).tolist())
        if key in seen:
            continue
        seen.add(key)
        kept_rows.append(row)
        kept_caps.append(cap)
    return np.vstack(kept_rows), np.asarray(kept_caps, dtype=float)


def bin_filter(
    ctx: BinContext,
    inst: Instance,
    pairs: Sequence[DffPair],
    scales: Sequence[ScalePair],
    scale_ranking: Sequence[Tuple[int, int, float]],
) -> BinFilter:
    """Area row on lifted sizes, one row per DFF pair on lifted sizes, one row per scale pair."""
    n = inst.n
    members = sorted(ctx.allowed)
    lifted_w = np.zeros(n, dtype=np.int64)
    lifted_h = np.zeros(n, dtype=np.int64)
    for j in members:
        lifted_w[j] = ctx.widths[j]
        lifted_h[j] = ctx.heights[j]
    member_w = [ctx.widths[j] for j in members]
    member_h = [ctx.heights[j] for j in members]

    rows = [(lifted_w * lifted_h).astype(float)]
    caps = [float(ctx.W * ctx.H)]

    images: Dict = {}

    def image(spec, C, sizes, values):
        if spec not in images:
            try:
                images[spec] = evaluate(spec, C, sizes, values)
            except DffParameterError:
                images[spec] = None
        return images[spec]

    for pair in pairs:
        gw = image(pair.width, ctx.W, member_w, lifted_w)
        gh = image(pair.height, ctx.H, member_h, lifted_h)
        if gw is None or gh is None or gw[1] <= 0 or gh[1] <= 0:
            continue
        rows.append((gw[0] * gh[0]).astype(float))
        caps.append(float(gw[1] * gh[1]))

    for k, l, _ in scale_ranking:
        row = np.asarray(scales[k].widths) * np.asarray(scales[l].heights)
        rows.append(row.astype(float))
        caps.append(float(inst.A) + 1e-6)

    matrix, cap_vector = _dedupe(rows, caps)
    return BinFilter(matrix=matrix, caps=cap_vector)


def dff_inequalities(
    contexts: Sequence[BinContext],
    inst: Instance,
    pairs: Sequence[DffPair],
    scales: Sequence[ScalePair],
    alpha: int,
    beta: int,
) -> List[BinFilter]:
    """Per-bin capacity filters from the alpha best DFF pairs and the beta best scale pairs."""
    ranking = rank_scale_pairs(inst, scales)[:beta] if scales else []
    return [bin_filter(ctx, inst, list(pairs)[:alpha], scales, ranking) for ctx in contexts]


def global_bound_rows(
    inst: Instance, pairs: Sequence[DffPair], scales: Sequence[ScalePair], beta: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Rows for the residual bound: area, DFF pairs and scale pairs on the whole bin."""
    rows = [np.asarray([i.area for i in inst.items], dtype=float)]
    caps = [float(inst.A)]
    for pair in pairs:
        gw, cw = evaluate(pair.width, inst.W, inst.widths)
        gh, ch = evaluate(pair.height, inst.H, inst.heights)
        if cw > 0 and ch > 0:
            rows.append((gw * gh).astype(float))
            caps.append(float(cw * ch))
    for k, l, _ in (rank_scale_pairs(inst, scales)[:beta] if scales else []):
        rows.append(np.asarray(scales[k].widths) * np.asarray(scales[l].heights))
        caps.append(float(inst.A))
    return _dedupe(rows, caps)


# ---------------------------------------------------------------------------
# Backend
# ---------------------------------------------------------------------------

LazyCutCallback = Callable[[List[List[int]]], Optional[List[Placement]]]


@dataclass
class SearchOutcome:
    bins: Optional[List[PackedBin]] = None
    exhausted: bool = False
    nodes: int = 0


class MasterBackend(ABC):
    """An assignment model with lazily separated cuts at integer solutions."""

    @abstractmethod
    def build_model(self, inst: Instance, contexts: List[BinContext], filters: List[BinFilter],
                    bound_rows: Tuple[np.ndarray, np.ndarray], pool: CutPool) -> None:
        ...

    @abstractmethod
    def register_lazy_cut_callback(self, callback: LazyCutCallback) -> None:
        ...

    @abstractmethod
    def optimize(self, limit: int, lower: int, deadline: float) -> SearchOutcome:
        """Best solution with at most limit bins; stops early at lower bins."""


class CombinatorialBranchAndCut(MasterBackend):
    """
    Depth-first search assigning items in index order to open bins, then
    to a new bin. Bins open as a prefix. Nodes are pruned by the bin
    contexts, pairwise incompatibility, the per-bin filters, the cut pool
    and a residual DFF bound.
    """

    def __init__(self, log: Optional[SolveLog] = None):
        self.log = log or SolveLog()
        self.callback: Optional[LazyCutCallback] = None
        self.nodes = 0

    def build_model(self, inst, contexts, filters, bound_rows, pool) -> None:
        self.inst = inst
        self.n = inst.n
        self.contexts = contexts
        self.filters = filters
        self.pool = pool
        self.graph = incompatibility(inst).astype(np.int64)
        self.allowed = np.zeros((self.n, self.n), dtype=bool)
        for ctx in contexts:
            self.allowed[ctx.index, sorted(ctx.allowed)] = True
        self.G, self.G_caps = bound_rows

    def register_lazy_cut_callback(self, callback: LazyCutCallback) -> None:
        self.callback = callback

    def _refresh_cuts(self) -> None:
        self.coef, self.rhs, scope = self.pool.matrix(self.n)
        self.applies = (scope[None, :] == -1) | (scope[None, :] == np.arange(self.n)[:, None])
        self.cut_version = self.pool.version
        self.lhs = [self.coef[:, members].sum(axis=1) for members in self.members]

    def optimize(self, limit: int, lower: int, deadline: float) -> SearchOutcome:
        if self.callback is None:
            raise RuntimeError("no lazy cut callback registered")
        n = self.n
        self.limit = min(limit, n)
        self.lower = lower
        self.deadline = deadline
        self.members: List[List[int]] = [[] for _ in range(n)]
        self.conflict = np.zeros((n, n), dtype=np.int64)
        self.loads = [np.zeros(f.matrix.shape[0]) for f in self.filters]
        self.open = 0
        self.best: Optional[List[PackedBin]] = None
        self.stop = False
        self._refresh_cuts()

        first = self.nodes
        exhausted = True
        try:
            self._place(0)
        except SearchTimeout:
            exhausted = False
        self.log.count("nodes", self.nodes - first)
        return SearchOutcome(bins=self.best, exhausted=exhausted, nodes=self.nodes)

    def _bound(self, j: int) -> int:
        """Open bins plus the residual bound of items that fit no open bin."""
        if j >= self.n:
            return self.open
        rest = np.arange(j, self.n)
        homeless = np.ones(len(rest), dtype=bool)
        for b in range(self.open):
            f = self.filters[b]
            fits = (
                self.allowed[b, rest]
                & (self.conflict[b, rest] == 0)
                & (self.loads[b][0] + f.matrix[0, rest] <= f.caps[0] + FILTER_TOL)
            )
            homeless &= ~fits
        if not homeless.any():
            return self.open
        totals = self.G[:, rest[homeless]].sum(axis=1) / self.G_caps
        return self.open + int(ceil(float(totals.max()) - BOUND_GUARD))

    def _fits(self, b: int, j: int) -> bool:
        if not self.allowed[b, j] or self.conflict[b, j]:
            return False
        f = self.filters[b]
        if np.any(self.loads[b] + f.matrix[:, j] > f.caps + FILTER_TOL):
            return False
        if len(self.rhs):
            violated = (self.lhs[b] + self.coef[:, j] > self.rhs) & self.applies[b]
            if violated.any():
                return False
        return True

    def _add(self, b: int, j: int) -> None:
        if b == self.open:
            self.open += 1
        self.members[b].append(j)
        self.conflict[b] += self.graph[j]
        self.loads[b] += self.filters[b].matrix[:, j]
        self.lhs[b] += self.coef[:, j]

    def _remove(self, b: int, j: int) -> None:
        self.members[b].pop()
        self.conflict[b] -= self.graph[j]
        self.loads[b] -= self.filters[b].matrix[:, j]
        self.lhs[b] -= self.coef[:, j]
        if not self.members[b]:
            self.open -= 1

    def _place(self, j: int) -> None:
        self.nodes += 1
        if self.nodes % 128 == 0 and time.perf_counter() > self.deadline:
            raise SearchTimeout()
        if self.open > self.limit:
            return
        if j == self.n:
            self._leaf()
            return
        if self._bound(j) > self.limit:
            return

        for b in range(self.open + 1):
            if self.stop or b >= self.limit:
                return
            if b == self.open and b > j:
                break
            if not self._fits(b, j):
                continue
            self._add(b, j)
            self._place(j + 1)
            self._remove(b, j)
            if self.pool.version != self.cut_version:
                self._refresh_cuts()

    def _leaf(self) -> None:
        bins = [list(self.members[b]) for b in range(self.open)]
        placements = self.callback(bins)
        if placements is None:
            return
        packed = [PackedBin(items=items, placement=p) for items, p in zip(bins, placements)]
        check = verify_bins(self.inst, packed)
        if not check.ok:
            raise InvariantViolation(f"incumbent rejected: {check.violation}")
        self.best = packed
        self.limit = len(packed) - 1
        self.log.incumbent(len(packed), self.nodes)
        logger.info(f"📦 New incumbent with {len(packed)} bins after {self.nodes} nodes")
        if len(packed) <= self.lower:
            self.stop = True


class Separator:
    """Lazy cut callback: checks every bin of an integer solution and cuts off infeasible ones."""

    def __init__(self, inst: Instance, contexts: List[BinContext], pool: CutPool, memo: CheckMemo,
                 cfg: MasterConfig, log: SolveLog, deadline: float):
        self.inst = inst
        self.contexts = contexts
        self.pool = pool
        self.memo = memo
        self.cfg = cfg
        self.log = log
        self.deadline = deadline

    def _check(self, members: List[int]):
        remaining = self.deadline - time.perf_counter()
        if remaining <= 0:
            raise SearchTimeout()
        items = [self.inst.items[j] for j in members]
        hits = self.memo.hits
        result = self.memo.check(items, self.inst.W, self.inst.H, time_limit=remaining)
        self.log.opp(result.verdict.value, len(members), result.seconds, cached=self.memo.hits > hits)
        return result

    def __call__(self, bins: List[List[int]]) -> Optional[List[Placement]]:
        placements: List[Placement] = []
        infeasible: List[int] = []
        for b, members in enumerate(bins):
            if len(members) == 1:
                placements.append(Placement(coords={members[0]: (0, 0)}))
                continue
            if infeasible and len(members) >= self.cfg.tilde_n:
                continue
            result = self._check(members)
            if result.feasible:
                placements.append(result.placement)
            elif result.infeasible:
                infeasible.append(b)
            else:
                raise SearchTimeout()

        for b in infeasible:
            separation = separate(
                bins[b], self.inst.items, self.inst.W, self.inst.H, self.contexts[b],
                per_check_limit=self.cfg.per_check_limit, gamma=self.cfg.gamma,
                seed=self.cfg.seed, memo=self.memo,
            )
            for cut in separation.cuts:
                if self.pool.add(cut):
                    self.log.cut(cut.to_dict())
        if infeasible or len(placements) < len(bins):
            return None
        return placements


def _root_cuts(inst: Instance, pool: CutPool, cfg: MasterConfig, log: SolveLog, deadline: float) -> None:
    """Lift incompatible pairs, largest combined area first."""
    graph = incompatibility(inst)
    pairs = [(a, b) for a in range(inst.n) for b in range(a + 1, inst.n) if graph[a, b]]
    pairs.sort(key=lambda p: (-(inst.items[p[0]].area + inst.items[p[1]].area), p))
    for a, b in pairs[: cfg.max_root_cuts]:
        if time.perf_counter() > deadline:
            break
        cut = lift_cut({a, b}, inst.items, inst.W, inst.H)
        if cut.coefficients and pool.add(cut):
            log.cut(cut.to_dict())


# ---------------------------------------------------------------------------
# Solve
# ---------------------------------------------------------------------------

def _reorder(inst: Instance, order: Sequence[int]) -> Instance:
    return Instance.from_dims(inst.W, inst.H, [inst.items[j].dims for j in order],
                              name=inst.name, problem_class=inst.problem_class)


def _to_reduced(bins: Sequence[PackedBin], order: Sequence[int]) -> List[PackedBin]:
    return [
        PackedBin(
            items=[order[j] for j in packed.items],
            placement=Placement(coords={order[j]: xy for j, xy in packed.placement.coords.items()}),
        )
        for packed in bins
    ]


@dataclass
class _Progress:
    lower: int
    bins: Optional[List[PackedBin]] = None
    timed_out: bool = False
    proven: bool = False


class MasterSearch:
    """Preprocess, bound, search, restore."""

    def __init__(
        self,
        backend_factory: Callable[[SolveLog], MasterBackend] = CombinatorialBranchAndCut,
        cut_pool: Optional[CutPool] = None,
    ):
        self.backend_factory = backend_factory
        # shared across solves of the same instance; cut indices follow the clique order
        self.cut_pool = cut_pool

    def solve(self, inst: Instance, cfg: Optional[MasterConfig] = None, log: Optional[SolveLog] = None) -> Solution:
        cfg = cfg or MasterConfig.from_settings()
        owns_log = log is None
        log = log or SolveLog(cfg.solve_log, inst.name)
        try:
            return self._solve(inst, cfg, log)
        finally:
            if owns_log:
                log.close()

    def _solve(self, inst: Instance, cfg: MasterConfig, log: SolveLog) -> Solution:
        started = time.perf_counter()
        deadline = started + cfg.time_limit
        logger.info(f"🚀 Solving {inst.name or 'instance'} with {inst.n} items, mode {cfg.start_mode}")
        log.event("start", n=inst.n, W=inst.W, H=inst.H, mode=cfg.start_mode)

        reduced, record = fix_and_remove(inst)
        report = bound_report(inst, cfg.eta, preprocessed=(reduced, record))
        fixed = record.fixed_full_bins
        L0 = report.l0

        if cfg.u0 is None:
            start = initial_solution(reduced)
            heuristic_bins: Optional[List[PackedBin]] = start.bins
            U0 = fixed + start.upper_bound
        else:
            heuristic_bins = None
            U0 = cfg.u0

        stats = SolveStats(
            removed_pct=record.removed_pct,
            fixed_bins=fixed,
            lc=float(report.lc),
            lc_reduced=float(report.lc_reduced),
            l0=L0,
            u0=U0,
            sec0=time.perf_counter() - started,
        )
        log.event("bounds", L0=L0, U0=U0, fixed=fixed, removed_pct=record.removed_pct)
        logger.info(f"📊 L0={L0} U0={U0} fixed={fixed} removed={record.removed_pct:.1f}%")

        progress = _Progress(lower=max(0, L0 - fixed), bins=heuristic_bins)
        if not reduced.items:
            progress.bins, progress.proven = [], True
        elif heuristic_bins is not None and L0 >= U0:
            progress.proven = True
        else:
            self._search(reduced, cfg, log, deadline, progress, U0 - fixed, heuristic_bins is None)

        bins = restore(record, progress.bins) if progress.bins is not None else []
        if progress.bins is not None:
            U = len(bins)
        else:
            U = U0
        if progress.proven and progress.bins is not None:
            status, L = SolveStatus.OPTIMAL, U
        else:
            status = SolveStatus.TIMED_OUT
            L = max(L0, fixed + progress.lower)

        solution = Solution(
            status=status,
            lower_bound=min(L, U),
            upper_bound=U,
            bins=bins,
            stats=log.fill(stats).copy(update={"seconds": time.perf_counter() - started}),
            external_bound=progress.bins is None,
        )
        if bins:
            check = verify_solution(inst, solution)
            if not check.ok:
                raise InvariantViolation(f"solution rejected: {check.violation}")
        log.event("end", status=status.value, L=solution.lower_bound, U=solution.upper_bound)
        logger.info(f"✅ {status.value}: L={solution.lower_bound} U={solution.upper_bound} in {solution.stats.seconds:.2f}s")
        return solution

    def _search(self, reduced: Instance, cfg: MasterConfig, log: SolveLog, deadline: float,
                progress: _Progress, target: int, given_u0: bool) -> None:
        clique = max_clique(incompatibility(reduced))
        order = clique_order(reduced, clique)
        work = _reorder(reduced, order)
        t = len(clique)
        progress.lower = max(progress.lower, t)
        logger.info(f"📊 Clique of {t} pairwise incompatible items fixed to bins 0..{t - 1}")

        contexts = build_contexts(work, list(range(t)))
        _, pairs = l2_ccm(work, limit=cfg.alpha) if cfg.alpha else (0, [])
        scales = conservative_scales(work, cfg.eta) if cfg.beta else []
        filters = dff_inequalities(contexts, work, pairs, scales, cfg.alpha, cfg.beta)
        bound_rows = global_bound_rows(work, pairs, scales, cfg.beta)

        pool = self.cut_pool if self.cut_pool is not None else CutPool()
        memo = CheckMemo()
        if cfg.root_clique_cuts:
            _root_cuts(work, pool, cfg, log, deadline)

        backend = self.backend_factory(log)
        backend.build_model(work, contexts, filters, bound_rows, pool)
        backend.register_lazy_cut_callback(Separator(work, contexts, pool, memo, cfg, log, deadline))

        limit = max(target, progress.lower) if given_u0 else target - 1
        while True:
            outcome = backend.optimize(limit, progress.lower, deadline)
            if outcome.bins is not None:
                progress.bins = _to_reduced(outcome.bins, order)
            if not outcome.exhausted:
                logger.warning(f"⚠️ Time limit reached after {outcome.nodes} nodes")
                progress.timed_out = True
                return
            if progress.bins is not None:
                progress.proven = True
                return
            # nothing within the limit: the limit itself is a lower bound violation
            progress.lower = limit + 1
            logger.info(f"📊 No packing into {limit} bins, raising the target")
            limit += 1


master_search = MasterSearch()


def solve(inst: Instance, cfg: Optional[MasterConfig] = None, log: Optional[SolveLog] = None) -> Solution:
    """
    Solve an instance to optimality or until the time limit.

    Returns:
        Solution: Optimal with L = U, or TimedOut with the best bounds found
    """
    return master_search.solve(inst, cfg, log)


def brute_force_optimum(inst: Instance) -> Tuple[int, List[PackedBin]]:
    """Partition-and-place oracle: smallest number of bins by exhaustive search. Small n only."""
    if not inst.items:
        return 0, []
    n = inst.n
    graph = incompatibility(inst)
    cache: Dict[frozenset, Optional[Placement]] = {}

    def placement(group: List[int]) -> Optional[Placement]:
        key = frozenset(group)
        if key not in cache:
            result = opp_brute_force([inst.items[j] for j in group], inst.W, inst.H)
            cache[key] = result.placement if result.feasible else None
        return cache[key]

    groups: List[List[int]] = []

    def assign(j: int, k: int) -> bool:
        if j == n:
            return True
        item = inst.items[j]
        for group in groups:
            if sum(inst.items[i].area for i in group) + item.area > inst.A:
                continue
            if any(graph[j, i] for i in group):
                continue
            group.append(j)
            if placement(group) is not None and assign(j + 1, k):
                return True
            group.pop()
        if len(groups) < k:
            groups.append([j])
            if assign(j + 1, k):
                return True
            groups.pop()
        return False

    lower = max(1, ceil(inst.total_area / inst.A))
    for k in range(lower, n + 1):
        groups.clear()
        if assign(0, k):
            return k, [PackedBin(items=list(g), placement=placement(g)) for g in groups]
    raise InvariantViolation("no partition found")

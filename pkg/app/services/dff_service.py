"""
DFF Bounds Service

Discrete dual feasible functions f0, f1, f2, the combined bound L2_CCM,
conservative scales and the bound L_BKRS. The DFF pairs and scale pairs
computed here are reused by the master as bin inequalities.
"""

import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.models.instance import Instance
from app.models.search import Axis, DffKind, DffPair, DffSpec, ReductionRecord, ScalePair
from app.services.exceptions import DffParameterError, LpError
from app.services.lp_service import LinearProgram, LpStatus, knapsack_01, solve_lp
from app.services.preprocess_service import fix_and_remove, reduce_dimensions

logger = logging.getLogger(__name__)

GUARD = 1e-9
SCALE_TOLERANCE = 1e-7
MAX_SEPARATION_ROUNDS = 200


def _check_range(k: int, C: int) -> None:
    if k < 1 or 2 * k > C:
        raise DffParameterError(f"parameter k={k} outside [1, {C}/2]")


def f0(k: int, C: int, x: int) -> int:
    """Rounds large sizes up to C, small sizes down to 0."""
    _check_range(k, C)
    if x < 0 or x > C:
        raise DffParameterError(f"size {x} outside [0, {C}]")
    if x > C - k:
        return C
    if x >= k:
        return x
    return 0


def _ckp(capacity: int, J: Sequence[int]) -> int:
    """Cardinality knapsack: longest smallest-first prefix of J fitting capacity."""
    count = 0
    used = 0
    for size in J:
        if used + size > capacity:
            break
        used += size
        count += 1
    return count


def _f1_set(k: int, C: int, sizes: Sequence[int]) -> List[int]:
    return sorted(s for s in sizes if k <= s and 2 * s <= C)


def f1(k: int, C: int, sizes: Sequence[int], x: int) -> int:
    """Data-dependent function counting how many J-items a size displaces."""
    _check_range(k, C)
    J = _f1_set(k, C, sizes)
    if 2 * x > C:
        return _ckp(C, J) - _ckp(C - x, J)
    if x >= k:
        return 1
    return 0


def f2(k: int, C: int, x: int) -> int:
    _check_range(k, C)
    if 2 * x > C:
        return 2 * (C // k - (C - x) // k)
    if 2 * x == C:
        return C // k
    return 2 * (x // k)


def evaluate(spec: DffSpec, C: int, sizes: Sequence[int], values: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, int]:
    """
    Transformed sizes and transformed capacity of one function.

    Args:
        spec (DffSpec): function kind and parameter
        C (int): capacity along the axis
        sizes (Sequence[int]): item sizes defining f1's set J
        values (Optional[Sequence[int]]): sizes to transform, defaults to sizes

    Returns:
        Tuple[np.ndarray, int]: transformed sizes and f(C)
    """
    x = np.asarray(sizes if values is None else values, dtype=np.int64)
    if spec.kind == DffKind.IDENTITY:
        return x.copy(), C
    k = spec.k
    _check_range(k, C)
    if spec.kind == DffKind.F0:
        out = np.where(x > C - k, C, np.where(x >= k, x, 0))
        return out.astype(np.int64), C
    if spec.kind == DffKind.F2:
        big = 2 * (C // k - (C - x) // k)
        half = np.full_like(x, C // k)
        small = 2 * (x // k)
        out = np.where(2 * x > C, big, np.where(2 * x == C, half, small))
        return out.astype(np.int64), 2 * (C // k)
    if spec.kind == DffKind.F1:
        J = _f1_set(k, C, sizes)
        full = _ckp(C, J)
        out = [full - _ckp(C - v, J) if 2 * v > C else (1 if v >= k else 0) for v in x.tolist()]
        return np.asarray(out, dtype=np.int64), full
    raise DffParameterError(f"cannot evaluate {spec.kind}")


def _parameters(kind: DffKind, C: int, sizes: Sequence[int]) -> List[int]:
    """Parameter values at which the function changes; other values repeat one of them."""
    half = C // 2
    if half < 1:
        return []
    if kind == DffKind.F2:
        return list(range(1, half + 1))
    candidates = {1}
    candidates.update(s for s in sizes if 1 <= s <= half)
    if kind == DffKind.F0:
        candidates.update(C - s + 1 for s in sizes if 1 <= C - s + 1 <= half)
    return sorted(candidates)


def _axis_images(axis: Axis, C: int, sizes: Sequence[int]) -> Tuple[List[DffSpec], np.ndarray, np.ndarray]:
    """Distinct (transformed sizes, capacity) images of all functions on one axis."""
    specs: List[DffSpec] = []
    rows: List[np.ndarray] = []
    caps: List[int] = []
    seen = set()

    def add(spec: DffSpec) -> None:
        values, cap = evaluate(spec, C, sizes)
        if cap <= 0:
            return
        key = (cap, values.tobytes())
        if key in seen:
            return
        seen.add(key)
        specs.append(spec)
        rows.append(values)
        caps.append(cap)

    add(DffSpec(DffKind.IDENTITY, 0, axis))
    for kind in (DffKind.F0, DffKind.F1, DffKind.F2):
        for k in _parameters(kind, C, sizes):
            add(DffSpec(kind, k, axis))

    matrix = np.vstack(rows) if rows else np.zeros((0, len(sizes)), dtype=np.int64)
    return specs, matrix, np.asarray(caps, dtype=np.int64)


def l2_ccm(inst: Instance, limit: Optional[int] = None) -> Tuple[int, List[DffPair]]:
    """
    Best area bound over all combinations of a width function and a
    height function.

    Returns:
        Tuple[int, List[DffPair]]: the bound and the pairs ranked by ratio
    """
    if not inst.items:
        return 0, []
    w_specs, Fw, cw = _axis_images(Axis.WIDTH, inst.W, inst.widths)
    h_specs, Fh, ch = _axis_images(Axis.HEIGHT, inst.H, inst.heights)

    numerators = Fw @ Fh.T
    denominators = np.outer(cw, ch)
    bounds = -(-numerators // denominators)
    ratios = numerators / denominators

    order = np.argsort(-ratios, axis=None, kind="stable")
    if limit is not None:
        order = order[:limit]
    pairs = []
    for flat in order.tolist():
        a, b = divmod(flat, len(h_specs))
        pairs.append(DffPair(w_specs[a], h_specs[b], float(ratios[a, b])))

    bound = int(bounds.max())
    logger.debug(f"📊 L2_CCM={bound} over {len(w_specs)}x{len(h_specs)} function pairs")
    return bound, pairs


class ConservativeScales:
    """
    Iterated linear programs producing modified sizes that stay feasible
    for every subset fitting along the axis. Violated subsets are found by
    0-1 knapsack separation and added as rows.
    """

    def solve_axis(self, sizes: Sequence[int], cap: int, weights: Sequence[float]) -> List[float]:
        n = len(sizes)
        lp = LinearProgram(sense="max")
        for j in range(n):
            lp.add_variable(objective=float(weights[j]))
        for j in range(n):
            lp.add_row({j: 1.0}, "<=", float(cap))

        values = [float(cap)] * n
        for _ in range(MAX_SEPARATION_ROUNDS):
            result = solve_lp(lp)
            if result.status != LpStatus.OPTIMAL:
                raise LpError(f"scale LP ended with status {result.status.value}")
            values = [max(0.0, v) for v in result.x]
            best, chosen = knapsack_01(sizes, cap, values)
            if best <= cap + SCALE_TOLERANCE:
                return values
            lp.add_row({j: 1.0 for j in chosen}, "<=", float(cap))

        # still violated after the round cap: scale down into feasibility
        best, _ = knapsack_01(sizes, cap, values)
        if best > cap:
            values = [v * cap / best for v in values]
            logger.warning(f"⚠️ Scale separation hit the round cap, rescaled by {cap / best:.4f}")
        return values

    def compute(self, inst: Instance, eta: int) -> List[ScalePair]:
        widths = [float(w) for w in inst.widths]
        heights = [float(h) for h in inst.heights]
        scales = [ScalePair(0, widths, heights)]
        if not inst.items:
            return scales

        for k in range(1, eta + 1):
            previous = scales[-1]
            try:
                new_w = self.solve_axis(inst.widths, inst.W, previous.heights)
                new_h = self.solve_axis(inst.heights, inst.H, previous.widths)
                if np.allclose(new_w, previous.widths) and np.allclose(new_h, previous.heights):
                    # stalled: push the objective toward the total modified size
                    new_w = self.solve_axis(inst.widths, inst.W, [h + 1.0 for h in previous.heights])
                    new_h = self.solve_axis(inst.heights, inst.H, [w + 1.0 for w in previous.widths])
            except LpError as e:
                logger.warning(f"⚠️ Conservative scale iteration {k} failed, keeping previous iterate: {e}")
                new_w, new_h = previous.widths, previous.heights
            scales.append(ScalePair(k, new_w, new_h))
        return scales


conservative_scale_solver = ConservativeScales()


def conservative_scales(inst: Instance, eta: int = 8) -> List[ScalePair]:
    """Scale iterates 0..eta; index 0 holds the original sizes."""
    if eta < 1:
        raise DffParameterError("eta must be at least 1")
    return conservative_scale_solver.compute(inst, eta)


def scale_pair_values(inst: Instance, scales: Sequence[ScalePair]) -> np.ndarray:
    """Total modified area for every (width iterate, height iterate) combination."""
    Wm = np.asarray([s.widths for s in scales], dtype=float)
    Hm = np.asarray([s.heights for s in scales], dtype=float)
    return Wm @ Hm.T


def rank_scale_pairs(inst: Instance, scales: Sequence[ScalePair]) -> List[Tuple[int, int, float]]:
    """(k, l, total modified area) for every scale combination, best first."""
    if not inst.items:
        return []
    totals = scale_pair_values(inst, scales)
    ranked = [(k, l, float(totals[k, l])) for k in range(len(scales)) for l in range(len(scales))]
    ranked.sort(key=lambda r: (-r[2], r[0], r[1]))
    return ranked


def l_bkrs(inst: Instance, scales: Sequence[ScalePair]) -> int:
    """Best area bound over all pairs of scale iterates."""
    if not inst.items:
        return 0
    totals = scale_pair_values(inst, scales)
    return int(ceil(float(totals.max()) / inst.A - GUARD))


def l0(inst: Instance, eta: int = 8) -> int:
    """max(L2_CCM, L_BKRS)."""
    if not inst.items:
        return 0
    bound, _ = l2_ccm(inst, limit=1)
    return max(bound, l_bkrs(inst, conservative_scales(inst, eta)))


@dataclass
class BoundReport:
    """Bound columns of the benchmark table."""

    lc: Fraction
    lc_reduced: Fraction
    l2_ccm: int
    l_bkrs: int
    l0: int
    fixed_bins: int
    removed_pct: float
    seconds: float

    def to_dict(self) -> Dict:
        return {
            "lc": float(self.lc),
            "lc_reduced": float(self.lc_reduced),
            "l2_ccm": self.l2_ccm,
            "l_bkrs": self.l_bkrs,
            "l0": self.l0,
            "fixed_bins": self.fixed_bins,
            "removed_pct": self.removed_pct,
            "seconds": self.seconds,
        }


def bound_report(
    inst: Instance,
    eta: int = 8,
    preprocessed: Optional[Tuple[Instance, ReductionRecord]] = None,
) -> BoundReport:
    """
    Lower bounds of an original instance. Bounds are taken both on the
    dimension-reduced instance and on the fully preprocessed one plus its
    fixed bins, keeping the larger value. A caller that already ran
    fix_and_remove on inst passes its result as preprocessed.
    """
    started = time.perf_counter()
    dim_reduced = reduce_dimensions(inst)
    reduced, record = preprocessed if preprocessed is not None else fix_and_remove(inst)
    fixed = record.fixed_full_bins

    l2_dim, _ = l2_ccm(dim_reduced, limit=1)
    l2_red, _ = l2_ccm(reduced, limit=1)
    bkrs_dim = l_bkrs(dim_reduced, conservative_scales(dim_reduced, eta))
    bkrs_red = l_bkrs(reduced, conservative_scales(reduced, eta)) if reduced.items else 0

    l2 = max(l2_dim, fixed + l2_red)
    bkrs = max(bkrs_dim, fixed + bkrs_red)
    return BoundReport(
        lc=Fraction(inst.total_area, inst.A),
        lc_reduced=Fraction(dim_reduced.total_area, dim_reduced.A),
        l2_ccm=l2,
        l_bkrs=bkrs,
        l0=max(l2, bkrs),
        fixed_bins=fixed,
        removed_pct=record.removed_pct,
        seconds=time.perf_counter() - started,
    )

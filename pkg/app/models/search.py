"""
Search State Models

Internal structures shared by the preprocessing, bounding, checking and
branch-and-cut services. These are plain dataclasses: they live only
inside a solve and are mutated in hot loops.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from app.models.instance import Placement


class OppVerdict(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIMEOUT = "Timeout"


@dataclass
class OppResult:
    """Outcome of a single-bin feasibility check."""

    verdict: OppVerdict
    placement: Optional[Placement] = None
    nodes: int = 0
    seconds: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.verdict == OppVerdict.FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.verdict == OppVerdict.INFEASIBLE


# item id -> sorted admissible coordinates along one axis
PositionSet = Dict[int, List[int]]


@dataclass
class BinContext:
    """
    Per-bin fixing state.

    allowed holds the items that may enter the bin, forced the item the
    clique fixing puts in it. The reduced bin size and the lifted item
    sizes are filled in by the per-bin reduction.
    """

    index: int
    allowed: FrozenSet[int]
    forced: Optional[int] = None
    excluded_by_forced: FrozenSet[int] = frozenset()
    W: int = 0
    H: int = 0
    widths: Dict[int, int] = field(default_factory=dict)
    heights: Dict[int, int] = field(default_factory=dict)


@dataclass
class Cut:
    """
    A (lifted) combinatorial cut: sum over C of x_j plus sum of alpha_j x_j
    over the lifted items is at most |C| - 1 in one bin.
    scope None means the cut holds in every bin.
    """

    base: FrozenSet[int]
    coefficients: Dict[int, int] = field(default_factory=dict)
    scope: Optional[int] = None
    activity: int = 0

    @property
    def rhs(self) -> int:
        return len(self.base) - 1

    def coefficient(self, item: int) -> int:
        if item in self.base:
            return 1
        return self.coefficients.get(item, 0)

    def lhs(self, items) -> int:
        return sum(self.coefficient(j) for j in items)

    def is_satisfied_by(self, items) -> bool:
        return self.lhs(items) <= self.rhs

    def applies_to(self, bin_index: int) -> bool:
        return self.scope is None or self.scope == bin_index

    @property
    def key(self) -> Tuple:
        return (self.base, frozenset(self.coefficients.items()), self.scope)

    def to_dict(self) -> Dict:
        return {
            "base": sorted(self.base),
            "coefficients": {str(j): a for j, a in sorted(self.coefficients.items())},
            "rhs": self.rhs,
            "scope": self.scope,
        }


class DffKind(str, Enum):
    F0 = "f0"
    F1 = "f1"
    F2 = "f2"
    IDENTITY = "identity"
    SCALE = "scale"


class Axis(str, Enum):
    WIDTH = "width"
    HEIGHT = "height"


@dataclass(frozen=True)
class DffSpec:
    """One discrete dual feasible function (or scale iterate) on one axis."""

    kind: DffKind
    k: int
    axis: Axis


@dataclass(frozen=True)
class DffPair:
    """A width/height function pair with the bound ratio it attains."""

    width: DffSpec
    height: DffSpec
    ratio: float


@dataclass
class ScalePair:
    """Modified sizes of one conservative scale iterate."""

    index: int
    widths: List[float]
    heights: List[float]


class PatternAxis(str, Enum):
    W_FEASIBLE = "W"
    H_FEASIBLE = "H"


@dataclass(frozen=True)
class Pattern:
    items: FrozenSet[int]
    axis: PatternAxis


@dataclass
class RemovalEvent:
    """An item removed next to a host item, at an offset from the host's final anchor."""

    item: int
    host: int
    rule: str
    offset: Tuple[int, int]


@dataclass
class EnlargementEvent:
    """A host enlarged by a removal rule; its pre-rule anchor is the final anchor plus offset."""

    item: int
    old_dims: Tuple[int, int]
    new_dims: Tuple[int, int]
    offset: Tuple[int, int] = (0, 0)


@dataclass
class ReductionRecord:
    """Everything needed to map a reduced solution back to the original instance."""

    original_dims: List[Tuple[int, int]]
    original_bin: Tuple[int, int]
    shrunk_bin: Tuple[int, int]
    kept_ids: List[int] = field(default_factory=list)
    enlarged: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    removed_items: List[Tuple[int, str]] = field(default_factory=list)
    fixed_hosts: List[int] = field(default_factory=list)
    events: List[object] = field(default_factory=list)

    @property
    def fixed_full_bins(self) -> int:
        return len(self.fixed_hosts)

    @property
    def removed_count(self) -> int:
        return len(self.removed_items) + len(self.fixed_hosts)

    @property
    def removed_pct(self) -> float:
        n = len(self.original_dims)
        return 100.0 * self.removed_count / n if n else 0.0

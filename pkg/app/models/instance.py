"""
Packing Domain Models

Immutable problem data (items, instances) and the certified results the
solver returns (placements, bins, solutions).
"""

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, validator


class Item(BaseModel):
    """
    A rectangular item, packed without rotation.

    Attributes:
        id (int): 0-based index inside its instance
        width (int): width w_j
        height (int): height h_j
    """

    id: int = Field(..., ge=0, description="0-based item index", example=0)
    width: int = Field(..., ge=1, description="Item width", example=6)
    height: int = Field(..., ge=1, description="Item height", example=6)

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def dims(self) -> Tuple[int, int]:
        return self.width, self.height

    class Config:
        """Pydantic configuration."""
        frozen = True


class Instance(BaseModel):
    """
    A two-dimensional bin packing instance.

    Items are indexed by position. The item list may be empty for
    instances fully resolved by preprocessing; parsed instances always
    carry at least one item.
    """

    items: List[Item] = Field(default_factory=list, description="Items in file order")
    W: int = Field(..., ge=1, description="Bin width", example=10)
    H: int = Field(..., ge=1, description="Bin height", example=10)
    m: Optional[int] = Field(None, ge=0, description="Bin-count upper bound, defaults to n")
    name: Optional[str] = Field(None, description="Instance name, usually the file stem")
    problem_class: Optional[int] = Field(None, description="Benchmark class, when known")

    @validator("items")
    def validate_item_ids(cls, v):
        """Item ids must match their positions."""
        for position, item in enumerate(v):
            if item.id != position:
                raise ValueError(f"item at position {position} has id {item.id}")
        return v

    @validator("m", always=True)
    def default_upper_bound(cls, v, values):
        if v is None:
            return len(values.get("items", []))
        return v

    @validator("H")
    def validate_items_fit(cls, v, values):
        """Every item must fit into an empty bin."""
        bin_width = values.get("W")
        for item in values.get("items", []):
            if bin_width is not None and item.width > bin_width:
                raise ValueError(f"item {item.id} exceeds bin width")
            if item.height > v:
                raise ValueError(f"item {item.id} exceeds bin height")
        return v

    @classmethod
    def from_dims(cls, W: int, H: int, dims: Sequence[Tuple[int, int]], **kwargs) -> "Instance":
        """Build an instance from (width, height) pairs."""
        items = [Item(id=k, width=w, height=h) for k, (w, h) in enumerate(dims)]
        return cls(items=items, W=W, H=H, **kwargs)

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def A(self) -> int:
        return self.W * self.H

    @property
    def widths(self) -> List[int]:
        return [item.width for item in self.items]

    @property
    def heights(self) -> List[int]:
        return [item.height for item in self.items]

    @property
    def dims(self) -> List[Tuple[int, int]]:
        return [item.dims for item in self.items]

    @property
    def total_area(self) -> int:
        return sum(item.area for item in self.items)

    def with_bin(self, W: int, H: int) -> "Instance":
        """Same items inside a different bin."""
        return Instance.from_dims(W, H, self.dims, name=self.name, problem_class=self.problem_class)

    def continuous(self) -> Fraction:
        return Fraction(self.total_area, self.A)

    class Config:
        """Pydantic configuration."""
        frozen = True
        schema_extra = {
            "example": {
                "items": [{"id": 0, "width": 6, "height": 6}, {"id": 1, "width": 4, "height": 4}],
                "W": 10,
                "H": 10,
            }
        }


class Placement(BaseModel):
    """Item id to lower-left (x, y) coordinates inside one bin."""

    coords: Dict[int, Tuple[int, int]] = Field(default_factory=dict)


class PackedBin(BaseModel):
    """One bin of a solution: its item ids and their placement."""

    items: List[int] = Field(default_factory=list)
    placement: Placement = Field(default_factory=Placement)


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIMED_OUT = "TimedOut"


class SolveStats(BaseModel):
    """Counters gathered during a solve, mirroring the benchmark columns."""

    opp_calls: int = 0
    opp_seconds: float = 0.0
    memo_hits: int = 0
    cuts_added: int = 0
    nodes: int = 0
    incumbents: int = 0
    seconds: float = 0.0
    removed_pct: float = 0.0
    fixed_bins: int = 0
    lc: float = 0.0
    lc_reduced: float = 0.0
    l0: int = 0
    u0: int = 0
    sec0: float = 0.0


class Solution(BaseModel):
    """
    Result of a solve.

    Attributes:
        status (SolveStatus): Optimal, Feasible, Infeasible or TimedOut
        lower_bound (int): proven lower bound L
        upper_bound (int): best known value U
        bins (List[PackedBin]): certified packing of value U, if one exists
        stats (SolveStats): counters
        external_bound (bool): U comes from an external value without a certificate
    """

    status: SolveStatus = SolveStatus.FEASIBLE
    lower_bound: int = 0
    upper_bound: int = 0
    bins: List[PackedBin] = Field(default_factory=list)
    stats: SolveStats = Field(default_factory=SolveStats)
    external_bound: bool = False


class VerificationResult(BaseModel):
    ok: bool
    violation: Optional[str] = None

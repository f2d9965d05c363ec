"""
Response Models

Pydantic models for API responses. These models ensure consistent
response formats and provide automatic documentation.
"""

from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional
from datetime import datetime


class Coordinate(BaseModel):
    id: int
    x: int
    y: int


class BinResponse(BaseModel):
    items: List[int]
    coords: List[Coordinate]


class SolveResponse(BaseModel):
    """
    Model for solve responses.

    Attributes:
        status (str): Optimal, Feasible, Infeasible or TimedOut
        L (int): proven lower bound
        U (int): best solution value
        external_bound (bool): U was given without a packing
        bins (List[BinResponse]): certified packing of value U
        stats (Dict[str, Any]): solve counters
    """

    status: str = Field(..., description="Solve status", example="Optimal")
    L: int = Field(..., description="Lower bound", example=3)
    U: int = Field(..., description="Upper bound", example=3)
    external_bound: bool = Field(False, description="U has no certificate")
    bins: List[BinResponse] = Field(default_factory=list)
    stats: Dict[str, Any] = Field(default_factory=dict)


class BoundResponse(BaseModel):
    """Lower bounds of an instance."""

    lc: float = Field(..., description="Continuous bound", example=1.08)
    lc_reduced: float = Field(..., description="Continuous bound after dimension reduction", example=1.0)
    l2_ccm: int = Field(..., example=3)
    l_bkrs: int = Field(..., example=3)
    l0: int = Field(..., example=3)
    fixed_bins: int = Field(0, example=0)
    removed_pct: float = Field(0.0, example=0.0)
    seconds: float = Field(0.0)


class OppResponse(BaseModel):
    verdict: str = Field(..., description="Feasible, Infeasible or Timeout", example="Feasible")
    coords: List[Coordinate] = Field(default_factory=list)
    nodes: int = 0
    seconds: float = 0.0


class EnlargedItem(BaseModel):
    id: int
    old: List[int] = Field(..., alias="from")
    new: List[int] = Field(..., alias="to")

    class Config:
        """Pydantic configuration."""
        allow_population_by_field_name = True


class RemovedItem(BaseModel):
    id: int
    rule: str


class PreprocessResponse(BaseModel):
    """Outcome of preprocessing."""

    n: int
    remaining: int
    fixed_bins: int
    removed_pct: float
    removed_items: List[RemovedItem] = Field(default_factory=list)
    reduced_bin: List[int] = Field(..., description="W* and H* after dimension reduction")
    shrunk_bin: List[int] = Field(..., description="Bin after fixing and removal")
    enlarged: List[EnlargedItem] = Field(default_factory=list)
    lc_reduced: float


class ErrorResponse(BaseModel):
    """
    Model for error responses.

    Attributes:
        error (bool): Always True for error responses
        message (str): Human-readable error message
        status_code (int): HTTP status code
        details (Optional[str]): Additional error details
    """

    error: bool = Field(
        default=True,
        description="Indicates this is an error response"
    )

    message: str = Field(
        ...,
        description="Human-readable error message",
        example="line 3: expected two dimensions"
    )

    status_code: int = Field(
        ...,
        description="HTTP status code",
        example=400
    )

    details: Optional[str] = Field(
        None,
        description="Additional error details"
    )


class HealthResponse(BaseModel):
    """
    Model for health check responses.

    Attributes:
        status (str): Health status of the service
        message (str): Descriptive message about the service status
        timestamp (datetime): When the health check was performed
    """

    status: str = Field(
        ...,
        description="Health status",
        example="healthy"
    )

    message: str = Field(
        ...,
        description="Status description",
        example="2D bin packing solver is running"
    )

    timestamp: datetime = Field(
        default_factory=datetime.now,
        description="When the health check was performed"
    )

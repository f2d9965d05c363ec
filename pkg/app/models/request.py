"""
Request Models

Pydantic models for validating incoming requests to the API.
An instance is sent either as file text or as bin dimensions plus items.
"""

from pydantic import BaseModel, Field, root_validator, validator
from typing import List, Optional

from app.models.instance import Instance
from app.services.instance_service import FORMATS, parse_instance


class ItemDims(BaseModel):
    """Width and height of one item."""

    width: int = Field(..., ge=1, example=6)
    height: int = Field(..., ge=1, example=6)


class InstanceRequest(BaseModel):
    """
    Model for instance payloads.

    Attributes:
        text (Optional[str]): instance file contents
        format (str): "native" or "2bp", used with text
        dims_order (Optional[str]): "wh" or "hw", used with text
        W (Optional[int]): bin width, used with items
        H (Optional[int]): bin height, used with items
        items (Optional[List[ItemDims]]): item sizes, used with W and H
    """

    text: Optional[str] = Field(None, description="Instance file contents", example="2\n10 10\n5 10\n5 10\n")
    format: str = Field("native", description="Format of text", example="native")
    dims_order: Optional[str] = Field(None, description="Dimension order of text", example="wh")
    W: Optional[int] = Field(None, ge=1, description="Bin width", example=10)
    H: Optional[int] = Field(None, ge=1, description="Bin height", example=10)
    items: Optional[List[ItemDims]] = Field(None, description="Item sizes")
    name: Optional[str] = Field(None, max_length=200, description="Instance name")

    @validator("format")
    def validate_format(cls, v):
        if v not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}")
        return v

    @validator("dims_order")
    def validate_dims_order(cls, v):
        if v is not None and v not in ("wh", "hw"):
            raise ValueError("dims_order must be 'wh' or 'hw'")
        return v

    @root_validator(skip_on_failure=True)
    def validate_source(cls, values):
        """Exactly one of text or (W, H, items) must be given."""
        has_text = values.get("text") is not None
        has_dims = any(values.get(k) is not None for k in ("W", "H", "items"))
        if has_text == has_dims:
            raise ValueError("send either text or W, H and items")
        if has_dims and any(values.get(k) is None for k in ("W", "H", "items")):
            raise ValueError("W, H and items are all required")
        return values

    def to_instance(self) -> Instance:
        """Build the instance; raises InstanceParseError or ValueError on bad content."""
        if self.text is not None:
            inst = parse_instance(self.text, self.format, self.dims_order)
            return inst.copy(update={"name": self.name}) if self.name else inst
        return Instance.from_dims(self.W, self.H, [(i.width, i.height) for i in self.items], name=self.name)

    class Config:
        """Pydantic configuration."""
        schema_extra = {
            "example": {
                "W": 10,
                "H": 10,
                "items": [{"width": 6, "height": 6}, {"width": 4, "height": 4}, {"width": 4, "height": 4}],
            }
        }


class SolveRequest(InstanceRequest):
    """Instance plus optional solver overrides; unset fields use the server settings."""

    time_limit: Optional[float] = Field(None, gt=0, le=86400, description="Wall-clock limit in seconds", example=60)
    alpha: Optional[int] = Field(None, ge=0, example=700)
    beta: Optional[int] = Field(None, ge=0, example=700)
    gamma: Optional[int] = Field(None, ge=0, example=0)
    tilde_n: Optional[int] = Field(None, ge=2, example=18)
    eta: Optional[int] = Field(None, ge=1, example=8)
    seed: Optional[int] = Field(None, example=0)
    u0: Optional[int] = Field(None, ge=0, description="Known solution value")


class BoundRequest(InstanceRequest):
    eta: Optional[int] = Field(None, ge=1, example=8)


class OppRequest(InstanceRequest):
    time_limit: Optional[float] = Field(None, gt=0, le=3600, description="Check time limit in seconds")

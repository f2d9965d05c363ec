"""
Solver Settings

Environment driven configuration. Values are read from BPP_* variables
or from a local .env file, and can be overridden per call.
"""

from functools import lru_cache
from typing import Optional

from pydantic import BaseSettings, Field, validator


class SolverSettings(BaseSettings):
    """Default solver parameters shared by the API and the CLI."""

    time_limit: float = Field(3600.0, description="Wall-clock limit per solve, in seconds")
    alpha: int = Field(700, description="Number of DFF pairs turned into bin inequalities")
    beta: int = Field(700, description="Number of conservative scale pairs turned into bin inequalities")
    gamma: int = Field(0, description="Extra randomized MIS passes per infeasible bin")
    tilde_n: int = Field(18, description="Bins with at least this many items are not re-checked once a bin failed")
    eta: int = Field(8, description="Conservative scale iterations")
    per_check_limit: float = Field(2.0, description="Time limit of each OPP check during MIS reduction")
    seed: int = Field(0, description="Seed for randomized MIS passes")
    threads: int = Field(1, description="Worker processes for the benchmark harness")
    dims_order: Optional[str] = Field(None, description="Dimension order forced on every file read (wh or hw); unset keeps the per-format default")
    root_clique_cuts: bool = Field(True, description="Lift incompatible pairs into cuts at the root")
    max_root_cuts: int = Field(200, description="Cap on lifted pair cuts added at the root")
    log_level: str = Field("INFO", description="Logging level")
    solve_log: Optional[str] = Field(None, description="Path of the JSON-lines solve log")

    @validator("dims_order")
    def validate_dims_order(cls, v):
        """Only the two classical orders are accepted."""
        if v is not None and v not in ("wh", "hw"):
            raise ValueError("dims_order must be 'wh' or 'hw'")
        return v

    @validator("tilde_n")
    def validate_tilde_n(cls, v):
        if v < 2:
            raise ValueError("tilde_n must be at least 2")
        return v

    class Config:
        """Pydantic configuration."""
        env_prefix = "BPP_"
        env_file = ".env"
        env_file_encoding = "utf-8"


@lru_cache()
def get_settings() -> SolverSettings:
    """Return the process-wide settings instance."""
    return SolverSettings()

"""
Configuration settings for the qpflow solver
"""

from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Solver settings loaded from environment variables (prefix QPFLOW_)"""

    model_config = SettingsConfigDict(
        env_prefix="QPFLOW_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    # Combinatorial oracle
    BUDGET: int = 10**8

    # Series engine defaults
    DEFAULT_ORDER: int = 20
    DEFAULT_TOL: float = 1e-10
    DEFAULT_T_END: float = 10.0
    SAFETY_FACTOR: float = 0.8
    MAX_STEPS: int = 1_000_000

    # Linear algebra
    RCOND_MIN: float = 1e-12

    # Parser
    DEDUP_TOL: float = 1e-12
    CANCEL_TOL: float = 1e-14

    LOG_LEVEL: str = "WARNING"


settings = Settings()


class RunConfig(BaseModel):
    """One CLI invocation"""

    model_config = ConfigDict(frozen=True)

    command: Literal["solve", "canonicalize", "verify", "tensor", "coeffs"]
    system_path: Optional[Path] = None
    t_end: float = Field(default_factory=lambda: settings.DEFAULT_T_END, gt=0)
    tol: float = Field(default_factory=lambda: settings.DEFAULT_TOL, gt=0)
    order: int = Field(default_factory=lambda: settings.DEFAULT_ORDER, ge=4, le=60)
    output_path: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"
    square: bool = False
    budget: int = Field(default_factory=lambda: settings.BUDGET, ge=1)

    # tensor explorer (1-based component index, as printed in the formulas)
    N: Optional[int] = Field(default=None, ge=1)
    k: Optional[int] = Field(default=None, ge=0)
    i: Optional[int] = Field(default=None, ge=1)

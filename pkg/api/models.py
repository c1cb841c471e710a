"""
Pydantic models for API request/response validation.
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from evopref.config import ExperimentConfig


class RunRequest(BaseModel):
    """Start one run"""
    config: ExperimentConfig = Field(default_factory=ExperimentConfig)
    seed: int = Field(default=1, description="Run seed")
    save: bool = True


class BatteryRequest(BaseModel):
    """Run several configs over the same seeds and compare them"""
    configs: List[ExperimentConfig] = Field(..., min_length=1)
    seeds: Optional[List[int]] = None
    reference: Optional[str] = Field(default=None, description="Label every other config is compared against")
    workers: Optional[int] = Field(default=None, ge=1)
    save: bool = True


class TheoryRequest(BaseModel):
    mu: int = Field(default=32, gt=0)
    T: int = Field(default=50, gt=0)
    g: int = Field(default=10, gt=0)
    m: int = Field(default=3, gt=0)
    c: float = Field(default=4.0, gt=0)
    k: int = Field(default=50, gt=0)

"""
Process settings (environment / .env) and experiment configuration.

Experiment config files are flat key=value documents with dotted section keys,
for example:

    algorithm=evopref
    mu=32
    landscape.k=20
    seeds=1-30

They are read with python-dotenv and validated by ExperimentConfig; unknown
keys are rejected.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from evopref.errors import ConfigError

# Load .env from project root (not cwd)
_env_path = Path(__file__).resolve().parent.parent / ".env"
load_dotenv(_env_path)

logger = logging.getLogger(__name__)

OUTPUT_DIR = os.getenv('EVOPREF_OUTPUT_DIR', 'results')
DB_PATH = os.getenv('EVOPREF_DB_PATH', os.path.join(OUTPUT_DIR, 'evopref_runs.db'))
NUM_WORKERS = int(os.getenv('EVOPREF_NUM_WORKERS', 4))
LOG_LEVEL = os.getenv('EVOPREF_LOG_LEVEL', 'INFO')
SNAPSHOT_EVERY = int(os.getenv('EVOPREF_SNAPSHOT_EVERY', 1))

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

ALGORITHMS = ("evopref", "moead", "smsemoa", "cmaes", "random", "gradient")
SWEEP_PARAMETERS = ("sigma0", "p_c", "grid", "tournament_size")
SWEEP_SEEDS = list(range(1, 16))


class LandscapeConfig(BaseModel):
    """Synthetic preference landscape parameters"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    k: int = Field(default=20, ge=1)
    p: int = Field(default=8, ge=1)
    m: int = Field(default=3, ge=1)
    seed: int = 0
    width: float = Field(default=0.5, gt=0)
    noise_scale: float = Field(default=0.01, ge=0)
    floor: float = Field(default=0.05, ge=0, lt=1)
    capture_factor: float = Field(default=2.0, gt=0)
    temperature: float = Field(default=0.05, gt=0)
    center_range: float = Field(default=1.0, gt=0)
    projection_gain: float = Field(default=30.0, gt=0)
    max_retries: int = Field(default=1000, ge=1)


class GenomeConfig(BaseModel):
    """Low-rank genome layout"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_layers: int = Field(default=2, ge=1)
    d: int = Field(default=32, ge=1)
    k_cols: int = Field(default=32, ge=1)
    r: int = Field(default=4, ge=1)
    alpha: float = 32.0


class ExperimentConfig(BaseModel):
    """One algorithm configuration; a battery is a list of these"""
    model_config = ConfigDict(extra="forbid")

    algorithm: Literal["evopref", "moead", "smsemoa", "cmaes", "random", "gradient"] = "evopref"
    label: Optional[str] = None

    mu: int = Field(default=32, ge=1)
    generations: int = Field(default=50, ge=0)
    grid: int = Field(default=10, ge=1)
    tournament_size: int = Field(default=2, ge=1)
    sigma0: float = Field(default=0.01, gt=0)
    sigma_init: Optional[float] = Field(default=None, gt=0)
    p_c: float = Field(default=0.3, ge=0, le=1)
    window: int = Field(default=10, ge=1)
    sigma_min: float = Field(default=1e-6, gt=0)
    sigma_max: float = Field(default=1.0, gt=0)
    weights: Tuple[float, ...] = (0.4, 0.3, 0.3)
    budget: Optional[int] = Field(default=None, ge=1)

    no_archive: bool = False
    no_crossover: bool = False
    no_crowding: bool = False
    generational: bool = False

    moead_neighbors: int = Field(default=5, ge=1)
    moead_max_replace: int = Field(default=2, ge=1)
    cmaes_popsize: int = Field(default=32, ge=2)
    cmaes_full_covariance: bool = False
    gradient_restarts: int = Field(default=30, ge=1)
    gradient_learning_rate: float = Field(default=2e-4, ge=0)
    gradient_optimizer: Literal["adam", "sgd"] = "adam"
    gradient_cosine: bool = True

    landscape: LandscapeConfig = Field(default_factory=LandscapeConfig)
    genome: GenomeConfig = Field(default_factory=GenomeConfig)

    seeds: List[int] = Field(default_factory=lambda: list(range(1, 31)))
    output_dir: str = OUTPUT_DIR
    snapshot_every: int = Field(default=SNAPSHOT_EVERY, ge=1)

    @field_validator("seeds", mode="before")
    @classmethod
    def _parse_seeds(cls, value):
        if isinstance(value, str):
            return parse_seed_list(value)
        return value

    @field_validator("weights", mode="before")
    @classmethod
    def _parse_weights(cls, value):
        if isinstance(value, str):
            return tuple(float(w) for w in value.split(",") if w.strip())
        return value

    @model_validator(mode="after")
    def _check(self):
        if len(self.weights) != self.landscape.m:
            raise ValueError(f"weights has {len(self.weights)} entries, landscape has m={self.landscape.m}")
        if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise ValueError("weights must be nonnegative with positive sum")
        if self.sigma_min > self.sigma_max:
            raise ValueError("sigma_min must not exceed sigma_max")
        if self.genome.r > min(self.genome.d, self.genome.k_cols):
            raise ValueError("genome.r must not exceed min(genome.d, genome.k_cols)")
        return self

    @property
    def name(self) -> str:
        return self.label or self.algorithm

    @property
    def evaluation_budget(self) -> int:
        """Equal-budget rule: mu * G unless overridden"""
        return self.budget if self.budget is not None else self.mu * self.generations

    @property
    def initial_sigma(self) -> float:
        return self.sigma_init if self.sigma_init is not None else self.sigma0

    def config_hash(self) -> str:
        payload = self.model_dump(mode="json", exclude={"seeds", "output_dir"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def variant(self, **updates: Any) -> "ExperimentConfig":
        """Copy with updates, re-validated"""
        data = self.model_dump()
        for key, value in updates.items():
            if key in ("landscape", "genome") and isinstance(value, dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        try:
            return ExperimentConfig(**data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e


def parse_seed_list(text: str) -> List[int]:
    """'1-30' / '1,2,5' / '1-3,7' -> list of ints"""
    seeds: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError(f"Empty seed list '{text}'")
    return seeds


def _nest(flat: Dict[str, Optional[str]]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        if value is None:
            raise ConfigError(f"Config key '{key}' has no value")
        parts = key.strip().split(".")
        if len(parts) > 2:
            raise ConfigError(f"Config key '{key}' nests deeper than one section")
        if len(parts) == 2:
            section, name = parts
            nested.setdefault(section, {})
            if not isinstance(nested[section], dict):
                raise ConfigError(f"Config key '{section}' used both as value and section")
            nested[section][name] = value
        else:
            nested[parts[0]] = value
    return nested


def config_from_mapping(flat: Dict[str, Optional[str]]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**_nest(flat))
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {e}") from e


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat dotted key=value config file"""
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    values = dotenv_values(path, interpolate=False)
    logger.info(f"Loaded {len(values)} config keys from {path}")
    return config_from_mapping(dict(values))


def dump_config(config: ExperimentConfig) -> str:
    """Inverse of load_config (flat dotted keys)"""
    lines = []
    for key, value in config.model_dump(mode="json").items():
        if isinstance(value, dict):
            for sub_key, sub_value in value.items():
                lines.append(f"{key}.{sub_key}={sub_value}")
        elif isinstance(value, list):
            lines.append(f"{key}={','.join(str(v) for v in value)}")
        elif value is None:
            continue
        else:
            lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def ablation_variants(base: ExperimentConfig) -> List[ExperimentConfig]:
    """Rows of the ablation table; population-size rows keep budget = mu * G"""
    base = base.variant(algorithm="evopref", budget=None)
    return [
        base.variant(label="Full"),
        base.variant(label="w/o Archive", no_archive=True),
        base.variant(label="w/o LoRA Crossover", no_crossover=True),
        base.variant(label="w/o Crowding", no_crowding=True),
        base.variant(label="mu=8", mu=8),
        base.variant(label="mu=64", mu=64),
        base.variant(label="Random", algorithm="random", budget=base.evaluation_budget),
    ]


SENSITIVITY_GRID: Dict[str, Dict[str, Any]] = {
    "sigma0": {"values": [0.001, 0.01, 0.05, 0.1], "default": 0.01},
    "p_c": {"values": [0.1, 0.3, 0.5, 0.7], "default": 0.3},
    "grid": {"values": [5, 10, 15, 20], "default": 10},
    "tournament_size": {"values": [2, 3, 5, 7], "default": 2},
}

"""
Pydantic records for run results and reports.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

# Coverage over the synthetic landscape stands in for prompt-cluster coverage
COVERAGE_NOTE = "coverage = distinct synthetic-landscape modes in the solution set"
GRADIENT_NOTE = "gradient = single-trajectory gradient-ascent surrogate on the smoothed landscape"


class CoverageReport(BaseModel):
    """Distinct modes represented by a solution set"""
    covered_modes: List[int]
    coverage_fraction: float = Field(..., ge=0.0, le=1.0)
    collapsed: bool
    k: int


class MetricRow(BaseModel):
    """One logged generation"""
    generation: int
    hypervolume: float
    covered_modes: int
    coverage_fraction: float
    sigma: Optional[float] = None
    evaluations_used: int
    archive_occupied: int = 0


class RunRecord(BaseModel):
    """Unit of statistical analysis; snapshots and genomes stay in memory only"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    run_id: str
    config_hash: str
    algorithm: str
    label: str
    seed: int
    landscape_seed: int
    config: Dict[str, Any]
    rows: List[MetricRow]
    sigma_trajectory: List[float] = []
    final_archive: List[Dict[str, Any]] = []
    final_objectives: List[List[float]] = []
    final_coverage: CoverageReport
    final_hypervolume: float
    evaluations_used: int
    max_evaluations: int
    wall_clock: float = 0.0
    per_mode_counts: List[int] = []
    cells_per_mode: Optional[float] = None
    extra: Dict[str, Any] = {}
    snapshot_every: int = 1

    snapshots: Dict[int, Any] = Field(default_factory=dict, exclude=True)
    solutions: List[Any] = Field(default_factory=list, exclude=True)


class RunSummary(BaseModel):
    """Row of the run index"""
    run_id: str
    config_hash: str
    algorithm: str
    label: str
    landscape_seed: int
    seed: int
    covered_modes: int
    coverage_fraction: float
    collapsed: bool
    final_hypervolume: float
    evaluations_used: int
    wall_clock: float
    record_path: Optional[str] = None


class MetricSummary(BaseModel):
    median: float
    q1: float
    q3: float


class AlgorithmSummary(BaseModel):
    label: str
    algorithm: str
    n: int
    coverage: MetricSummary
    covered_modes: MetricSummary
    hypervolume: MetricSummary
    collapse_rate: float
    evaluations_used: int


class ComparisonRow(BaseModel):
    """Mirrors the comparison table: comparison, p, adjusted p, A12, magnitude"""
    comparison: str
    statistic: float
    p_value: float
    adjusted_p: float
    a12: float
    magnitude: str
    n: int
    dropped_pairs: int = 0
    degenerate: bool = False


class FriedmanSummary(BaseModel):
    statistic: float
    df: int
    p_value: float
    n_blocks: int
    mean_ranks: Dict[str, float]
    degenerate: bool = False


class BatteryReport(BaseModel):
    metric: str = "coverage_fraction"
    reference: Optional[str] = None
    landscape_seed: int
    summaries: List[AlgorithmSummary]
    friedman: Optional[FriedmanSummary] = None
    comparisons: List[ComparisonRow] = []
    budgets_equal: bool = True
    runs: List[RunSummary] = []
    notes: List[str] = [COVERAGE_NOTE]


class SweepReport(BaseModel):
    parameter: str
    values: List[Any]
    default: Optional[Any] = None
    median_coverage: List[float]
    n_seeds: int
    run_ids: Dict[str, List[str]] = {}


class TheoryReport(BaseModel):
    """Coverage-prediction formula evaluated as printed and without c"""
    mu: int
    T: int
    g: int
    m: int
    c: float
    k: int
    predicted_modes: float
    predicted_fraction: float
    c_free_modes: float
    c_free_fraction: float
    note: str

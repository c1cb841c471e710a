"""
SVG plots with the CSV data behind each one.
"""

import logging
from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from evopref.errors import ParameterError, StorageError  # noqa: E402
from evopref.models import RunRecord  # noqa: E402
from evopref.storage import FLOAT_FORMAT  # noqa: E402

logger = logging.getLogger(__name__)


def front_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    """Final solution-set objectives, one row per point"""
    rows = []
    for r in records:
        for f in r.final_objectives:
            rows.append({"label": r.label, "seed": r.seed, "f1": f[0], "f2": f[1] if len(f) > 1 else 0.0})
    return pd.DataFrame(rows, columns=["label", "seed", "f1", "f2"])


def hypervolume_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    """One row per logged generation per run"""
    rows = [
        {"label": r.label, "seed": r.seed, "generation": row.generation, "hypervolume": row.hypervolume}
        for r in records
        for row in r.rows
    ]
    return pd.DataFrame(rows, columns=["label", "seed", "generation", "hypervolume"])


def _save(fig, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg")
    except OSError as e:
        raise StorageError(path, e) from e
    finally:
        plt.close(fig)


def _save_csv(frame: pd.DataFrame, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise StorageError(path, e) from e


def emit_plots(records: Sequence[RunRecord], output_dir: str) -> List[Path]:
    """Pareto scatter (f1 vs f2) and median hypervolume vs generation, each with its CSV"""
    if not records:
        raise ParameterError("emit_plots needs at least one run record")
    out = Path(output_dir)
    written: List[Path] = []

    fronts = front_frame(records)
    _save_csv(fronts, out / "pareto_front.csv")
    fig, ax = plt.subplots(figsize=(7, 6))
    for label, group in fronts.groupby("label", sort=False):
        ax.scatter(group["f1"], group["f2"], s=14, alpha=0.7, label=label)
    ax.set_xlabel("f1")
    ax.set_ylabel("f2")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title("Final solution sets (f1 vs f2)")
    if len(fronts):
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, out / "pareto_front.svg")
    written += [out / "pareto_front.csv", out / "pareto_front.svg"]

    hv = hypervolume_frame(records)
    _save_csv(hv, out / "hypervolume_runs.csv")
    median = hv.groupby(["label", "generation"], sort=False)["hypervolume"].median().reset_index()
    _save_csv(median, out / "hypervolume_median.csv")
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, group in median.groupby("label", sort=False):
        ax.plot(group["generation"], group["hypervolume"], label=label)
    ax.set_xlabel("generation")
    ax.set_ylabel("median hypervolume")
    ax.set_title("Hypervolume convergence")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, out / "hypervolume.svg")
    written += [out / "hypervolume_runs.csv", out / "hypervolume_median.csv", out / "hypervolume.svg"]

    logger.info(f"Wrote {len(written)} plot files to {out}")
    return written


def sweep_plot(parameter: str, values: Sequence, medians: Sequence[float], output_dir: str) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([str(v) for v in values], medians, marker="o")
    ax.set_xlabel(parameter)
    ax.set_ylabel("median coverage")
    ax.set_ylim(0, 1)
    ax.grid(True, alpha=0.3)
    path = Path(output_dir) / f"sweep_{parameter}.svg"
    _save(fig, path)
    return path

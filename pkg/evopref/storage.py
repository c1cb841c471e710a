"""
Run persistence: per-run result files plus a SQLite index of runs so reports
can be rebuilt from stored records without re-running anything.
"""

import json
import logging
import os
import sqlite3
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from evopref import config as settings
from evopref.errors import StorageError
from evopref.landscape import PreferenceLandscape
from evopref.models import BatteryReport, RunRecord, RunSummary, SweepReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"

RUNS_SCHEMA = """
    CREATE TABLE IF NOT EXISTS runs (
        run_id TEXT PRIMARY KEY,
        config_hash TEXT NOT NULL,
        algorithm TEXT NOT NULL,
        label TEXT NOT NULL,
        landscape_seed INTEGER NOT NULL,
        seed INTEGER NOT NULL,
        covered_modes INTEGER NOT NULL,
        coverage_fraction REAL NOT NULL,
        collapsed INTEGER NOT NULL,
        final_hypervolume REAL NOT NULL,
        evaluations_used INTEGER NOT NULL,
        wall_clock REAL NOT NULL,
        record_path TEXT
    )
"""


def get_db_connection(db_path: Optional[str] = None) -> sqlite3.Connection:
    """SQLite connection to the run index (usable from worker threads)"""
    path = db_path or settings.DB_PATH
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        conn = sqlite3.connect(path, check_same_thread=False, timeout=30.0)
    except (OSError, sqlite3.Error) as e:
        raise StorageError(path, e) from e
    conn.row_factory = sqlite3.Row
    conn.execute("PRAGMA busy_timeout=30000")
    conn.execute(RUNS_SCHEMA)
    return conn


def run_dir(output_dir: str, record: RunRecord) -> Path:
    safe = "".join(c if c.isalnum() or c in "-_=." else "_" for c in record.label)
    return Path(output_dir) / safe / f"seed_{record.seed}"


def metrics_frame(record: RunRecord) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in record.rows])


def metrics_csv(record: RunRecord) -> str:
    return metrics_frame(record).to_csv(index=False, float_format=FLOAT_FORMAT)


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise StorageError(path, e) from e


def write_run_files(record: RunRecord, directory: Path) -> Path:
    """config.json, generations.jsonl, metrics.csv, archive.json, record.json"""
    _write_text(directory / "config.json", json.dumps(record.config, indent=2, sort_keys=True))
    _write_text(
        directory / "generations.jsonl",
        "".join(row.model_dump_json() + "\n" for row in record.rows),
    )
    _write_text(directory / "metrics.csv", metrics_csv(record))
    _write_text(directory / "archive.json", json.dumps(record.final_archive, indent=1))
    record_path = directory / "record.json"
    _write_text(record_path, record.model_dump_json(indent=2))
    return record_path


def index_run(record: RunRecord, record_path: Optional[str], db_path: Optional[str] = None) -> None:
    conn = get_db_connection(db_path)
    try:
        conn.execute(
            """
            INSERT OR REPLACE INTO runs (
                run_id, config_hash, algorithm, label, landscape_seed, seed,
                covered_modes, coverage_fraction, collapsed, final_hypervolume,
                evaluations_used, wall_clock, record_path
            ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                record.run_id, record.config_hash, record.algorithm, record.label,
                record.landscape_seed, record.seed,
                len(record.final_coverage.covered_modes), record.final_coverage.coverage_fraction,
                int(record.final_coverage.collapsed), record.final_hypervolume,
                record.evaluations_used, record.wall_clock, record_path,
            ),
        )
        conn.commit()
    except sqlite3.Error as e:
        raise StorageError(db_path or settings.DB_PATH, e) from e
    finally:
        conn.close()


def save_run(record: RunRecord, output_dir: Optional[str] = None, db_path: Optional[str] = None) -> str:
    """Write the run's files and index it; returns the record.json path"""
    directory = run_dir(output_dir or record.config.get("output_dir") or settings.OUTPUT_DIR, record)
    record_path = str(write_run_files(record, directory))
    index_run(record, record_path, db_path)
    logger.debug(f"Saved {record.run_id} to {directory}")
    return record_path


def save_runs(grouped: "OrderedDict[str, List[RunRecord]]", output_dir: Optional[str] = None,
              db_path: Optional[str] = None) -> Dict[str, str]:
    return {r.run_id: save_run(r, output_dir, db_path) for runs in grouped.values() for r in runs}


def _summary_from_row(row: sqlite3.Row) -> RunSummary:
    data = dict(row)
    data["collapsed"] = bool(data["collapsed"])
    return RunSummary(**data)


def list_runs(
    db_path: Optional[str] = None,
    label: Optional[str] = None,
    landscape_seed: Optional[int] = None,
    algorithm: Optional[str] = None,
) -> List[RunSummary]:
    clauses, params = [], []
    for column, value in (("label", label), ("landscape_seed", landscape_seed), ("algorithm", algorithm)):
        if value is not None:
            clauses.append(f"{column} = ?")
            params.append(value)
    where = f"WHERE {' AND '.join(clauses)}" if clauses else ""
    conn = get_db_connection(db_path)
    try:
        cursor = conn.execute(f"SELECT * FROM runs {where} ORDER BY label, seed", params)
        return [_summary_from_row(row) for row in cursor.fetchall()]
    finally:
        conn.close()


def get_run(run_id: str, db_path: Optional[str] = None) -> Optional[RunSummary]:
    conn = get_db_connection(db_path)
    try:
        row = conn.execute("SELECT * FROM runs WHERE run_id = ?", (run_id,)).fetchone()
        return _summary_from_row(row) if row else None
    finally:
        conn.close()


def load_record(path: str) -> RunRecord:
    try:
        with open(path, encoding="utf-8") as f:
            return RunRecord.model_validate_json(f.read())
    except OSError as e:
        raise StorageError(path, e) from e


def load_grouped(summaries: List[RunSummary]) -> "OrderedDict[str, List[RunRecord]]":
    """Stored records grouped by label (in first-seen order), seeds ascending"""
    grouped: "OrderedDict[str, List[RunRecord]]" = OrderedDict()
    for s in summaries:
        if not s.record_path or not os.path.exists(s.record_path):
            logger.warning(f"Record file for {s.run_id} is missing ({s.record_path})")
            continue
        grouped.setdefault(s.label, []).append(load_record(s.record_path))
    for runs in grouped.values():
        runs.sort(key=lambda r: r.seed)
    return grouped


def write_landscape(landscape: PreferenceLandscape, output_dir: str) -> Path:
    path = Path(output_dir) / "landscape.json"
    _write_text(path, json.dumps(landscape.to_dict(), indent=1))
    return path


def write_battery_report(report: BatteryReport, text: str, output_dir: str, name: str = "battery") -> Path:
    """JSON report, summary/comparison CSVs and the formatted table"""
    base = Path(output_dir)
    _write_text(base / f"{name}_report.json", report.model_dump_json(indent=2))
    _write_text(base / f"{name}_report.txt", text + "\n")
    summary = pd.DataFrame([
        {
            "algorithm": s.label,
            "n": s.n,
            "coverage_median": s.coverage.median,
            "coverage_q1": s.coverage.q1,
            "coverage_q3": s.coverage.q3,
            "hypervolume_median": s.hypervolume.median,
            "hypervolume_q1": s.hypervolume.q1,
            "hypervolume_q3": s.hypervolume.q3,
            "collapse_rate": s.collapse_rate,
            "evaluations_used": s.evaluations_used,
        }
        for s in report.summaries
    ])
    _write_text(base / f"{name}_summary.csv", summary.to_csv(index=False, float_format=FLOAT_FORMAT))
    comparisons = pd.DataFrame(
        [c.model_dump() for c in report.comparisons],
        columns=["comparison", "statistic", "p_value", "adjusted_p", "a12", "magnitude", "n",
                 "dropped_pairs", "degenerate"],
    )
    _write_text(base / f"{name}_comparisons.csv", comparisons.to_csv(index=False, float_format=FLOAT_FORMAT))
    return base / f"{name}_report.json"


def write_sweep_report(report: SweepReport, output_dir: str) -> Path:
    path = Path(output_dir) / f"sweep_{report.parameter}.csv"
    frame = pd.DataFrame({
        "value": [str(v) for v in report.values],
        "median_coverage": report.median_coverage,
        "default": [v == report.default for v in report.values],
    })
    _write_text(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT))
    _write_text(path.with_suffix(".json"), report.model_dump_json(indent=2))
    return path

"""
FastAPI routes for starting runs and batteries and reading stored results.
"""

import logging
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException

from api.models import BatteryRequest, RunRequest, TheoryRequest
from evopref import config as settings
from evopref import storage
from evopref.errors import ConfigError, EvoPrefError
from evopref.metrics import theory_report
from evopref.models import BatteryReport, RunSummary, TheoryReport
from evopref.runner import run_battery, run_single, run_summary

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/run", response_model=RunSummary)
def start_run(request: RunRequest):
    """
    Execute one (config, seed) run synchronously.
    The record is saved and indexed unless save=false.
    """
    try:
        record = run_single(request.config, request.seed)
        record_path = storage.save_run(record) if request.save else None
        logger.info(f"Run {record.run_id} finished: {len(record.final_coverage.covered_modes)} modes")
        return run_summary(record, record_path)
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except EvoPrefError as e:
        logger.error(f"Run failed: {e}")
        raise HTTPException(status_code=500, detail=f"Run failed: {e}")


@router.post("/battery", response_model=BatteryReport)
def start_battery(request: BatteryRequest):
    """Run every config over the seeds and return the comparison report"""
    try:
        report, grouped = run_battery(
            request.configs,
            seeds=request.seeds,
            reference=request.reference,
            workers=request.workers or settings.NUM_WORKERS,
        )
        if request.save:
            storage.save_runs(grouped)
        logger.info(f"Battery finished: {len(report.summaries)} configs, {len(report.runs)} runs")
        return report
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except EvoPrefError as e:
        logger.error(f"Battery failed: {e}")
        raise HTTPException(status_code=500, detail=f"Battery failed: {e}")


@router.get("/runs", response_model=List[RunSummary])
def list_runs(label: Optional[str] = None, landscape_seed: Optional[int] = None, algorithm: Optional[str] = None):
    try:
        return storage.list_runs(label=label, landscape_seed=landscape_seed, algorithm=algorithm)
    except EvoPrefError as e:
        raise HTTPException(status_code=500, detail=f"Failed to list runs: {e}")


@router.get("/runs/{run_id}", response_model=RunSummary)
def get_run(run_id: str):
    try:
        summary = storage.get_run(run_id)
    except EvoPrefError as e:
        raise HTTPException(status_code=500, detail=f"Failed to read run: {e}")
    if summary is None:
        raise HTTPException(status_code=404, detail=f"Run {run_id} not found")
    return summary


@router.get("/theory", response_model=TheoryReport)
def theory(params: TheoryRequest = Depends()):
    """Coverage prediction, evaluated with and without the cells-per-mode factor"""
    return theory_report(params.mu, params.T, params.g, params.m, params.c, params.k)

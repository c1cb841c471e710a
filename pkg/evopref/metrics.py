"""
Quality and diversity indicators: exact hypervolume (m <= 3), a Monte Carlo
estimator for any m, mode coverage, collapse detection and the coupon-collector
coverage prediction.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from evopref.errors import MissingSnapshotError, ParameterError
from evopref.genome import LowRankGenome, SeedLike, make_rng
from evopref.landscape import PreferenceLandscape, modes_of, modes_of_features
from evopref.models import CoverageReport, RunRecord, TheoryReport

logger = logging.getLogger(__name__)

MC_CHUNK = 100_000


def _filter_points(points, reference) -> Tuple[np.ndarray, np.ndarray]:
    P = np.asarray(points, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if P.size == 0:
        return np.zeros((0, ref.size)), ref
    P = np.atleast_2d(P)
    if P.shape[1] != ref.size:
        raise ParameterError(f"Points have {P.shape[1]} objectives, reference has {ref.size}")
    keep = np.all(P >= ref, axis=1)
    if not np.all(keep):
        logger.warning(f"Discarding {int((~keep).sum())} point(s) below the hypervolume reference")
    return P[keep], ref


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    """Sweep in descending f1, accumulating strips above the running f2 maximum"""
    if P.shape[0] == 0:
        return 0.0
    order = np.lexsort((-P[:, 1], -P[:, 0]))
    xs = P[order, 0]
    best_y = np.maximum.accumulate(np.maximum(P[order, 1], ref[1]))
    previous = np.concatenate(([ref[1]], best_y[:-1]))
    return float(np.sum((xs - ref[0]) * (best_y - previous)))


def _hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    """Slice along f3: each slab between distinct levels is a 2D problem"""
    if P.shape[0] == 0:
        return 0.0
    levels = np.unique(P[:, 2])[::-1]
    volume = 0.0
    for i, z in enumerate(levels):
        below = levels[i + 1] if i + 1 < len(levels) else ref[2]
        slab = P[P[:, 2] >= z][:, :2]
        volume += _hv2d(slab, ref[:2]) * (z - below)
    return float(volume)


def hypervolume(points, reference: Optional[Sequence[float]] = None) -> float:
    """Exact dominated volume for m in {1, 2, 3}; reference defaults to the origin"""
    P = np.asarray(points, dtype=np.float64)
    if reference is None:
        m = P.shape[-1] if P.ndim == 2 else P.size
        reference = np.zeros(m)
    P, ref = _filter_points(P, reference)
    m = ref.size
    if P.shape[0] == 0:
        return 0.0
    if m == 1:
        return float(P[:, 0].max() - ref[0])
    if m == 2:
        return _hv2d(P, ref)
    if m == 3:
        return _hv3d(P, ref)
    raise ParameterError(f"Exact hypervolume supports m <= 3, got m={m}; use hypervolume_mc")


def hypervolume_mc(
    points,
    reference: Optional[Sequence[float]] = None,
    n_samples: int = 1_000_000,
    seed: SeedLike = 0,
) -> Tuple[float, float]:
    """Monte Carlo estimate over the bounding box; returns (estimate, standard error)"""
    P = np.asarray(points, dtype=np.float64)
    if reference is None:
        reference = np.zeros(P.shape[-1] if P.ndim == 2 else P.size)
    P, ref = _filter_points(P, reference)
    if P.shape[0] == 0:
        return 0.0, 0.0
    upper = P.max(axis=0)
    box = float(np.prod(upper - ref))
    if box == 0.0:
        return 0.0, 0.0
    rng = make_rng(seed)
    hits = 0
    remaining = n_samples
    while remaining > 0:
        n = min(MC_CHUNK, remaining)
        samples = rng.uniform(ref, upper, size=(n, ref.size))
        # sample is dominated when some point is >= it in every objective
        covered = np.zeros(n, dtype=bool)
        for p in P:
            covered |= np.all(samples <= p, axis=1)
        hits += int(covered.sum())
        remaining -= n
    frac = hits / n_samples
    return box * frac, box * math.sqrt(frac * (1.0 - frac) / n_samples)


def hv_contributions(points, reference: Sequence[float]) -> np.ndarray:
    """HV(front) - HV(front without member), per member"""
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    total = hypervolume(P, reference)
    contrib = np.empty(P.shape[0])
    for i in range(P.shape[0]):
        contrib[i] = total - hypervolume(np.delete(P, i, axis=0), reference)
    return contrib


def is_collapsed(covered: int, k: int) -> bool:
    """covered < 0.7 k, compared in integers"""
    return 10 * covered < 7 * k


def coverage_from_modes(modes: Iterable[Optional[int]], k: int) -> CoverageReport:
    covered = sorted({m for m in modes if m is not None})
    return CoverageReport(
        covered_modes=covered,
        coverage_fraction=len(covered) / k,
        collapsed=is_collapsed(len(covered), k),
        k=k,
    )


def mode_coverage(solutions: Sequence[LowRankGenome], landscape: PreferenceLandscape) -> CoverageReport:
    return coverage_from_modes(modes_of(list(solutions), landscape), landscape.k)


def coverage_of_features(points: np.ndarray, landscape: PreferenceLandscape) -> CoverageReport:
    points = np.asarray(points, dtype=np.float64)
    if points.size == 0:
        return coverage_from_modes([], landscape.k)
    return coverage_from_modes(modes_of_features(points, landscape), landscape.k)


def collapse_rate(reports: Sequence[CoverageReport]) -> float:
    if not reports:
        return 0.0
    return sum(1 for r in reports if r.collapsed) / len(reports)


def coverage_prediction(mu: int, T: int, g: int, m: int, c: float, k: int) -> float:
    """k * (1 - exp(-mu T / (g^m c)))"""
    for name, value in (("mu", mu), ("T", T), ("g", g), ("m", m), ("c", c), ("k", k)):
        if not value > 0:
            raise ParameterError(f"{name} must be positive, got {value}")
    return k * (1.0 - math.exp(-mu * T / (g ** m * c)))


def theory_report(mu: int = 32, T: int = 50, g: int = 10, m: int = 3, c: float = 4.0, k: int = 50) -> TheoryReport:
    predicted = coverage_prediction(mu, T, g, m, c, k)
    c_free = coverage_prediction(mu, T, g, m, 1.0, k)
    note = (
        f"With c={c:g} the bound gives fraction {predicted / k:.4f}; the commonly quoted "
        f"~0.80 only follows from the exponent mu*T/g^m = {mu * T / g ** m:g} (c absent). "
        "Both evaluations are reported; the discrepancy is not resolved here."
    )
    return TheoryReport(
        mu=mu, T=T, g=g, m=m, c=c, k=k,
        predicted_modes=predicted,
        predicted_fraction=predicted / k,
        c_free_modes=c_free,
        c_free_fraction=c_free / k,
        note=note,
    )


def expected_snapshot_generations(run: RunRecord) -> List[int]:
    gens = [row.generation for row in run.rows]
    if not gens:
        return []
    every = max(run.snapshot_every, 1)
    wanted = [t for t in gens if t % every == 0]
    if gens[-1] not in wanted:
        wanted.append(gens[-1])
    return wanted


def empirical_coverage_curve(run: RunRecord, landscape: PreferenceLandscape) -> Dict[int, int]:
    """Covered-mode count of the logged solution set at each snapshot generation"""
    wanted = expected_snapshot_generations(run)
    missing = [t for t in wanted if t not in run.snapshots]
    if missing:
        raise MissingSnapshotError(missing)
    return {t: len(coverage_of_features(run.snapshots[t], landscape).covered_modes) for t in wanted}

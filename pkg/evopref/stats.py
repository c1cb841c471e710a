"""
Non-parametric comparison protocol: Wilcoxon signed-rank (exact for small n),
Friedman with Holm step-down correction, Vargha-Delaney A12 and median/IQR.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats

from evopref.errors import ParameterError

logger = logging.getLogger(__name__)

EXACT_MAX_N = 25
MIN_PAIRS = 5

# 4 blocks x 3 algorithms, first column best and last worst in every block: chi2 = 8.0, df = 2
FRIEDMAN_EXAMPLE = (
    (1.0, 2.0, 3.0),
    (2.0, 5.0, 9.0),
    (0.5, 0.7, 0.9),
    (10.0, 11.0, 12.0),
)


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n: int
    dropped: int
    exact: bool
    degenerate: bool = False


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    df: int
    p_value: float
    mean_ranks: Tuple[float, ...]
    degenerate: bool = False


@dataclass(frozen=True)
class EffectSize:
    a12: float
    magnitude: str


def _finite(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


def signed_rank_counts(doubled_ranks: Sequence[int]) -> np.ndarray:
    """counts[s] = number of sign assignments whose positive doubled-rank sum is s"""
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    """Two-sided test on paired samples; zero differences are dropped first"""
    a = _finite(a, "a")
    b = _finite(b, "b")
    if a.shape != b.shape:
        raise ParameterError(f"Paired samples differ in length ({a.size} vs {b.size})")
    if a.size < MIN_PAIRS:
        raise ParameterError(f"Need at least {MIN_PAIRS} pairs, got {a.size}")

    diff = a - b
    nonzero = diff[diff != 0]
    dropped = int(diff.size - nonzero.size)
    n = int(nonzero.size)
    if n == 0:
        logger.warning("Wilcoxon: all paired differences are zero; returning p = 1.0")
        return WilcoxonResult(0.0, 1.0, 0, dropped, exact=True, degenerate=True)
    if n < MIN_PAIRS:
        logger.warning(f"Wilcoxon: only {n} non-zero differences after dropping {dropped} ties")

    ranks = stats.rankdata(np.abs(nonzero))
    w_plus = float(ranks[nonzero > 0].sum())
    w_minus = float(ranks[nonzero < 0].sum())
    w = min(w_plus, w_minus)

    if n <= EXACT_MAX_N:
        # average ranks are multiples of 1/2, so doubled ranks are integers
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = signed_rank_counts(doubled)
        tail = counts[:int(round(2 * w)) + 1].sum() / counts.sum()
        return WilcoxonResult(w, float(min(1.0, 2.0 * tail)), n, dropped, exact=True)

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts ** 3 - tie_counts) / 48.0
    if var <= 0:
        return WilcoxonResult(w, 1.0, n, dropped, exact=False, degenerate=True)
    z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var)
    return WilcoxonResult(w, float(min(1.0, 2.0 * stats.norm.sf(z))), n, dropped, exact=False)


def friedman_test(matrix) -> FriedmanResult:
    """Rows are blocks (seeds), columns are algorithms"""
    X = np.asarray(matrix, dtype=np.float64)
    if X.ndim != 2:
        raise ParameterError(f"Friedman input must be a 2-D matrix, got shape {X.shape}")
    n, k = X.shape
    if k < 3 or n < 2:
        raise ParameterError(f"Friedman test needs >= 3 algorithms and >= 2 blocks, got {k} and {n}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("Friedman input contains non-finite values")
    ranks = stats.rankdata(X, axis=1)
    mean_ranks = ranks.mean(axis=0)
    statistic = 12.0 * n / (k * (k + 1)) * float(np.sum((mean_ranks - (k + 1) / 2.0) ** 2))
    degenerate = bool(np.all(X == X[:, :1]))
    p_value = 1.0 if degenerate else float(stats.chi2.sf(statistic, k - 1))
    return FriedmanResult(statistic, k - 1, p_value, tuple(float(r) for r in mean_ranks), degenerate)


def holm_correction(pvals: Sequence[float]) -> List[float]:
    p = np.asarray(pvals, dtype=np.float64)
    if p.size == 0:
        return []
    if np.any((p < 0) | (p > 1)):
        raise ParameterError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = np.minimum(1.0, (m - np.arange(m)) * p[order])
    adjusted_sorted = np.maximum.accumulate(scaled)
    adjusted = np.empty(m)
    adjusted[order] = adjusted_sorted
    return adjusted.tolist()


def effect_magnitude(a12: float) -> str:
    if a12 > 0.71 or a12 < 0.29:
        return "large"
    if a12 > 0.64 or a12 < 0.36:
        return "medium"
    if a12 > 0.56 or a12 < 0.44:
        return "small"
    return "negligible"


def vargha_delaney_a12(x: Sequence[float], y: Sequence[float]) -> EffectSize:
    x = _finite(x, "x")
    y = _finite(y, "y")
    if x.size == 0 or y.size == 0:
        raise ParameterError("A12 needs two nonempty samples")
    greater = np.sum(x[:, None] > y[None, :])
    ties = np.sum(x[:, None] == y[None, :])
    a12 = float((greater + 0.5 * ties) / (x.size * y.size))
    return EffectSize(a12, effect_magnitude(a12))


def median_iqr(values: Sequence[float]) -> Tuple[float, float, float]:
    """(median, q1, q3) with linearly interpolated inclusive quartiles"""
    v = _finite(values, "values")
    if v.size == 0:
        raise ParameterError("median_iqr needs at least one value")
    q1, med, q3 = np.percentile(v, [25, 50, 75], method="linear")
    return float(med), float(q1), float(q3)

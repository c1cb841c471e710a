"""
Seeded synthetic preference landscape.

k Gaussian mode basins live in a p-dimensional feature space; a fixed random
projection maps the flat genome into that space. Each objective is
floor + max_i scores[i, j] * exp(-|z - c_i|^2 / (2 w_i^2)), plus per-generation
common-random-number noise. weighted_gradient differentiates a log-sum-exp
smoothing of the same surface.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from evopref.config import LandscapeConfig
from evopref.errors import ConstructionError, IncompatibilityError, ParameterError
from evopref.genome import LowRankGenome, LayerShape, total_dimension

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PreferenceMode:
    center: np.ndarray
    width: float
    scores: np.ndarray


@dataclass(frozen=True, eq=False)
class PreferenceLandscape:
    centers: np.ndarray          # (k, p)
    widths: np.ndarray           # (k,)
    scores: np.ndarray           # (k, m)
    projection: np.ndarray       # (p, D)
    noise_scale: float
    floor: float
    seed: int
    capture_factor: float = 2.0
    temperature: float = 0.05
    config: Optional[LandscapeConfig] = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def p(self) -> int:
        return self.centers.shape[1]

    @property
    def m(self) -> int:
        return self.scores.shape[1]

    @property
    def dimension(self) -> int:
        return self.projection.shape[1]

    @property
    def modes(self) -> List[PreferenceMode]:
        return [
            PreferenceMode(self.centers[i], float(self.widths[i]), self.scores[i])
            for i in range(self.k)
        ]

    def features(self, flats: np.ndarray) -> np.ndarray:
        """Project flat genome(s) into feature space"""
        flats = np.asarray(flats, dtype=np.float64)
        if flats.shape[-1] != self.dimension:
            raise IncompatibilityError(
                f"Genome dimension {flats.shape[-1]} does not match landscape dimension {self.dimension}"
            )
        return flats @ self.projection.T

    def to_dict(self) -> Dict:
        """Audit dump of the full landscape (projection omitted, it is reproducible from seed)"""
        return {
            "seed": self.seed,
            "k": self.k,
            "p": self.p,
            "m": self.m,
            "D": self.dimension,
            "floor": self.floor,
            "noise_scale": self.noise_scale,
            "capture_factor": self.capture_factor,
            "temperature": self.temperature,
            "centers": self.centers.tolist(),
            "widths": self.widths.tolist(),
            "scores": self.scores.tolist(),
        }


def _sample_scores(rng: np.random.Generator, k: int, m: int, floor: float) -> np.ndarray:
    """
    Score profiles on the positive part of a sphere of radius (1 - floor).
    Two distinct points of equal norm cannot dominate each other, so the
    profiles are mutually non-dominating.
    """
    radius = 1.0 - floor
    directions = np.abs(rng.normal(size=(k, m)))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return radius * directions


def build_landscape(
    k: int,
    p: int,
    D: int,
    seed: int,
    config: Optional[LandscapeConfig] = None,
) -> PreferenceLandscape:
    """
    Sample k mode centers uniformly in [-center_range, center_range]^p with
    pairwise separation >= 3 * max width (rejection sampling per center), then
    non-dominating score profiles and the projection matrix.
    """
    config = config or LandscapeConfig(k=k, p=p, seed=seed)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not 1 <= p <= D:
        raise ParameterError(f"Feature dimension p={p} must satisfy 1 <= p <= D={D}")
    if config.width <= 0:
        raise ParameterError(f"Mode width must be positive, got {config.width}")

    rng = np.random.default_rng([seed, 0])
    min_separation = 3.0 * config.width
    centers: List[np.ndarray] = []
    attempts = 0
    while len(centers) < k:
        candidate = rng.uniform(-config.center_range, config.center_range, size=p)
        attempts += 1
        if all(np.linalg.norm(candidate - c) >= min_separation for c in centers):
            centers.append(candidate)
            attempts = 0
        elif attempts >= config.max_retries:
            raise ConstructionError(
                f"Could not place mode {len(centers) + 1} of {k} with separation "
                f"{min_separation:.3f} after {config.max_retries} tries; use a smaller k or width"
            )

    scores = _sample_scores(np.random.default_rng([seed, 1]), k, config.m, config.floor)

    # Projection scaled so a genome-space step of std s moves features by ~gain * s per axis
    proj_rng = np.random.default_rng([seed, 2])
    projection = config.projection_gain * proj_rng.normal(size=(p, D)) / np.sqrt(D)

    landscape = PreferenceLandscape(
        centers=np.array(centers),
        widths=np.full(k, config.width),
        scores=scores,
        projection=projection,
        noise_scale=config.noise_scale,
        floor=config.floor,
        seed=seed,
        capture_factor=config.capture_factor,
        temperature=config.temperature,
        config=config,
    )
    logger.debug(f"Built landscape seed={seed}: k={k}, p={p}, D={D}")
    return landscape


def landscape_for(config: LandscapeConfig, shape: Sequence[LayerShape]) -> PreferenceLandscape:
    return build_landscape(config.k, config.p, total_dimension(shape), config.seed, config)


def _basins(L: PreferenceLandscape, z: np.ndarray) -> np.ndarray:
    """phi[n, i] = exp(-|z_n - c_i|^2 / (2 w_i^2))"""
    sq = np.sum((z[:, None, :] - L.centers[None, :, :]) ** 2, axis=2)
    return np.exp(-sq / (2.0 * L.widths[None, :] ** 2))


def generation_seed(run_seed: int, block: int) -> int:
    """Noise seed for the block-th batch of mu evaluations; shared by every algorithm"""
    return int(np.random.SeedSequence([int(run_seed), int(block)]).generate_state(1)[0])


def generation_noise(L: PreferenceLandscape, gen_seed: Optional[int]) -> np.ndarray:
    """Per-objective noise from a stream keyed only on (landscape seed, gen_seed, j)"""
    if gen_seed is None or L.noise_scale == 0:
        return np.zeros(L.m)
    return np.array([
        np.random.default_rng([L.seed, int(gen_seed), j]).normal(0.0, L.noise_scale)
        for j in range(L.m)
    ])


def noiseless_objectives(flats: np.ndarray, L: PreferenceLandscape) -> np.ndarray:
    flats = np.atleast_2d(flats)
    z = L.features(flats)
    phi = _basins(L, z)
    # (n, k, m) -> max over modes
    values = np.max(phi[:, :, None] * L.scores[None, :, :], axis=1)
    return np.minimum(L.floor + values, 1.0)


def evaluate_batch(
    genomes: Sequence[LowRankGenome],
    L: PreferenceLandscape,
    gen_seed: Optional[int],
) -> np.ndarray:
    """Objective matrix (n, m); all rows share the same noise realization"""
    if len(genomes) == 0:
        return np.zeros((0, L.m))
    flats = np.stack([g.flat for g in genomes])
    values = noiseless_objectives(flats, L) + generation_noise(L, gen_seed)[None, :]
    return np.clip(values, 0.0, 1.0)


def evaluate(g: LowRankGenome, L: PreferenceLandscape, gen_seed: Optional[int]) -> np.ndarray:
    return evaluate_batch([g], L, gen_seed)[0]


def modes_of_features(z: np.ndarray, L: PreferenceLandscape) -> List[Optional[int]]:
    """Nearest-center mode per feature point, None outside every capture radius"""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if z.shape[0] == 0:
        return []
    dist = np.sqrt(np.sum((z[:, None, :] - L.centers[None, :, :]) ** 2, axis=2))
    result: List[Optional[int]] = []
    for row in dist:
        nearest = float(np.min(row))
        # lowest index among centers tied with the nearest to 1e-12
        i = int(np.flatnonzero(row <= nearest + 1e-12)[0])
        result.append(i if row[i] <= L.widths[i] * L.capture_factor else None)
    return result


def mode_of(g: LowRankGenome, L: PreferenceLandscape) -> Optional[int]:
    return modes_of_features(L.features(g.flat), L)[0]


def modes_of(genomes: Sequence[LowRankGenome], L: PreferenceLandscape) -> List[Optional[int]]:
    if len(genomes) == 0:
        return []
    return modes_of_features(L.features(np.stack([g.flat for g in genomes])), L)


def smoothed_objectives(flats: np.ndarray, L: PreferenceLandscape) -> np.ndarray:
    """floor + T * logsumexp_i(scores[i, j] * phi_i / T): the differentiable surrogate"""
    flats = np.atleast_2d(flats)
    z = L.features(flats)
    phi = _basins(L, z)
    u = phi[:, :, None] * L.scores[None, :, :] / L.temperature       # (n, k, m)
    u_max = np.max(u, axis=1, keepdims=True)
    lse = u_max[:, 0, :] + np.log(np.sum(np.exp(u - u_max), axis=1))
    return L.floor + L.temperature * lse


def weighted_gradient(g: LowRankGenome, L: PreferenceLandscape, weights: Sequence[float]) -> np.ndarray:
    """Analytic gradient of sum_j w_j * f~_j with respect to the flat genome"""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (L.m,) or np.any(weights < 0) or weights.sum() <= 0:
        raise ParameterError(f"Weights must be {L.m} nonnegative values with positive sum")
    z = L.features(g.flat)
    diff = z[None, :] - L.centers                                     # (k, p)
    phi = np.exp(-np.sum(diff ** 2, axis=1) / (2.0 * L.widths ** 2))  # (k,)
    u = phi[:, None] * L.scores / L.temperature                       # (k, m)
    soft = np.exp(u - np.max(u, axis=0, keepdims=True))
    soft /= np.sum(soft, axis=0, keepdims=True)                       # softmax over modes per objective
    # d f~_j / d phi_i = soft[i, j] * scores[i, j]
    dphi = np.sum(soft * L.scores * weights[None, :], axis=1)          # (k,)
    # d phi_i / d z = -phi_i * (z - c_i) / w_i^2
    grad_z = -np.sum((dphi * phi / L.widths ** 2)[:, None] * diff, axis=0)
    return L.projection.T @ grad_z


def genome_at_feature(
    point: np.ndarray,
    L: PreferenceLandscape,
    shape: Sequence[LayerShape],
    alpha: float = 32.0,
    genome_id: Optional[str] = None,
) -> LowRankGenome:
    """Minimum-norm genome whose projection equals point"""
    flat, *_ = np.linalg.lstsq(L.projection, np.asarray(point, dtype=np.float64), rcond=None)
    return LowRankGenome(flat, shape, alpha, genome_id)


def weighted_score(objectives: np.ndarray, weights: Sequence[float]) -> np.ndarray:
    return np.asarray(objectives) @ np.asarray(weights, dtype=np.float64)

"""
Low-rank factorized genome and its variation operators.

A genome stores one flat float64 parameter vector; per-layer (B, A) factor
matrices are read-only views into it, laid out layer by layer as B (d x r,
row-major) followed by A (r x k_cols, row-major).
"""

import base64
import logging
import uuid
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from evopref.errors import (
    IncompatibilityError,
    LayerIndexError,
    ParameterError,
    ShapeError,
)

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 32.0
GAMMA_LOW = 0.3
GAMMA_HIGH = 0.7
RANK_REL_TOL = 1e-8

SeedLike = Union[int, np.random.Generator]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Accept an integer seed or an existing generator"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class LayerShape:
    d: int
    k_cols: int
    r: int

    def __post_init__(self):
        if self.d < 1 or self.k_cols < 1 or self.r < 1:
            raise ShapeError(f"Layer dimensions must be positive, got {self}")
        if self.r > min(self.d, self.k_cols):
            raise ShapeError(f"Rank {self.r} exceeds min(d={self.d}, k_cols={self.k_cols})")

    @property
    def size(self) -> int:
        return (self.d + self.k_cols) * self.r


def default_shape(n_layers: int = 2, d: int = 32, k_cols: int = 32, r: int = 4) -> List[LayerShape]:
    """Desk-scale genome shape: 2 layers of 32x32 at rank 4 (D = 512)"""
    return [LayerShape(d, k_cols, r) for _ in range(n_layers)]


def total_dimension(shape: Sequence[LayerShape]) -> int:
    return sum(layer.size for layer in shape)


class LowRankGenome:
    """Immutable list of (B, A) factor pairs backed by one flat vector."""

    __slots__ = ("shape", "alpha", "id", "_flat")

    def __init__(
        self,
        flat: np.ndarray,
        shape: Sequence[LayerShape],
        alpha: float = DEFAULT_ALPHA,
        genome_id: Optional[str] = None,
    ):
        shape = tuple(shape)
        flat = np.array(flat, dtype=np.float64).ravel()
        if flat.shape[0] != total_dimension(shape):
            raise ShapeError(
                f"Flat vector has {flat.shape[0]} entries, shape needs {total_dimension(shape)}"
            )
        if not np.all(np.isfinite(flat)):
            raise ParameterError("Genome entries must be finite")
        flat.setflags(write=False)
        self.shape = shape
        self.alpha = float(alpha)
        self.id = genome_id or uuid.uuid4().hex[:12]
        self._flat = flat

    @property
    def dimension(self) -> int:
        return self._flat.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self._flat

    @property
    def layers(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        result = []
        offset = 0
        for layer in self.shape:
            b_size = layer.d * layer.r
            a_size = layer.r * layer.k_cols
            B = self._flat[offset:offset + b_size].reshape(layer.d, layer.r)
            A = self._flat[offset + b_size:offset + b_size + a_size].reshape(layer.r, layer.k_cols)
            result.append((B, A))
            offset += b_size + a_size
        return result

    def with_flat(self, flat: np.ndarray, genome_id: Optional[str] = None) -> "LowRankGenome":
        return LowRankGenome(flat, self.shape, self.alpha, genome_id)

    def copy(self) -> "LowRankGenome":
        return LowRankGenome(self._flat.copy(), self.shape, self.alpha, self.id)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LowRankGenome):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.alpha == other.alpha
            and np.array_equal(self._flat, other._flat)
        )

    def __hash__(self):
        return hash((self.shape, self.alpha, self._flat.tobytes()))

    def __repr__(self) -> str:
        return f"LowRankGenome(id={self.id}, layers={len(self.shape)}, D={self.dimension})"


def flatten(g: LowRankGenome) -> np.ndarray:
    """Return a writable copy of the flat parameter vector"""
    return g.flat.copy()


def unflatten(
    flat: np.ndarray,
    shape: Sequence[LayerShape],
    alpha: float = DEFAULT_ALPHA,
    genome_id: Optional[str] = None,
) -> LowRankGenome:
    return LowRankGenome(flat, shape, alpha, genome_id)


def from_layers(
    layers: Sequence[Tuple[np.ndarray, np.ndarray]],
    alpha: float = DEFAULT_ALPHA,
    genome_id: Optional[str] = None,
) -> LowRankGenome:
    """Build a genome from explicit (B, A) pairs"""
    shape = []
    parts = []
    for B, A in layers:
        B = np.asarray(B, dtype=np.float64)
        A = np.asarray(A, dtype=np.float64)
        if B.ndim != 2 or A.ndim != 2 or B.shape[1] != A.shape[0]:
            raise ShapeError(f"Factor shapes {B.shape} and {A.shape} do not conform")
        shape.append(LayerShape(B.shape[0], A.shape[1], B.shape[1]))
        parts.extend([B.ravel(), A.ravel()])
    return LowRankGenome(np.concatenate(parts), shape, alpha, genome_id)


def random_init(
    shape: Sequence[LayerShape],
    sigma_init: float,
    seed: SeedLike,
    alpha: float = DEFAULT_ALPHA,
    genome_id: Optional[str] = None,
) -> LowRankGenome:
    """Every B and A entry drawn i.i.d. from N(0, sigma_init^2)"""
    if not np.isfinite(sigma_init) or sigma_init <= 0:
        raise ParameterError(f"sigma_init must be positive and finite, got {sigma_init}")
    shape = [layer if isinstance(layer, LayerShape) else LayerShape(*layer) for layer in shape]
    rng = make_rng(seed)
    flat = rng.normal(0.0, sigma_init, size=total_dimension(shape))
    return LowRankGenome(flat, shape, alpha, genome_id)


def gaussian_mutate(
    parent: LowRankGenome,
    sigma: float,
    seed: SeedLike,
    genome_id: Optional[str] = None,
) -> LowRankGenome:
    """Child = parent + N(0, sigma^2) noise on every factor entry"""
    if not np.isfinite(sigma) or sigma <= 0:
        raise ParameterError(f"Mutation sigma must be positive and finite, got {sigma}")
    rng = make_rng(seed)
    noise = rng.normal(0.0, sigma, size=parent.dimension)
    return parent.with_flat(parent.flat + noise, genome_id)


def rank_preserving_crossover(
    p1: LowRankGenome,
    p2: LowRankGenome,
    gamma: float,
    genome_id: Optional[str] = None,
) -> LowRankGenome:
    """
    Convex combination applied to the factors, not to the products:
    A' = gamma*A1 + (1-gamma)*A2 and B' = gamma*B1 + (1-gamma)*B2 per layer.
    The child's B'A' therefore keeps rank <= r.
    """
    if p1.shape != p2.shape:
        raise IncompatibilityError("Crossover parents have different layer shapes")
    if p1.alpha != p2.alpha:
        raise IncompatibilityError(f"Crossover parents differ in alpha ({p1.alpha} vs {p2.alpha})")
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError(f"gamma must lie in [0, 1], got {gamma}")
    if gamma == 1.0:
        child = p1.flat.copy()
    elif gamma == 0.0:
        child = p2.flat.copy()
    else:
        child = gamma * p1.flat + (1.0 - gamma) * p2.flat
    return p1.with_flat(child, genome_id)


def sample_gamma(seed: SeedLike) -> float:
    return float(make_rng(seed).uniform(GAMMA_LOW, GAMMA_HIGH))


def effective_delta(g: LowRankGenome, layer_index: int) -> np.ndarray:
    """(alpha / r) * B @ A for one layer"""
    if not 0 <= layer_index < len(g.shape):
        raise LayerIndexError(f"Layer index {layer_index} out of range for {len(g.shape)} layers")
    B, A = g.layers[layer_index]
    r = g.shape[layer_index].r
    return (g.alpha / r) * (B @ A)


def numerical_rank(matrix: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    """Count singular values above rel_tol * largest singular value"""
    s = np.linalg.svd(np.asarray(matrix, dtype=np.float64), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def genome_to_dict(g: LowRankGenome, encoding: str = "plain") -> Dict:
    """
    JSON-ready snapshot: shape header plus per-layer matrices.
    encoding='plain' writes nested lists, 'base64' writes little-endian float64 bytes.
    """
    layers = []
    for (B, A), layer in zip(g.layers, g.shape):
        if encoding == "plain":
            layers.append({"B": B.tolist(), "A": A.tolist()})
        elif encoding == "base64":
            layers.append({
                "B": base64.b64encode(np.ascontiguousarray(B, dtype="<f8").tobytes()).decode("ascii"),
                "A": base64.b64encode(np.ascontiguousarray(A, dtype="<f8").tobytes()).decode("ascii"),
            })
        else:
            raise ParameterError(f"Unknown genome encoding '{encoding}'")
    return {
        "id": g.id,
        "alpha": g.alpha,
        "encoding": encoding,
        "shape": [{"d": s.d, "k_cols": s.k_cols, "r": s.r} for s in g.shape],
        "layers": layers,
    }


def genome_from_dict(data: Dict) -> LowRankGenome:
    shape = [LayerShape(int(s["d"]), int(s["k_cols"]), int(s["r"])) for s in data["shape"]]
    encoding = data.get("encoding", "plain")
    parts = []
    for layer, payload in zip(shape, data["layers"]):
        for key, rows, cols in (("B", layer.d, layer.r), ("A", layer.r, layer.k_cols)):
            value = payload[key]
            if encoding == "base64" or isinstance(value, str):
                arr = np.frombuffer(base64.b64decode(value), dtype="<f8")
            else:
                arr = np.asarray(value, dtype=np.float64)
            if arr.size != rows * cols:
                raise ShapeError(f"Layer payload {key} has {arr.size} entries, expected {rows * cols}")
            parts.append(arr.reshape(-1))
    return LowRankGenome(np.concatenate(parts), shape, float(data.get("alpha", DEFAULT_ALPHA)), data.get("id"))

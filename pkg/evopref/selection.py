"""
Pareto-dominance machinery (maximization): non-dominated sorting, crowding
distance, k-way tournaments and NSGA-II (mu + mu) truncation.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from evopref.errors import ParameterError
from evopref.genome import SeedLike, make_rng

logger = logging.getLogger(__name__)


def _as_matrix(objs) -> np.ndarray:
    arr = np.asarray(objs, dtype=np.float64)
    if arr.size == 0:
        return arr.reshape(0, 0)
    if arr.ndim != 2:
        raise ParameterError(f"Objective vectors must form an (n, m) matrix, got shape {arr.shape}")
    return arr


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ParameterError(f"Cannot compare objective vectors of length {a.size} and {b.size}")
    return bool(np.all(a >= b) and np.any(a > b))


def dominance_matrix(objs) -> np.ndarray:
    """D[i, j] is True when member i dominates member j"""
    F = _as_matrix(objs)
    if F.shape[0] == 0:
        return np.zeros((0, 0), dtype=bool)
    geq = np.all(F[:, None, :] >= F[None, :, :], axis=2)
    gt = np.any(F[:, None, :] > F[None, :, :], axis=2)
    return geq & gt


def fast_nondominated_sort(objs) -> List[List[int]]:
    """
    Deb's front peeling. Fronts are lists of input indices in input order;
    front 0 holds the members dominated by nobody.
    """
    F = _as_matrix(objs)
    n = F.shape[0]
    if n == 0:
        return []
    D = dominance_matrix(F)
    dominated_count = D.sum(axis=0)
    fronts: List[List[int]] = []
    current = [i for i in range(n) if dominated_count[i] == 0]
    while current:
        fronts.append(current)
        for p in current:
            dominated_count[D[p]] -= 1
        # members whose counter just reached zero, kept in input order
        assigned = set(i for front in fronts for i in front)
        current = [q for q in range(n) if dominated_count[q] == 0 and q not in assigned]
    return fronts


def front_ranks(fronts: Sequence[Sequence[int]], n: int) -> np.ndarray:
    ranks = np.empty(n, dtype=np.int64)
    for r, front in enumerate(fronts):
        ranks[list(front)] = r
    return ranks


def crowding_distance(front) -> np.ndarray:
    """Normalized neighbour-gap crowding; extremes per objective get +inf"""
    F = _as_matrix(front)
    n = F.shape[0]
    if n == 0:
        return np.zeros(0)
    distances = np.zeros(n)
    if n <= 2:
        distances[:] = np.inf
        return distances
    for j in range(F.shape[1]):
        order = np.argsort(F[:, j], kind="stable")
        values = F[order, j]
        distances[order[0]] = np.inf
        distances[order[-1]] = np.inf
        span = values[-1] - values[0]
        if span == 0:
            continue
        distances[order[1:-1]] += (values[2:] - values[:-2]) / span
    return distances


@dataclass
class RankedPopulation:
    """Members with their front ranks and crowding distances"""
    ids: List[str]
    objectives: np.ndarray
    fronts: List[List[int]]
    ranks: np.ndarray
    crowding: np.ndarray
    payload: List[Any] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def members(self) -> List[Tuple[str, np.ndarray]]:
        return list(zip(self.ids, self.objectives))


def rank_population(
    objs,
    ids: Optional[Sequence[str]] = None,
    payload: Optional[Sequence[Any]] = None,
    tie_rng: Optional[np.random.Generator] = None,
) -> RankedPopulation:
    """
    Sort into fronts and compute per-front crowding. With tie_rng set, crowding
    is replaced by uniform random values (the crowding-free ablation).
    """
    F = _as_matrix(objs)
    n = F.shape[0]
    fronts = fast_nondominated_sort(F)
    crowding = np.zeros(n)
    if tie_rng is not None:
        crowding = tie_rng.uniform(size=n)
    else:
        for front in fronts:
            crowding[front] = crowding_distance(F[front])
    return RankedPopulation(
        ids=list(ids) if ids is not None else [str(i) for i in range(n)],
        objectives=F,
        fronts=fronts,
        ranks=front_ranks(fronts, n),
        crowding=crowding,
        payload=list(payload) if payload is not None else [],
    )


def tournament(pop: RankedPopulation, seed: SeedLike, size: int = 2) -> int:
    """
    Draw `size` contestants with replacement. Lower rank wins, then higher
    crowding, then a uniform pick among the remaining ties (same stream).
    """
    if len(pop) == 0:
        raise ParameterError("Tournament on an empty population")
    if size < 1:
        raise ParameterError(f"Tournament size must be >= 1, got {size}")
    rng = make_rng(seed)
    contestants = rng.integers(0, len(pop), size=size)
    best_rank = pop.ranks[contestants].min()
    contestants = contestants[pop.ranks[contestants] == best_rank]
    best_crowd = pop.crowding[contestants].max()
    contestants = contestants[pop.crowding[contestants] == best_crowd]
    if len(contestants) == 1:
        return int(contestants[0])
    return int(contestants[rng.integers(0, len(contestants))])


def binary_tournament(pop: RankedPopulation, seed: SeedLike) -> int:
    return tournament(pop, seed, size=2)


def select_survivor_indices(
    objs,
    mu: int,
    tie_rng: Optional[np.random.Generator] = None,
) -> List[int]:
    """Whole fronts in rank order, splitting front cut by descending crowding (stable)"""
    if mu <= 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    F = _as_matrix(objs)
    n = F.shape[0]
    if n < mu:
        raise ParameterError(f"Environmental selection needs at least mu={mu} candidates, got {n}")
    survivors: List[int] = []
    for front in fast_nondominated_sort(F):
        if len(survivors) + len(front) <= mu:
            survivors.extend(front)
            if len(survivors) == mu:
                break
            continue
        if tie_rng is not None:
            crowd = tie_rng.uniform(size=len(front))
        else:
            crowd = crowding_distance(F[front])
        order = np.argsort(-crowd, kind="stable")
        survivors.extend(front[i] for i in order[:mu - len(survivors)])
        break
    return survivors


def environmental_selection(
    parents_plus_offspring: Sequence[Tuple[Any, Sequence[float]]],
    mu: int,
    tie_rng: Optional[np.random.Generator] = None,
) -> List[Tuple[Any, np.ndarray]]:
    """NSGA-II truncation of (genome, objectives) pairs down to mu survivors"""
    if mu <= 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    if len(parents_plus_offspring) == mu:
        return [(g, np.asarray(f, dtype=np.float64)) for g, f in parents_plus_offspring]
    objs = np.array([f for _, f in parents_plus_offspring], dtype=np.float64)
    keep = select_survivor_indices(objs, mu, tie_rng)
    return [(parents_plus_offspring[i][0], objs[i]) for i in keep]


def nondominated_indices(objs) -> List[int]:
    fronts = fast_nondominated_sort(objs)
    return fronts[0] if fronts else []

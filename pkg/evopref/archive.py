"""
Grid archive over objective space: g cells per axis, at most one elite per cell.
A newcomer takes a cell only when the cell is empty or it dominates the occupant.

Cells live in objective space while modes live in feature space, so with a
landscape attached the archive also tracks each elite's mode and refuses a
replacement that would evict the last member of a covered mode.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from evopref.errors import ParameterError, RangeError
from evopref.genome import LowRankGenome, SeedLike, genome_to_dict, make_rng
from evopref.landscape import PreferenceLandscape, mode_of, modes_of
from evopref.selection import dominates

logger = logging.getLogger(__name__)

Cell = Tuple[int, ...]

BALANCE_MARGIN = 0.1
# preset for picking one deployable elite; leans on the second (safety) objective
SAFETY_EMPHASIS_WEIGHTS = (0.3, 0.4, 0.3)


class InsertOutcome(str, Enum):
    INSERTED = "inserted"
    REPLACED = "replaced"
    REJECTED = "rejected"


def cell_index(f: Sequence[float], g: int) -> Cell:
    """floor(g * f_j) per axis, with f_j == 1.0 mapped to the top cell g - 1"""
    if g < 1:
        raise ParameterError(f"Grid resolution must be >= 1, got {g}")
    f = np.asarray(f, dtype=np.float64)
    if np.any(~np.isfinite(f)) or np.any(f < 0.0) or np.any(f > 1.0):
        raise RangeError(f"Objective vector {f.tolist()} lies outside [0, 1]")
    idx = np.minimum(np.floor(g * f).astype(np.int64), g - 1)
    return tuple(int(i) for i in idx)


@dataclass(frozen=True, eq=False)
class Elite:
    genome: LowRankGenome
    objectives: np.ndarray
    generation: int
    cell: Cell
    mode: Optional[int] = None


@dataclass
class OccupancyStats:
    occupied: int
    occupancy_fraction: float
    per_mode_counts: List[int]
    unassigned: int = 0

    @property
    def cells_per_mode(self) -> float:
        """Average archive cells per covered mode (0 when nothing is covered)"""
        covered = sum(1 for c in self.per_mode_counts if c > 0)
        if covered == 0:
            return 0.0
        return sum(self.per_mode_counts) / covered


class GridArchive:
    """Sparse map from cell tuple to Elite; single writer"""

    def __init__(self, g: int = 10, m: int = 3, landscape: Optional[PreferenceLandscape] = None):
        if g < 1 or m < 1:
            raise ParameterError(f"Archive needs g >= 1 and m >= 1, got g={g}, m={m}")
        if landscape is not None and landscape.m != m:
            raise ParameterError(f"Landscape has {landscape.m} objectives, archive expects {m}")
        self.g = g
        self.m = m
        self.landscape = landscape
        self.cells: Dict[Cell, Elite] = {}
        self.mode_counts: Dict[int, int] = {}
        self.protected_rejections = 0

    @property
    def capacity(self) -> int:
        return self.g ** self.m

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, cell: Cell) -> bool:
        return cell in self.cells

    def elites(self) -> List[Elite]:
        """Occupants in sorted cell order"""
        return [self.cells[c] for c in sorted(self.cells)]

    def genomes(self) -> List[LowRankGenome]:
        return [e.genome for e in self.elites()]

    def objectives(self) -> np.ndarray:
        elites = self.elites()
        if not elites:
            return np.zeros((0, self.m))
        return np.stack([e.objectives for e in elites])

    def covered_modes(self) -> Set[int]:
        return {mode for mode, n in self.mode_counts.items() if n > 0}

    def _place(self, elite: Elite) -> None:
        old = self.cells.get(elite.cell)
        if old is not None and old.mode is not None:
            self.mode_counts[old.mode] -= 1
        if elite.mode is not None:
            self.mode_counts[elite.mode] = self.mode_counts.get(elite.mode, 0) + 1
        self.cells[elite.cell] = elite

    def try_insert(
        self,
        genome: LowRankGenome,
        f: Sequence[float],
        generation: int,
        mode: Optional[int] = None,
    ) -> InsertOutcome:
        """
        mode is the newcomer's landscape mode; when the archive carries a
        landscape and mode is not given it is computed here.
        """
        f = np.array(f, dtype=np.float64)
        if f.shape != (self.m,):
            raise ParameterError(f"Archive expects {self.m} objectives, got {f.shape}")
        cell = cell_index(f, self.g)
        occupant = self.cells.get(cell)
        f.setflags(write=False)
        if mode is None and self.landscape is not None:
            mode = mode_of(genome, self.landscape)
        if occupant is None:
            self._place(Elite(genome.copy(), f, generation, cell, mode))
            return InsertOutcome.INSERTED
        if not dominates(f, occupant.objectives):
            # incomparable or equal newcomers lose to the incumbent
            return InsertOutcome.REJECTED
        if occupant.mode is not None and occupant.mode != mode and self.mode_counts.get(occupant.mode, 0) <= 1:
            self.protected_rejections += 1
            logger.debug(f"cell {cell}: kept last member of mode {occupant.mode} against a dominating newcomer")
            return InsertOutcome.REJECTED
        self._place(Elite(genome.copy(), f, generation, cell, mode))
        return InsertOutcome.REPLACED

    def insert_batch(
        self,
        genomes: Sequence[LowRankGenome],
        objectives: np.ndarray,
        generation: int,
    ) -> Dict[InsertOutcome, int]:
        """Offer members in index order"""
        counts = {outcome: 0 for outcome in InsertOutcome}
        if self.landscape is not None:
            modes = modes_of(list(genomes), self.landscape)
        else:
            modes = [None] * len(genomes)
        for genome, f, mode in zip(genomes, objectives, modes):
            counts[self.try_insert(genome, f, generation, mode)] += 1
        return counts

    def sample_partner(self, seed: SeedLike) -> Optional[LowRankGenome]:
        """Uniform over occupied cells, None when empty"""
        if not self.cells:
            return None
        rng = make_rng(seed)
        keys = sorted(self.cells)
        return self.cells[keys[int(rng.integers(0, len(keys)))]].genome

    def feature_points(self, landscape: PreferenceLandscape) -> np.ndarray:
        genomes = self.genomes()
        if not genomes:
            return np.zeros((0, landscape.p))
        return landscape.features(np.stack([g.flat for g in genomes]))

    def snapshot(self, include_genomes: bool = False) -> List[Dict]:
        """JSON-ready list of occupants in cell order"""
        rows = []
        for e in self.elites():
            row = {
                "cell": list(e.cell),
                "objectives": e.objectives.tolist(),
                "generation": e.generation,
                "genome_id": e.genome.id,
            }
            if include_genomes:
                row["genome"] = genome_to_dict(e.genome)
            rows.append(row)
        return rows


def occupancy_stats(arch: GridArchive, landscape: Optional[PreferenceLandscape] = None) -> OccupancyStats:
    k = landscape.k if landscape is not None else 0
    per_mode = [0] * k
    unassigned = 0
    if landscape is not None and len(arch):
        for mode in modes_of(arch.genomes(), landscape):
            if mode is None:
                unassigned += 1
            else:
                per_mode[mode] += 1
    return OccupancyStats(
        occupied=len(arch),
        occupancy_fraction=len(arch) / arch.capacity,
        per_mode_counts=per_mode,
        unassigned=unassigned,
    )


def select_best(arch: GridArchive, weights: Sequence[float] = SAFETY_EMPHASIS_WEIGHTS) -> Optional[Elite]:
    """Archive member maximizing the weighted objective sum (first in cell order on ties)"""
    elites = arch.elites()
    if not elites:
        return None
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (arch.m,):
        raise ParameterError(f"Need {arch.m} weights, got {weights.shape[0]}")
    scores = arch.objectives() @ weights
    return elites[int(np.argmax(scores))]


def composition(arch: GridArchive, margin: float = BALANCE_MARGIN) -> Dict[str, float]:
    """
    Fraction of members dominated by one objective (it beats the mean of the
    others by more than margin) versus balanced members.
    """
    keys = [f"objective_{j + 1}" for j in range(arch.m)] + ["balanced"]
    counts = dict.fromkeys(keys, 0)
    F = arch.objectives()
    if F.shape[0] == 0:
        return {key: 0.0 for key in keys}
    for row in F:
        label = "balanced"
        if arch.m > 1:
            j = int(np.argmax(row))
            others = np.delete(row, j).mean()
            if row[j] - others > margin:
                label = f"objective_{j + 1}"
        counts[label] += 1
    return {key: counts[key] / F.shape[0] for key in keys}


def unvisited_fraction(arch: GridArchive, reference_cells: Iterable[Cell]) -> float:
    """Share of this archive's cells that no reference run ever reached"""
    if len(arch) == 0:
        return 0.0
    seen: Set[Cell] = set(tuple(c) for c in reference_cells)
    return sum(1 for c in arch.cells if c not in seen) / len(arch)


def cells_of(objectives: np.ndarray, g: int) -> Set[Cell]:
    return {cell_index(f, g) for f in np.atleast_2d(objectives) if np.size(f)}

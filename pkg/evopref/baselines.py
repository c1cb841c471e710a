"""
Comparison algorithms run under the same evaluation budget as EvoPref:
MOEA/D (Tchebycheff), SMS-EMOA, weighted-sum CMA-ES (pycma), random search and a
gradient-ascent surrogate on the smoothed landscape.

Evaluations are spent in blocks of mu; every block shares one noise seed
(generation_seed(run_seed, block)), so all algorithms see the same noise for
the same block.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import cma
import numpy as np

from evopref.errors import BudgetError, DivergenceError, ParameterError
from evopref.genome import (
    DEFAULT_ALPHA,
    LayerShape,
    LowRankGenome,
    gaussian_mutate,
    random_init,
    rank_preserving_crossover,
    sample_gamma,
    total_dimension,
)
from evopref.landscape import (
    PreferenceLandscape,
    evaluate_batch,
    generation_seed,
    mode_of,
    noiseless_objectives,
    smoothed_objectives,
    weighted_gradient,
    weighted_score,
)
from evopref.metrics import hv_contributions
from evopref.selection import nondominated_indices, rank_population, tournament

logger = logging.getLogger(__name__)

DEFAULT_WEIGHTS = (0.4, 0.3, 0.3)
NEIGHBORHOOD_SIZE = 5
MAX_REPLACEMENTS = 2
FULL_COVARIANCE_MAX_D = 256

# (evaluations_used, solution genomes, their objectives, sigma)
ProgressCallback = Callable[[int, Sequence[LowRankGenome], np.ndarray, Optional[float]], None]


def _no_progress(evals, genomes, objectives, sigma):
    pass


@dataclass
class BudgetedRun:
    """Evaluation counter that refuses to overspend"""
    max_evaluations: int
    mu: int = 32
    run_seed: int = 0
    evaluations_used: int = 0

    @property
    def remaining(self) -> int:
        return self.max_evaluations - self.evaluations_used

    def block_seed(self) -> int:
        """Noise seed of the block the next evaluation falls in"""
        return generation_seed(self.run_seed, self.evaluations_used // self.mu + 1)

    def evaluate(
        self,
        genomes: Sequence[LowRankGenome],
        landscape: PreferenceLandscape,
        gen_seed: Optional[int],
    ) -> np.ndarray:
        if len(genomes) > self.remaining:
            raise BudgetError(
                f"Evaluating {len(genomes)} genomes would exceed the budget "
                f"({self.evaluations_used}/{self.max_evaluations} used)"
            )
        self.evaluations_used += len(genomes)
        return evaluate_batch(genomes, landscape, gen_seed)


def _gid(prefix: str, block: int, i: int) -> str:
    return f"{prefix}{block:04d}-{i:03d}"


def _init_population(
    n: int,
    shape: Sequence[LayerShape],
    sigma_init: float,
    rng: np.random.Generator,
    alpha: float,
    prefix: str,
) -> List[LowRankGenome]:
    return [random_init(shape, sigma_init, rng, alpha, _gid(prefix, 0, i)) for i in range(n)]


# ---------------------------------------------------------------------------
# MOEA/D
# ---------------------------------------------------------------------------

def simplex_lattice(m: int, H: int) -> np.ndarray:
    """All m-vectors of multiples of 1/H summing to 1, in lexicographic order"""
    points = [c for c in itertools.product(range(H + 1), repeat=m) if sum(c) == H]
    return np.array(sorted(points), dtype=np.float64) / H


def uniform_weights(n: int, m: int) -> np.ndarray:
    """
    Smallest simplex lattice with at least n vectors, thinned greedily: each
    drop keeps the minimum pairwise distance as large as possible and then
    removes as many closest pairs as possible (lowest index on ties).
    """
    if n < 1 or m < 1:
        raise ParameterError(f"Need n >= 1 and m >= 1, got n={n}, m={m}")
    if m == 1:
        return np.ones((n, 1))
    H = 1
    while math.comb(H + m - 1, m - 1) < n:
        H += 1
    W = simplex_lattice(m, H)
    active = list(range(len(W)))
    dist = np.linalg.norm(W[:, None, :] - W[None, :, :], axis=2)
    np.fill_diagonal(dist, np.inf)
    while len(active) > n:
        best_key, best_i = None, None
        for i in active:
            rest = [j for j in active if j != i]
            sub = dist[np.ix_(rest, rest)]
            dmin = sub.min()
            n_close = int(np.sum(np.isclose(sub, dmin, rtol=0, atol=1e-12)))
            key = (dmin, -n_close)
            if best_key is None or key > best_key:
                best_key, best_i = key, i
        active.remove(best_i)
    return W[active]


@dataclass
class WeightVectorSet:
    vectors: np.ndarray
    neighborhoods: np.ndarray

    def __len__(self) -> int:
        return self.vectors.shape[0]


def build_weight_set(n: int, m: int, n_neighbors: int = NEIGHBORHOOD_SIZE) -> WeightVectorSet:
    W = uniform_weights(n, m)
    t = min(n_neighbors, len(W))
    dist = np.linalg.norm(W[:, None, :] - W[None, :, :], axis=2)
    neighborhoods = np.argsort(dist, axis=1, kind="stable")[:, :t]
    return WeightVectorSet(W, neighborhoods)


def tchebycheff(f, weights, ideal) -> float:
    """max_j w_j |z*_j - f_j|; lower is better"""
    f = np.asarray(f, dtype=np.float64)
    return float(np.max(np.asarray(weights) * np.abs(np.asarray(ideal) - f)))


@dataclass
class MOEADState:
    weights: WeightVectorSet
    genomes: List[LowRankGenome]
    objectives: np.ndarray
    ideal: np.ndarray
    rng: np.random.Generator
    budget: BudgetedRun
    sigma: float = 0.01
    max_replacements: int = MAX_REPLACEMENTS
    step_count: int = 0


def moead_update_neighbors(state: MOEADState, i: int, child: LowRankGenome, f_child: np.ndarray) -> List[int]:
    """Replace up to max_replacements neighbours whose Tchebycheff value the child beats"""
    replaced: List[int] = []
    for j in state.rng.permutation(state.weights.neighborhoods[i]):
        j = int(j)
        lam = state.weights.vectors[j]
        if tchebycheff(f_child, lam, state.ideal) < tchebycheff(state.objectives[j], lam, state.ideal):
            state.genomes[j] = child
            state.objectives[j] = f_child
            replaced.append(j)
            if len(replaced) >= state.max_replacements:
                break
    return replaced


def moead_step(state: MOEADState, landscape: PreferenceLandscape, gen_seed: Optional[int]) -> MOEADState:
    """One pass over the subproblems, one offspring each, while budget remains"""
    state.step_count += 1
    for i in range(len(state.weights)):
        if state.budget.remaining < 1:
            break
        hood = state.weights.neighborhoods[i]
        a, b = state.rng.choice(hood, size=2, replace=True)
        child = rank_preserving_crossover(
            state.genomes[int(a)], state.genomes[int(b)], sample_gamma(state.rng),
        )
        child = gaussian_mutate(child, state.sigma, state.rng, _gid("moead", state.step_count, i))
        f_child = state.budget.evaluate([child], landscape, gen_seed)[0]
        state.ideal = np.maximum(state.ideal, f_child)
        moead_update_neighbors(state, i, child, f_child)
    return state


def moead_run(
    landscape: PreferenceLandscape,
    shape: Sequence[LayerShape],
    budget: BudgetedRun,
    seed: int,
    sigma_init: float = 0.01,
    sigma: float = 0.01,
    n_neighbors: int = NEIGHBORHOOD_SIZE,
    max_replacements: int = MAX_REPLACEMENTS,
    alpha: float = DEFAULT_ALPHA,
    on_progress: ProgressCallback = _no_progress,
) -> MOEADState:
    n = budget.mu
    if budget.remaining < n:
        raise BudgetError(f"MOEA/D needs at least {n} evaluations, budget is {budget.remaining}")
    rng = np.random.default_rng([seed, 101])
    weights = build_weight_set(n, landscape.m, n_neighbors)
    genomes = _init_population(n, shape, sigma_init, rng, alpha, "moead")
    F = budget.evaluate(genomes, landscape, budget.block_seed())
    state = MOEADState(weights, genomes, F.copy(), F.max(axis=0), rng, budget, sigma, max_replacements)
    on_progress(budget.evaluations_used, state.genomes, state.objectives, sigma)
    while budget.remaining > 0:
        moead_step(state, landscape, budget.block_seed())
        on_progress(budget.evaluations_used, state.genomes, state.objectives, sigma)
    return state


# ---------------------------------------------------------------------------
# SMS-EMOA
# ---------------------------------------------------------------------------

@dataclass
class SMSEMOAState:
    genomes: List[LowRankGenome]
    objectives: np.ndarray
    rng: np.random.Generator
    budget: BudgetedRun
    sigma: float = 0.01
    tournament_size: int = 2
    reference: np.ndarray = field(default_factory=lambda: np.zeros(3))
    step_count: int = 0


def smsemoa_reduce(objectives: np.ndarray, reference: np.ndarray) -> int:
    """Index to drop: least hypervolume contributor of the worst front"""
    ranked = rank_population(objectives)
    worst = ranked.fronts[-1]
    if len(worst) == 1:
        return worst[0]
    contrib = hv_contributions(objectives[worst], reference)
    return worst[int(np.argmin(contrib))]


def smsemoa_step(state: SMSEMOAState, landscape: PreferenceLandscape, gen_seed: Optional[int]) -> SMSEMOAState:
    """Steady state: one offspring in, the least contributor out"""
    state.step_count += 1
    ranked = rank_population(state.objectives)
    parent = state.genomes[tournament(ranked, state.rng, state.tournament_size)]
    child = gaussian_mutate(parent, state.sigma, state.rng, _gid("sms", state.step_count, 0))
    f_child = state.budget.evaluate([child], landscape, gen_seed)[0]
    genomes = state.genomes + [child]
    objectives = np.vstack([state.objectives, f_child])
    drop = smsemoa_reduce(objectives, state.reference)
    state.genomes = [g for i, g in enumerate(genomes) if i != drop]
    state.objectives = np.delete(objectives, drop, axis=0)
    return state


def smsemoa_run(
    landscape: PreferenceLandscape,
    shape: Sequence[LayerShape],
    budget: BudgetedRun,
    seed: int,
    sigma_init: float = 0.01,
    sigma: float = 0.01,
    tournament_size: int = 2,
    alpha: float = DEFAULT_ALPHA,
    on_progress: ProgressCallback = _no_progress,
) -> SMSEMOAState:
    n = budget.mu
    if budget.remaining < n:
        raise BudgetError(f"SMS-EMOA needs at least {n} evaluations, budget is {budget.remaining}")
    rng = np.random.default_rng([seed, 102])
    genomes = _init_population(n, shape, sigma_init, rng, alpha, "sms")
    F = budget.evaluate(genomes, landscape, budget.block_seed())
    state = SMSEMOAState(genomes, F, rng, budget, sigma, tournament_size, np.zeros(landscape.m))
    on_progress(budget.evaluations_used, state.genomes, state.objectives, sigma)
    while budget.remaining > 0:
        smsemoa_step(state, landscape, budget.block_seed())
        if budget.evaluations_used % n == 0 or budget.remaining == 0:
            on_progress(budget.evaluations_used, state.genomes, state.objectives, sigma)
    return state


# ---------------------------------------------------------------------------
# CMA-ES
# ---------------------------------------------------------------------------

def _cma_options(popsize: int, full_covariance: bool, rng: np.random.Generator) -> dict:
    """Quiet pycma options; samples come from the run's own Generator, not np.random"""
    return {
        "popsize": popsize,
        "CMA_diagonal": not full_covariance,
        "randn": lambda *size: rng.standard_normal(size),
        "seed": float("nan"),
        "verbose": -9,
        "verb_disp": 0,
        "verb_log": 0,
    }


@dataclass
class CMAResult:
    best: LowRankGenome
    best_fitness: float
    trajectory: List[float]
    population: List[LowRankGenome]
    population_objectives: np.ndarray
    best_objectives: np.ndarray
    evaluations: int
    sigma: float

    @property
    def solutions(self) -> Tuple[List[LowRankGenome], np.ndarray]:
        """Last population plus the best-ever genome"""
        return self.population + [self.best], np.vstack([self.population_objectives, self.best_objectives])


def cmaes_weighted(
    landscape: PreferenceLandscape,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
    budget: Optional[BudgetedRun] = None,
    seed: int = 0,
    shape: Optional[Sequence[LayerShape]] = None,
    sigma_init: float = 0.01,
    sigma0: float = 0.01,
    popsize: int = 32,
    full_covariance: bool = False,
    alpha: float = DEFAULT_ALPHA,
    on_progress: ProgressCallback = _no_progress,
) -> CMAResult:
    """
    Maximize the weighted objective sum on the flat genome vector with pycma.
    Separable (CMA_diagonal) by default; full covariance only for small D.
    Iterations continue until the budget is spent, whatever es.stop() says.
    """
    if shape is None:
        raise ParameterError("cmaes_weighted needs the genome shape")
    if total_dimension(shape) != landscape.dimension:
        raise ParameterError("Genome shape does not match the landscape dimension")
    if popsize < 2:
        raise ParameterError(f"popsize must be >= 2, got {popsize}")
    if not sigma0 > 0:
        raise ParameterError(f"CMA-ES sigma must be positive, got {sigma0}")
    if full_covariance and landscape.dimension > FULL_COVARIANCE_MAX_D:
        raise ParameterError(
            f"Full covariance is limited to D <= {FULL_COVARIANCE_MAX_D}, got {landscape.dimension}"
        )
    budget = budget or BudgetedRun(popsize * 50, popsize, seed)
    if budget.remaining < popsize:
        raise BudgetError(f"CMA-ES needs at least one iteration ({popsize} evaluations), budget is {budget.remaining}")
    weights = np.asarray(weights, dtype=np.float64)
    start = random_init(shape, sigma_init, np.random.default_rng([seed, 103]), alpha, "cma-start")
    sample_rng = np.random.default_rng([seed, 104])
    es = cma.CMAEvolutionStrategy(start.flat, sigma0, _cma_options(popsize, full_covariance, sample_rng))

    trajectory: List[float] = []
    population: List[LowRankGenome] = []
    pop_F = np.zeros((0, landscape.m))
    best_x: Optional[np.ndarray] = None
    best_F = np.zeros(landscape.m)
    best_f = -np.inf
    iteration = 0
    while budget.remaining >= popsize:
        iteration += 1
        X = np.asarray(es.ask(), dtype=np.float64)
        genomes = [start.with_flat(x, _gid("cma", iteration, i)) for i, x in enumerate(X)]
        F = budget.evaluate(genomes, landscape, budget.block_seed())
        fitness = weighted_score(F, weights)
        # pycma minimizes
        es.tell(list(X), (-fitness).tolist())
        if not np.all(np.isfinite(es.mean)) or not np.isfinite(es.sigma):
            raise DivergenceError(f"CMA-ES diverged at iteration {iteration}")
        top = int(np.argmax(fitness))
        if fitness[top] > best_f:
            best_f = float(fitness[top])
            best_x = X[top].copy()
            best_F = F[top].copy()
        trajectory.append(float(fitness.max()))
        population, pop_F = genomes, F
        best = start.with_flat(best_x, "cma-best")
        on_progress(budget.evaluations_used, population + [best], np.vstack([pop_F, best_F]), float(es.sigma))

    return CMAResult(
        best=start.with_flat(best_x, "cma-best"),
        best_fitness=best_f,
        trajectory=trajectory,
        population=population,
        population_objectives=pop_F,
        best_objectives=best_F,
        evaluations=budget.evaluations_used,
        sigma=float(es.sigma),
    )


# ---------------------------------------------------------------------------
# Random search
# ---------------------------------------------------------------------------

@dataclass
class RandomSearchResult:
    best: LowRankGenome
    best_score: float
    genomes: List[LowRankGenome]
    objectives: np.ndarray

    @property
    def solutions(self) -> Tuple[List[LowRankGenome], np.ndarray]:
        """Non-dominated subset of everything evaluated"""
        keep = nondominated_indices(self.objectives)
        return [self.genomes[i] for i in keep], self.objectives[keep]


def random_search(
    landscape: PreferenceLandscape,
    budget: BudgetedRun,
    seed: int,
    shape: Sequence[LayerShape],
    sigma_init: float = 0.01,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
    alpha: float = DEFAULT_ALPHA,
    on_progress: ProgressCallback = _no_progress,
) -> RandomSearchResult:
    """
    Sample the whole budget from the initialization distribution. Genome i
    comes from stream (seed, i), so a larger budget extends the same sequence.
    """
    if budget.remaining < 1:
        raise BudgetError("Random search needs a budget of at least one evaluation")
    genomes: List[LowRankGenome] = []
    blocks: List[np.ndarray] = []
    while budget.remaining > 0:
        n = min(budget.mu - budget.evaluations_used % budget.mu, budget.remaining)
        start = len(genomes)
        batch = [
            random_init(shape, sigma_init, np.random.default_rng([seed, 105, start + i]), alpha, f"rs-{start + i:05d}")
            for i in range(n)
        ]
        blocks.append(budget.evaluate(batch, landscape, budget.block_seed()))
        genomes.extend(batch)
        F = np.vstack(blocks)
        keep = nondominated_indices(F)
        on_progress(budget.evaluations_used, [genomes[i] for i in keep], F[keep], None)
    F = np.vstack(blocks)
    scores = weighted_score(F, weights)
    i_best = int(np.argmax(scores))
    return RandomSearchResult(genomes[i_best], float(scores[i_best]), genomes, F)


# ---------------------------------------------------------------------------
# Gradient surrogate
# ---------------------------------------------------------------------------

@dataclass
class GradientResult:
    initial: LowRankGenome
    final: LowRankGenome
    trajectory: List[float]
    final_mode: Optional[int]


class AdamAscent:
    """Adam (no weight decay) ascending a gradient, optional cosine learning-rate decay"""

    def __init__(self, dimension: int, learning_rate: float, steps: int, cosine: bool = True,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8, optimizer: str = "adam"):
        if learning_rate < 0:
            raise ParameterError(f"learning_rate must be >= 0, got {learning_rate}")
        if optimizer not in ("adam", "sgd"):
            raise ParameterError(f"Unknown optimizer '{optimizer}'")
        self.lr = learning_rate
        self.steps = max(steps, 1)
        self.cosine = cosine
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.optimizer = optimizer
        self.m = np.zeros(dimension)
        self.v = np.zeros(dimension)
        self.t = 0

    def rate(self) -> float:
        if not self.cosine:
            return self.lr
        return self.lr * 0.5 * (1 + math.cos(math.pi * self.t / self.steps))

    def step(self, x: np.ndarray, grad: np.ndarray) -> np.ndarray:
        lr = self.rate()
        self.t += 1
        if self.optimizer == "sgd":
            return x + lr * grad
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return x + lr * m_hat / (np.sqrt(v_hat) + self.eps)


def gradient_descent_run(
    landscape: PreferenceLandscape,
    weights: Sequence[float],
    steps: int,
    learning_rate: float,
    seed: int,
    shape: Optional[Sequence[LayerShape]] = None,
    sigma_init: float = 0.01,
    optimizer: str = "adam",
    cosine: bool = True,
    start: Optional[LowRankGenome] = None,
    alpha: float = DEFAULT_ALPHA,
) -> GradientResult:
    """Ascent on the smoothed weighted objective from a random_init start"""
    if start is None:
        if shape is None:
            raise ParameterError("gradient_descent_run needs a start genome or a shape")
        start = random_init(shape, sigma_init, np.random.default_rng([seed, 106]), alpha, f"gd-{seed}")
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}")
    opt = AdamAscent(start.dimension, learning_rate, steps, cosine, optimizer=optimizer)
    w = np.asarray(weights, dtype=np.float64)
    x = start.flat.copy()
    trajectory = [float(smoothed_objectives(x, landscape)[0] @ w)]
    for step in range(steps):
        x = opt.step(x, weighted_gradient(start.with_flat(x, start.id), landscape, w))
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"Gradient ascent diverged at step {step + 1} (learning rate {learning_rate})")
        trajectory.append(float(smoothed_objectives(x, landscape)[0] @ w))
    final = start.with_flat(x, f"{start.id}-final")
    return GradientResult(start, final, trajectory, mode_of(final, landscape))


@dataclass
class MultistartResult:
    finals: List[LowRankGenome]
    objectives: np.ndarray
    final_modes: List[Optional[int]]
    steps_per_restart: int

    @property
    def distinct_modes(self) -> int:
        return len({m for m in self.final_modes if m is not None})


def gradient_multistart(
    landscape: PreferenceLandscape,
    budget: BudgetedRun,
    seed: int,
    shape: Sequence[LayerShape],
    restarts: int = 30,
    learning_rate: float = 2e-4,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
    sigma_init: float = 0.01,
    optimizer: str = "adam",
    cosine: bool = True,
    alpha: float = DEFAULT_ALPHA,
    on_progress: ProgressCallback = _no_progress,
) -> MultistartResult:
    """
    R restarts advanced in lockstep, sharing one budget: each gradient step
    costs one evaluation, plus one final evaluation per restart. The pooled
    final genomes are the solution set.
    """
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    per_restart = budget.remaining // restarts
    if per_restart < 1:
        raise BudgetError(f"Budget {budget.remaining} is too small for {restarts} restarts")
    steps = per_restart - 1
    w = np.asarray(weights, dtype=np.float64)
    starts = [
        random_init(shape, sigma_init, np.random.default_rng([seed, 107, r]), alpha, f"gd-{seed}-{r:02d}")
        for r in range(restarts)
    ]
    optimizers = [AdamAscent(g.dimension, learning_rate, steps, cosine, optimizer=optimizer) for g in starts]
    X = np.stack([g.flat for g in starts])
    for step in range(steps):
        for r in range(restarts):
            grad = weighted_gradient(starts[r].with_flat(X[r], starts[r].id), landscape, w)
            X[r] = optimizers[r].step(X[r], grad)
        if not np.all(np.isfinite(X)):
            raise DivergenceError(f"Gradient multistart diverged at step {step + 1}")
        before = budget.evaluations_used
        budget.evaluations_used += restarts
        if budget.evaluations_used // budget.mu > before // budget.mu:
            current = [starts[r].with_flat(X[r], starts[r].id) for r in range(restarts)]
            on_progress(budget.evaluations_used, current, noiseless_objectives(X, landscape), None)

    finals = [starts[r].with_flat(X[r], f"{starts[r].id}-final") for r in range(restarts)]
    F = budget.evaluate(finals, landscape, budget.block_seed())
    on_progress(budget.evaluations_used, finals, F, None)
    modes = [mode_of(g, landscape) for g in finals]
    logger.info(f"Gradient multistart seed={seed}: {len({m for m in modes if m is not None})} distinct final modes "
                f"from {restarts} restarts ({steps} steps each)")
    return MultistartResult(finals, F, modes, steps)

"""
EvoPref main loop and experiment orchestration (batteries, sweeps, ablations).

Every algorithm reports its current solution set through a RunRecorder, which
logs one metric row per mu evaluations (row 0 before anything is evaluated),
so records from different algorithms line up generation by generation.
"""

import logging
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from evopref import config as settings
from evopref.adaptation import SigmaController, maybe_adapt, record_offspring
from evopref.archive import (
    SAFETY_EMPHASIS_WEIGHTS,
    GridArchive,
    composition,
    occupancy_stats,
    select_best,
)
from evopref.baselines import (
    BudgetedRun,
    cmaes_weighted,
    gradient_multistart,
    moead_run,
    random_search,
    smsemoa_run,
)
from evopref.config import ExperimentConfig, SENSITIVITY_GRID, SWEEP_SEEDS, ablation_variants
from evopref.errors import ConfigError, EvoPrefError, GenerationError, ParameterError
from evopref.genome import (
    LayerShape,
    LowRankGenome,
    gaussian_mutate,
    random_init,
    rank_preserving_crossover,
    sample_gamma,
)
from evopref.landscape import PreferenceLandscape, evaluate_batch, generation_seed, landscape_for, modes_of
from evopref.metrics import collapse_rate, coverage_of_features, hypervolume, mode_coverage
from evopref.models import (
    AlgorithmSummary,
    BatteryReport,
    ComparisonRow,
    FriedmanSummary,
    GRADIENT_NOTE,
    MetricRow,
    MetricSummary,
    RunRecord,
    RunSummary,
    SweepReport,
)
from evopref.selection import dominates, environmental_selection, nondominated_indices, rank_population, tournament
from evopref.stats import friedman_test, holm_correction, median_iqr, vargha_delaney_a12, wilcoxon_signed_rank

logger = logging.getLogger(__name__)

SWEEP_ALIASES = {"g": "grid", "k_t": "tournament_size", "tournament": "tournament_size"}


def genome_shape(config: ExperimentConfig) -> List[LayerShape]:
    g = config.genome
    return [LayerShape(g.d, g.k_cols, g.r) for _ in range(g.n_layers)]


def build_problem(config: ExperimentConfig) -> Tuple[PreferenceLandscape, List[LayerShape]]:
    shape = genome_shape(config)
    return landscape_for(config.landscape, shape), shape


class RunRecorder:
    """Turns solution-set observations into one MetricRow per mu evaluations"""

    def __init__(self, landscape: PreferenceLandscape, mu: int, generations: int, snapshot_every: int = 1):
        self.landscape = landscape
        self.mu = mu
        self.generations = generations
        self.snapshot_every = max(snapshot_every, 1)
        self.rows: List[MetricRow] = []
        self.snapshots: Dict[int, np.ndarray] = {}
        self.sigmas: List[float] = []
        self._last: Optional[Tuple[int, np.ndarray, np.ndarray, Optional[float], int]] = None

    def _row(self, t: int, evals: int, points: np.ndarray, F: np.ndarray, sigma: Optional[float], occupied: int):
        cov = coverage_of_features(points, self.landscape)
        hv = hypervolume(F, np.zeros(self.landscape.m)) if len(F) else 0.0
        self.rows.append(MetricRow(
            generation=t,
            hypervolume=hv,
            covered_modes=len(cov.covered_modes),
            coverage_fraction=cov.coverage_fraction,
            sigma=sigma,
            evaluations_used=evals,
            archive_occupied=occupied,
        ))
        if sigma is not None:
            self.sigmas.append(sigma)
        if t % self.snapshot_every == 0 or t == self.generations:
            self.snapshots[t] = points
        logger.debug(f"gen {t}: HV={hv:.4f} modes={len(cov.covered_modes)} occupied={occupied} sigma={sigma}")

    def observe(
        self,
        evals: int,
        genomes: Sequence[LowRankGenome],
        objectives: np.ndarray,
        sigma: Optional[float],
        occupied: Optional[int] = None,
        generation: Optional[int] = None,
    ) -> None:
        t_now = generation if generation is not None else evals // self.mu
        t_now = min(t_now, self.generations)
        if genomes:
            points = self.landscape.features(np.stack([g.flat for g in genomes]))
        else:
            points = np.zeros((0, self.landscape.p))
        F = np.asarray(objectives, dtype=np.float64).reshape(-1, self.landscape.m)
        occupied = len(genomes) if occupied is None else occupied
        while len(self.rows) <= t_now:
            self._row(len(self.rows), evals, points, F, sigma, occupied)
        self._last = (evals, points, F, sigma, occupied)

    def finish(self) -> None:
        """Pad to generation G with the final state"""
        if self._last is None:
            self.observe(0, [], np.zeros((0, self.landscape.m)), None)
        evals, points, F, sigma, occupied = self._last
        while len(self.rows) <= self.generations:
            self._row(len(self.rows), evals, points, F, sigma, occupied)
        # the last row always describes the final solution set
        self.snapshots[self.generations] = points


def _gid(t: int, i: int) -> str:
    return f"ep{t:04d}-{i:03d}"


def _run_id(config: ExperimentConfig, seed: int) -> str:
    label = "".join(c if c.isalnum() else "_" for c in config.name).strip("_") or config.algorithm
    return f"{label}-s{seed}-{config.config_hash()[:8]}"


def _finalize(
    config: ExperimentConfig,
    seed: int,
    landscape: PreferenceLandscape,
    recorder: RunRecorder,
    solutions: List[LowRankGenome],
    objectives: np.ndarray,
    evaluations: int,
    started: float,
    archive: Optional[GridArchive] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> RunRecord:
    recorder.finish()
    coverage = mode_coverage(solutions, landscape)
    F = np.asarray(objectives, dtype=np.float64).reshape(-1, landscape.m)
    if archive is not None:
        stats = occupancy_stats(archive, landscape)
        snapshot = archive.snapshot()
    else:
        stats = None
        snapshot = [
            {"objectives": f.tolist(), "genome_id": g.id} for g, f in zip(solutions, F)
        ]
    per_mode = [0] * landscape.k
    for mode in modes_of(solutions, landscape):
        if mode is not None:
            per_mode[mode] += 1
    if stats is not None:
        per_mode = stats.per_mode_counts
        logger.info(
            f"[{config.name} seed={seed}] archive {stats.occupied}/{archive.capacity} cells, "
            f"c = {stats.cells_per_mode:.2f} cells per covered mode"
        )
    record = RunRecord(
        run_id=_run_id(config, seed),
        config_hash=config.config_hash(),
        algorithm=config.algorithm,
        label=config.name,
        seed=seed,
        landscape_seed=config.landscape.seed,
        config=config.model_dump(mode="json", exclude={"seeds"}),
        rows=recorder.rows,
        sigma_trajectory=recorder.sigmas,
        final_archive=snapshot,
        final_objectives=F.tolist(),
        final_coverage=coverage,
        final_hypervolume=hypervolume(F, np.zeros(landscape.m)) if len(F) else 0.0,
        evaluations_used=evaluations,
        max_evaluations=config.evaluation_budget,
        wall_clock=time.perf_counter() - started,
        per_mode_counts=per_mode,
        cells_per_mode=stats.cells_per_mode if stats else None,
        extra=extra or {},
        snapshot_every=recorder.snapshot_every,
    )
    record.snapshots = recorder.snapshots
    record.solutions = list(solutions)
    logger.info(
        f"[{config.name} seed={seed}] coverage {len(coverage.covered_modes)}/{landscape.k} "
        f"HV={record.final_hypervolume:.4f} evals={evaluations}"
    )
    return record


def offspring_successes(
    children_objs: np.ndarray,
    parents: Sequence[LowRankGenome],
    landscape: PreferenceLandscape,
    gen_seed: Optional[int],
) -> List[bool]:
    """
    Child i succeeds when it dominates its primary parent scored under the
    same noise draw. The parent scores only feed the step-size rule and are
    not charged to the evaluation budget.
    """
    if len(parents) != len(children_objs):
        raise ParameterError(f"{len(children_objs)} offspring but {len(parents)} parents")
    parent_objs = evaluate_batch(parents, landscape, gen_seed)
    return [dominates(f, fp) for f, fp in zip(children_objs, parent_objs)]


def evopref_run(
    config: ExperimentConfig,
    seed: int,
    landscape: Optional[PreferenceLandscape] = None,
) -> RunRecord:
    """
    Per generation: evaluate with the shared noise seed, offer every evaluated
    member to the archive, (mu + mu) survivor selection, rank + tournaments,
    then variation (crossover with an archive partner with probability p_c,
    then mutation). Sigma follows the 1/5 rule every `window` generations; a
    child counts as a success when it dominates its primary parent under the
    same generation noise.
    """
    started = time.perf_counter()
    shape = genome_shape(config)
    L = landscape or landscape_for(config.landscape, shape)
    mu, G = config.mu, config.generations
    alpha = config.genome.alpha
    init_rng = np.random.default_rng([seed, 1])
    var_rng = np.random.default_rng([seed, 2])
    tie_rng = np.random.default_rng([seed, 3]) if config.no_crowding else None
    p_c = 0.0 if config.no_crossover else config.p_c

    archive = GridArchive(config.grid, L.m, landscape=L)
    ctrl = SigmaController(config.sigma0, config.window, sigma_min=config.sigma_min, sigma_max=config.sigma_max)
    budget = BudgetedRun(mu * G, mu, seed)
    recorder = RunRecorder(L, mu, G, config.snapshot_every)
    recorder.observe(0, [], np.zeros((0, L.m)), ctrl.sigma, occupied=0)

    population = [random_init(shape, config.initial_sigma, init_rng, alpha, _gid(0, i)) for i in range(mu)]
    primary: List[LowRankGenome] = []
    survivors: List[Tuple[LowRankGenome, np.ndarray]] = []

    for t in range(1, G + 1):
        try:
            gen_seed = generation_seed(seed, t)
            F = budget.evaluate(population, L, gen_seed)
            if primary:
                for improved in offspring_successes(F, primary, L, gen_seed):
                    ctrl = record_offspring(ctrl, improved)
            if not config.no_archive:
                archive.insert_batch(population, F, t)

            pool = list(zip(population, F))
            if survivors and not config.generational:
                pool = survivors + pool
            survivors = environmental_selection(pool, mu, tie_rng)
            ctrl = maybe_adapt(ctrl, t)

            if config.no_archive:
                S = np.array([f for _, f in survivors])
                keep = nondominated_indices(S)
                recorder.observe(budget.evaluations_used, [survivors[i][0] for i in keep], S[keep],
                                 ctrl.sigma, occupied=len(keep), generation=t)
            else:
                recorder.observe(budget.evaluations_used, archive.genomes(), archive.objectives(),
                                 ctrl.sigma, occupied=len(archive), generation=t)

            if t == G:
                break
            ranked = rank_population(
                np.array([f for _, f in survivors]),
                ids=[g.id for g, _ in survivors],
                tie_rng=tie_rng,
            )
            offspring: List[LowRankGenome] = []
            primary = []
            for i in range(mu):
                winner, _ = survivors[tournament(ranked, var_rng, config.tournament_size)]
                child = winner
                if var_rng.uniform() < p_c:
                    if config.no_archive:
                        partner = survivors[tournament(ranked, var_rng, config.tournament_size)][0]
                    else:
                        partner = archive.sample_partner(var_rng)
                    if partner is not None:
                        child = rank_preserving_crossover(winner, partner, sample_gamma(var_rng))
                offspring.append(gaussian_mutate(child, ctrl.sigma, var_rng, _gid(t, i)))
                primary.append(winner)
            population = offspring
        except GenerationError:
            raise
        except (EvoPrefError, ValueError, FloatingPointError) as e:
            raise GenerationError(t, e) from e

    if config.no_archive:
        if survivors:
            S = np.array([f for _, f in survivors])
            keep = nondominated_indices(S)
            solutions, objectives = [survivors[i][0] for i in keep], S[keep]
        else:
            solutions, objectives = [], np.zeros((0, L.m))
        extra: Dict[str, Any] = {}
    else:
        solutions, objectives = archive.genomes(), archive.objectives()
        best = select_best(archive, SAFETY_EMPHASIS_WEIGHTS) if len(archive) else None
        extra = {
            "composition": composition(archive),
            "best": None if best is None else {
                "genome_id": best.genome.id,
                "objectives": best.objectives.tolist(),
                "cell": list(best.cell),
                "weights": list(SAFETY_EMPHASIS_WEIGHTS),
            },
        }
    extra["final_sigma"] = ctrl.sigma
    return _finalize(config, seed, L, recorder, solutions, objectives, budget.evaluations_used,
                     started, None if config.no_archive else archive, extra)


def _baseline_run(config: ExperimentConfig, seed: int, landscape: PreferenceLandscape,
                  shape: List[LayerShape]) -> RunRecord:
    started = time.perf_counter()
    budget = BudgetedRun(config.evaluation_budget, config.mu, seed)
    G = -(-budget.max_evaluations // config.mu)
    recorder = RunRecorder(landscape, config.mu, G, config.snapshot_every)
    recorder.observe(0, [], np.zeros((0, landscape.m)), None)
    common = dict(sigma_init=config.initial_sigma, alpha=config.genome.alpha, on_progress=recorder.observe)
    extra: Dict[str, Any] = {}

    if config.algorithm == "moead":
        state = moead_run(landscape, shape, budget, seed, sigma=config.sigma0,
                          n_neighbors=config.moead_neighbors, max_replacements=config.moead_max_replace, **common)
        solutions, F = state.genomes, state.objectives
    elif config.algorithm == "smsemoa":
        state = smsemoa_run(landscape, shape, budget, seed, sigma=config.sigma0,
                            tournament_size=config.tournament_size, **common)
        solutions, F = state.genomes, state.objectives
    elif config.algorithm == "cmaes":
        result = cmaes_weighted(landscape, config.weights, budget, seed, shape, sigma0=config.sigma0,
                                popsize=config.cmaes_popsize, full_covariance=config.cmaes_full_covariance, **common)
        solutions, F = result.solutions
        extra = {"best_fitness": result.best_fitness, "trajectory": result.trajectory, "final_sigma": result.sigma}
    elif config.algorithm == "random":
        result = random_search(landscape, budget, seed, shape, weights=config.weights, **common)
        solutions, F = result.solutions
        extra = {"best_genome_id": result.best.id, "best_score": result.best_score}
    elif config.algorithm == "gradient":
        result = gradient_multistart(
            landscape, budget, seed, shape,
            restarts=config.gradient_restarts,
            learning_rate=config.gradient_learning_rate,
            weights=config.weights,
            optimizer=config.gradient_optimizer,
            cosine=config.gradient_cosine,
            **common,
        )
        solutions, F = result.finals, result.objectives
        extra = {
            "final_modes": result.final_modes,
            "distinct_modes": result.distinct_modes,
            "steps_per_restart": result.steps_per_restart,
            "note": GRADIENT_NOTE,
        }
    else:
        raise ConfigError(f"Unknown algorithm '{config.algorithm}'")

    return _finalize(config, seed, landscape, recorder, list(solutions), F, budget.evaluations_used, started,
                     extra=extra)


def run_single(config: ExperimentConfig, seed: int, landscape: Optional[PreferenceLandscape] = None) -> RunRecord:
    """Dispatch one (config, seed) pair to its algorithm"""
    shape = genome_shape(config)
    landscape = landscape or landscape_for(config.landscape, shape)
    logger.info(f"Running {config.name} ({config.algorithm}) seed={seed}")
    if config.algorithm == "evopref":
        return evopref_run(config, seed, landscape)
    return _baseline_run(config, seed, landscape, shape)


def _unique_labels(configs: Sequence[ExperimentConfig]) -> List[ExperimentConfig]:
    seen: Dict[str, int] = {}
    result = []
    for cfg in configs:
        name = cfg.name
        seen[name] = seen.get(name, 0) + 1
        if seen[name] > 1:
            cfg = cfg.variant(label=f"{name}#{seen[name]}")
        result.append(cfg)
    return result


def execute(
    configs: Sequence[ExperimentConfig],
    seeds: Sequence[int],
    workers: int = settings.NUM_WORKERS,
) -> "OrderedDict[str, List[RunRecord]]":
    """Run every (config, seed) pair; records per label, in seed order"""
    landscapes: Dict[str, PreferenceLandscape] = {}
    for cfg in configs:
        key = cfg.landscape.model_dump_json() + cfg.genome.model_dump_json()
        if key not in landscapes:
            landscapes[key] = build_problem(cfg)[0]

    jobs = [(ci, seed) for ci in range(len(configs)) for seed in seeds]
    results: Dict[Tuple[int, int], RunRecord] = {}
    total = len(jobs)
    logger.info("=" * 60)
    logger.info(f"Executing {total} runs ({len(configs)} configs x {len(seeds)} seeds) on {workers} workers")
    logger.info("=" * 60)

    def _job(ci: int, seed: int) -> RunRecord:
        cfg = configs[ci]
        key = cfg.landscape.model_dump_json() + cfg.genome.model_dump_json()
        return run_single(cfg, seed, landscapes[key])

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as executor:
        futures = {executor.submit(_job, ci, seed): (ci, seed) for ci, seed in jobs}
        for completed, future in enumerate(as_completed(futures), start=1):
            results[futures[future]] = future.result()
            if completed % 10 == 0 or completed == total:
                logger.info(f"Progress: {completed}/{total} runs")

    grouped: "OrderedDict[str, List[RunRecord]]" = OrderedDict()
    for ci, cfg in enumerate(configs):
        grouped[cfg.name] = [results[(ci, seed)] for seed in seeds]
    return grouped


def _summary(values: Sequence[float]) -> MetricSummary:
    med, q1, q3 = median_iqr(values)
    return MetricSummary(median=med, q1=q1, q3=q3)


def run_summary(record: RunRecord, record_path: Optional[str] = None) -> RunSummary:
    return RunSummary(
        run_id=record.run_id,
        config_hash=record.config_hash,
        algorithm=record.algorithm,
        label=record.label,
        landscape_seed=record.landscape_seed,
        seed=record.seed,
        covered_modes=len(record.final_coverage.covered_modes),
        coverage_fraction=record.final_coverage.coverage_fraction,
        collapsed=record.final_coverage.collapsed,
        final_hypervolume=record.final_hypervolume,
        evaluations_used=record.evaluations_used,
        wall_clock=record.wall_clock,
        record_path=record_path,
    )


def _metric(record: RunRecord, metric: str) -> float:
    if metric == "coverage_fraction":
        return record.final_coverage.coverage_fraction
    if metric == "covered_modes":
        return float(len(record.final_coverage.covered_modes))
    if metric == "hypervolume":
        return record.final_hypervolume
    raise ConfigError(f"Unknown metric '{metric}'")


def battery_report(
    grouped: "OrderedDict[str, List[RunRecord]]",
    reference: Optional[str] = None,
    metric: str = "coverage_fraction",
) -> BatteryReport:
    """Medians per algorithm, Friedman + Holm across them, Wilcoxon + A12 against the reference"""
    labels = list(grouped)
    if not labels:
        raise ConfigError("Battery has no runs")
    landscape_seeds = {r.landscape_seed for runs in grouped.values() for r in runs}
    if len(landscape_seeds) > 1:
        raise ConfigError(
            f"Battery mixes landscape seeds {sorted(landscape_seeds)}; paired comparisons need one problem instance"
        )
    reference = reference or labels[0]
    if reference not in grouped:
        raise ConfigError(f"Reference '{reference}' is not in the battery ({labels})")

    summaries = []
    for label, runs in grouped.items():
        summaries.append(AlgorithmSummary(
            label=label,
            algorithm=runs[0].algorithm,
            n=len(runs),
            coverage=_summary([r.final_coverage.coverage_fraction for r in runs]),
            covered_modes=_summary([len(r.final_coverage.covered_modes) for r in runs]),
            hypervolume=_summary([r.final_hypervolume for r in runs]),
            collapse_rate=collapse_rate([r.final_coverage for r in runs]),
            evaluations_used=int(np.median([r.evaluations_used for r in runs])),
        ))

    report = BatteryReport(
        metric=metric,
        reference=reference if len(labels) > 1 else None,
        landscape_seed=landscape_seeds.pop(),
        summaries=summaries,
        budgets_equal=len({r.max_evaluations for runs in grouped.values() for r in runs}) == 1,
        runs=[run_summary(r) for runs in grouped.values() for r in runs],
    )
    if any(runs[0].algorithm == "gradient" for runs in grouped.values()):
        report.notes.append(GRADIENT_NOTE)
    if len(labels) == 1:
        return report

    # paired by seed
    seeds = sorted(set.intersection(*[{r.seed for r in runs} for runs in grouped.values()]))
    values = {
        label: [_metric(next(r for r in runs if r.seed == s), metric) for s in seeds]
        for label, runs in grouped.items()
    }

    if len(labels) >= 3 and len(seeds) >= 2:
        matrix = np.array([values[label] for label in labels]).T
        # negate so rank 1 is the best algorithm in every block
        fr = friedman_test(-matrix)
        report.friedman = FriedmanSummary(
            statistic=fr.statistic, df=fr.df, p_value=fr.p_value, n_blocks=len(seeds),
            mean_ranks=dict(zip(labels, fr.mean_ranks)), degenerate=fr.degenerate,
        )

    rows = []
    for label in labels:
        if label == reference:
            continue
        try:
            w = wilcoxon_signed_rank(values[reference], values[label])
        except EvoPrefError as e:
            logger.warning(f"Skipping {reference} vs {label}: {e}")
            continue
        eff = vargha_delaney_a12(values[reference], values[label])
        rows.append(ComparisonRow(
            comparison=f"{reference} vs {label}",
            statistic=w.statistic,
            p_value=w.p_value,
            adjusted_p=w.p_value,
            a12=eff.a12,
            magnitude=eff.magnitude,
            n=len(seeds),
            dropped_pairs=w.dropped,
            degenerate=w.degenerate,
        ))
    for row, adj in zip(rows, holm_correction([r.p_value for r in rows])):
        row.adjusted_p = adj
    report.comparisons = rows
    return report


def format_battery_report(report: BatteryReport) -> str:
    lines = ["=" * 60, f"Battery report ({report.metric}), landscape seed {report.landscape_seed}", "=" * 60]
    lines.append(f"{'algorithm':<22}{'n':>4}{'coverage median [IQR]':>28}{'HV median':>12}{'collapse':>10}")
    for s in report.summaries:
        cov = f"{s.coverage.median:.3f} [{s.coverage.q1:.3f}, {s.coverage.q3:.3f}]"
        lines.append(f"{s.label:<22}{s.n:>4}{cov:>28}{s.hypervolume.median:>12.4f}{s.collapse_rate:>10.2f}")
    if report.friedman:
        f = report.friedman
        lines.append(f"Friedman: chi2({f.df}, N={f.n_blocks}) = {f.statistic:.3f}, p = {f.p_value:.3g}")
    if report.comparisons:
        lines.append(f"{'comparison':<36}{'p':>10}{'adj. p':>10}{'A12':>8}  magnitude")
        for c in report.comparisons:
            flag = " (degenerate)" if c.degenerate else ""
            lines.append(f"{c.comparison:<36}{c.p_value:>10.4g}{c.adjusted_p:>10.4g}{c.a12:>8.3f}  {c.magnitude}{flag}")
    if not report.budgets_equal:
        lines.append("note: evaluation budgets differ across algorithms")
    lines.extend(f"note: {n}" for n in report.notes)
    return "\n".join(lines)


def run_battery(
    configs: Sequence[ExperimentConfig],
    seeds: Optional[Sequence[int]] = None,
    reference: Optional[str] = None,
    workers: int = settings.NUM_WORKERS,
) -> Tuple[BatteryReport, "OrderedDict[str, List[RunRecord]]"]:
    if not configs:
        raise ConfigError("Battery needs at least one config")
    landscape_seeds = {cfg.landscape.seed for cfg in configs}
    if len(landscape_seeds) > 1:
        raise ConfigError(
            f"All battery configs must share the landscape seed (got {sorted(landscape_seeds)}); "
            "paired tests compare algorithms on the same problem instance"
        )
    configs = _unique_labels(configs)
    seeds = list(seeds) if seeds is not None else list(configs[0].seeds)
    grouped = execute(configs, seeds, workers)
    return battery_report(grouped, reference), grouped


def sensitivity_sweep(
    base: ExperimentConfig,
    parameter: str,
    values: Optional[Sequence[Any]] = None,
    seeds: Sequence[int] = SWEEP_SEEDS,
    workers: int = settings.NUM_WORKERS,
) -> Tuple[SweepReport, "OrderedDict[str, List[RunRecord]]"]:
    """Median final coverage per value of one parameter"""
    name = SWEEP_ALIASES.get(parameter, parameter)
    if name not in SENSITIVITY_GRID:
        raise ConfigError(f"Unknown sweep parameter '{parameter}'; choose from {sorted(SENSITIVITY_GRID)}")
    values = list(values) if values is not None else list(SENSITIVITY_GRID[name]["values"])
    if not values:
        raise ConfigError("Sweep needs at least one value")
    configs = [base.variant(**{name: v, "label": f"{name}={v}"}) for v in values]
    grouped = execute(configs, list(seeds), workers)
    medians = [median_iqr([r.final_coverage.coverage_fraction for r in runs])[0] for runs in grouped.values()]
    report = SweepReport(
        parameter=name,
        values=values,
        default=SENSITIVITY_GRID[name]["default"],
        median_coverage=medians,
        n_seeds=len(seeds),
        run_ids={label: [r.run_id for r in runs] for label, runs in grouped.items()},
    )
    return report, grouped


def ablation(
    base: ExperimentConfig,
    seeds: Optional[Sequence[int]] = None,
    workers: int = settings.NUM_WORKERS,
) -> Tuple[BatteryReport, "OrderedDict[str, List[RunRecord]]"]:
    """Full algorithm against its ablated variants, paired by seed"""
    return run_battery(ablation_variants(base), seeds or base.seeds, reference="Full", workers=workers)

"""
Desk-scale acceptance experiments, one numbered step per check.

    python scripts/acceptance.py                  # every step
    python scripts/acceptance.py --steps 1,2,4,8  # quick oracle steps only

Results (pass/fail, measured values, runtime per step) go to
<output_dir>/acceptance/acceptance.json.
"""

import argparse
import itertools
import json
import logging
import os
import sys
import time
from typing import Any, Callable, Dict, List, Tuple

# Project root on the path so `evopref` imports without installation
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np  # noqa: E402

from evopref import config as settings  # noqa: E402
from evopref import storage  # noqa: E402
from evopref.adaptation import DECREASE, INCREASE, SigmaController, adapt_sigma  # noqa: E402
from evopref.archive import GridArchive, cell_index  # noqa: E402
from evopref.baselines import gradient_descent_run  # noqa: E402
from evopref.config import ExperimentConfig, parse_seed_list  # noqa: E402
from evopref.genome import (  # noqa: E402
    LayerShape,
    effective_delta,
    numerical_rank,
    random_init,
    rank_preserving_crossover,
    sample_gamma,
)
from evopref.landscape import genome_at_feature, smoothed_objectives, weighted_gradient  # noqa: E402
from evopref.metrics import coverage_prediction, hypervolume, hypervolume_mc  # noqa: E402
from evopref.runner import ablation, build_problem, format_battery_report, run_battery  # noqa: E402
from evopref.selection import dominates, fast_nondominated_sort  # noqa: E402
from evopref.stats import (  # noqa: E402
    FRIEDMAN_EXAMPLE,
    friedman_test,
    holm_correction,
    vargha_delaney_a12,
    wilcoxon_signed_rank,
)

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format=settings.LOG_FORMAT
)
logger = logging.getLogger(__name__)

StepResult = Tuple[bool, Dict[str, Any]]


def _brute_force_fronts(P: np.ndarray) -> List[set]:
    remaining = list(range(len(P)))
    fronts = []
    while remaining:
        R = P[remaining]
        front = [
            i for i in remaining
            if not np.any(np.all(R >= P[i], axis=1) & np.any(R > P[i], axis=1))
        ]
        fronts.append(set(front))
        remaining = [i for i in remaining if i not in fronts[-1]]
    return fronts


def step_sort_oracle(args) -> StepResult:
    rng = np.random.default_rng(2024)
    mismatches = 0
    for case in range(500):
        n = int(rng.integers(1, 201))
        m = int(rng.choice([2, 3]))
        # half the cases on a coarse lattice so ties and duplicates occur
        P = rng.integers(0, 6, size=(n, m)).astype(float) if case % 2 else rng.uniform(size=(n, m))
        fronts = [set(f) for f in fast_nondominated_sort(P)]
        if fronts != _brute_force_fronts(P):
            mismatches += 1
    return mismatches == 0, {"cases": 500, "mismatches": mismatches}


def _hv_inclusion_exclusion(P: np.ndarray) -> float:
    total = 0.0
    for size in range(1, len(P) + 1):
        for subset in itertools.combinations(range(len(P)), size):
            total += (-1) ** (size + 1) * float(np.prod(P[list(subset)].min(axis=0)))
    return total


def step_hypervolume(args) -> StepResult:
    rng = np.random.default_rng(7)
    worst_exact = 0.0
    for _ in range(500):
        P = rng.uniform(size=(int(rng.integers(1, 6)), 3))
        worst_exact = max(worst_exact, abs(hypervolume(P) - _hv_inclusion_exclusion(P)))
    outside = 0
    for case in range(50):
        P = rng.uniform(size=(int(rng.integers(1, 51)), 3))
        est, se = hypervolume_mc(P, n_samples=1_000_000, seed=[11, case])
        if abs(est - hypervolume(P)) > 3 * se:
            outside += 1
    # 3-SE coverage is ~99.7%, so allow one stray front in 50
    return worst_exact < 1e-9 and outside <= 1, {"max_abs_error_exact": worst_exact, "mc_outside_3se": outside}


def step_rank_preservation(args) -> StepResult:
    shape = [LayerShape(16, 16, 4)]
    rng = np.random.default_rng(3)
    preserved = naive_exceeds = 0
    for i in range(100):
        p1 = random_init(shape, 0.1, rng)
        p2 = random_init(shape, 0.1, rng)
        gamma = sample_gamma(rng)
        child = rank_preserving_crossover(p1, p2, gamma)
        if numerical_rank(effective_delta(child, 0)) <= 4:
            preserved += 1
        naive = gamma * effective_delta(p1, 0) + (1 - gamma) * effective_delta(p2, 0)
        if numerical_rank(naive) > 4:
            naive_exceeds += 1
    return preserved == 100 and naive_exceeds >= 90, {"preserved": preserved, "naive_exceeds": naive_exceeds}


def step_theory(args) -> StepResult:
    modes = coverage_prediction(32, 50, 10, 3, 4, 50)
    c_free_fraction = coverage_prediction(32, 50, 10, 3, 1, 50) / 50
    passed = abs(modes - 16.484) <= 1e-3 and abs(c_free_fraction - 0.7981) <= 1e-4
    return passed, {"predicted_modes": modes, "predicted_fraction": modes / 50, "c_free_fraction": c_free_fraction}


def headline_configs(output_dir: str) -> List[ExperimentConfig]:
    """k=20 landscape, D=512 genome, 1600 evaluations for every algorithm"""
    base = ExperimentConfig(output_dir=output_dir)
    return [
        base.variant(label="EvoPref"),
        base.variant(label="Gradient (30 restarts)", algorithm="gradient", gradient_restarts=30),
        base.variant(label="MOEA/D", algorithm="moead"),
        base.variant(label="SMS-EMOA", algorithm="smsemoa"),
        base.variant(label="CMA-ES", algorithm="cmaes"),
        base.variant(label="Random", algorithm="random"),
    ]


def _headline(args, state: Dict[str, Any]):
    if "headline" not in state:
        out = os.path.join(args.output_dir, "headline")
        report, grouped = run_battery(headline_configs(out), args.seeds, "EvoPref", args.workers)
        storage.save_runs(grouped, out)
        storage.write_battery_report(report, format_battery_report(report), out, "headline")
        state["headline"] = (report, grouped)
    return state["headline"]


def step_diversity(args, state) -> StepResult:
    report, grouped = _headline(args, state)
    logger.info("\n" + format_battery_report(report))
    medians = {s.label: s.coverage.median for s in report.summaries}
    vs_gradient = next(c for c in report.comparisons if c.comparison.endswith("Gradient (30 restarts)"))
    beats_gradient = medians["EvoPref"] > medians["Gradient (30 restarts)"] and vs_gradient.p_value < 0.05 \
        and vs_gradient.a12 > 0.71
    others = all(medians["EvoPref"] >= medians[label] for label in ("MOEA/D", "SMS-EMOA", "CMA-ES", "Random"))
    budgets = {r.max_evaluations for runs in grouped.values() for r in runs}
    return beats_gradient and others and len(budgets) == 1, {
        "median_coverage": medians,
        "gradient_p": vs_gradient.p_value,
        "gradient_a12": vs_gradient.a12,
        "budgets": sorted(budgets),
    }


def step_collapse(args, state) -> StepResult:
    report, grouped = _headline(args, state)
    cfg = headline_configs(args.output_dir)[1]
    landscape, shape = build_problem(cfg)
    finals = []
    for seed in args.seeds:
        result = gradient_descent_run(
            landscape, cfg.weights, cfg.evaluation_budget - 1, cfg.gradient_learning_rate, seed, shape,
            sigma_init=cfg.initial_sigma, optimizer=cfg.gradient_optimizer, cosine=cfg.gradient_cosine,
        )
        finals.append(result.final_mode)
    in_mode = sum(1 for m in finals if m is not None) / len(finals)
    distinct = len({m for m in finals if m is not None})
    not_collapsed = sum(1 for r in grouped["EvoPref"] if not r.final_coverage.collapsed)
    needed = int(np.ceil(25 / 30 * len(args.seeds)))
    passed = in_mode >= 0.9 and 10 * distinct < 7 * landscape.k and not_collapsed >= needed
    return passed, {
        "fraction_in_mode": in_mode,
        "distinct_modes_across_runs": distinct,
        "evopref_not_collapsed": not_collapsed,
    }


def step_ablation(args, state) -> StepResult:
    out = os.path.join(args.output_dir, "ablation")
    report, grouped = ablation(ExperimentConfig(output_dir=out), args.seeds, args.workers)
    storage.save_runs(grouped, out)
    storage.write_battery_report(report, format_battery_report(report), out, "ablation")
    logger.info("\n" + format_battery_report(report))
    medians = {s.label: s.coverage.median for s in report.summaries}
    rows = {c.comparison.split(" vs ", 1)[1]: c for c in report.comparisons}
    passed = (
        medians["Full"] > medians["w/o Archive"] and rows["w/o Archive"].p_value < 0.05
        and medians["Full"] > medians["w/o Crowding"] and rows["w/o Crowding"].p_value < 0.05
        and medians["w/o LoRA Crossover"] <= medians["Full"]
    )
    return passed, {"median_coverage": medians, "p_values": {k: v.p_value for k, v in rows.items()}}


def _enumerated_p(d: np.ndarray) -> float:
    from scipy.stats import rankdata
    ranks = rankdata(np.abs(d))
    observed = min(ranks[d > 0].sum(), ranks[d < 0].sum())
    total = ranks.sum()
    hits = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        w_plus = float(np.dot(signs, ranks))
        if min(w_plus, total - w_plus) <= observed + 1e-9:
            hits += 1
    return hits / 2 ** len(d)


def step_stats(args) -> StepResult:
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(5, 13))
        a = np.round(rng.normal(size=n), 1)
        b = np.round(rng.normal(size=n), 1)
        d = a - b
        if np.count_nonzero(d) < 5:
            continue
        worst = max(worst, abs(wilcoxon_signed_rank(a, b).p_value - _enumerated_p(d[d != 0])))
    fr = friedman_test(FRIEDMAN_EXAMPLE)
    holm = holm_correction([0.01, 0.04, 0.03])
    symmetric = all(
        abs(vargha_delaney_a12(x, y).a12 + vargha_delaney_a12(y, x).a12 - 1.0) < 1e-12
        for x, y in ((rng.integers(0, 5, 10), rng.integers(0, 5, 12)) for _ in range(1000))
    )
    passed = worst < 1e-12 and abs(fr.statistic - 8.0) < 1e-12 and fr.df == 2 \
        and np.allclose(holm, [0.03, 0.06, 0.06], atol=1e-15) and symmetric
    return passed, {"wilcoxon_max_error": worst, "friedman": fr.statistic, "holm": holm, "a12_symmetric": symmetric}


def step_adaptation(args) -> StepResult:
    up = adapt_sigma(SigmaController(0.01, successes=3, trials=10)).sigma
    down = adapt_sigma(SigmaController(0.01, successes=1, trials=10)).sigma
    hold = adapt_sigma(SigmaController(0.01, successes=2, trials=10)).sigma
    passed = up == 0.01 * INCREASE and down == 0.01 * DECREASE and hold == 0.01
    return passed, {"up": up, "down": down, "hold": hold}


def step_determinism(args, state) -> StepResult:
    csvs = {}
    for workers in (1, 4, 8):
        _, grouped = run_battery(headline_configs(args.output_dir), args.seeds, "EvoPref", workers)
        csvs[workers] = "".join(storage.metrics_csv(r) for runs in grouped.values() for r in runs)
    identical = csvs[1] == csvs[4] == csvs[8]
    return identical, {"identical_metric_csvs": identical}


def step_archive_stress(args) -> StepResult:
    rng = np.random.default_rng(11)
    g, m = 10, 3
    archive = GridArchive(g, m)
    genome = random_init([LayerShape(2, 2, 1)], 0.1, rng)
    violations = 0
    F = rng.uniform(size=(100_000, m))
    F[rng.uniform(size=len(F)) < 0.01] = 1.0
    for i, f in enumerate(F):
        cell = cell_index(f, g)
        before = archive.cells.get(cell)
        archive.try_insert(genome, f, i)
        after = archive.cells[cell]
        if len(archive) > g ** m or cell_index(after.objectives, g) != after.cell:
            violations += 1
        if before is not None and after is not before and dominates(before.objectives, after.objectives):
            violations += 1
    return violations == 0, {"inserts": len(F), "occupied": len(archive), "violations": violations}


def step_gradient(args) -> StepResult:
    cfg = ExperimentConfig()
    landscape, shape = build_problem(cfg)
    rng = np.random.default_rng(12)
    w = np.asarray(cfg.weights)
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        i = int(rng.integers(landscape.k))
        point = landscape.centers[i] + rng.normal(0.0, 0.5 * landscape.widths[i], size=landscape.p)
        g = genome_at_feature(point, landscape, shape, cfg.genome.alpha)
        analytic = weighted_gradient(g, landscape, w)
        E = np.eye(g.dimension) * h
        plus = smoothed_objectives(g.flat + E, landscape) @ w
        minus = smoothed_objectives(g.flat - E, landscape) @ w
        numeric = (plus - minus) / (2 * h)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)))
    return worst < 1e-4, {"max_relative_error": worst}


STEPS: Dict[int, Tuple[str, Callable, bool]] = {
    1: ("Dominance sort matches brute force", step_sort_oracle, False),
    2: ("Hypervolume exact and Monte Carlo", step_hypervolume, False),
    3: ("Crossover preserves rank", step_rank_preservation, False),
    4: ("Coverage prediction", step_theory, False),
    5: ("Diversity battery", step_diversity, True),
    6: ("Single-trajectory collapse", step_collapse, True),
    7: ("Ablation direction", step_ablation, True),
    8: ("Statistics oracle", step_stats, False),
    9: ("1/5 rule factors", step_adaptation, False),
    10: ("Determinism across thread counts", step_determinism, True),
    11: ("Archive stress test", step_archive_stress, False),
    12: ("Analytic gradient vs finite differences", step_gradient, False),
}


def run_acceptance(args) -> Dict[int, Dict[str, Any]]:
    wanted = sorted(int(s) for s in args.steps.split(",")) if args.steps else sorted(STEPS)
    state: Dict[str, Any] = {}
    results: Dict[int, Dict[str, Any]] = {}
    for n, number in enumerate(wanted, start=1):
        title, func, needs_state = STEPS[number]
        logger.info("")
        logger.info("=" * 60)
        logger.info(f"STEP {n}/{len(wanted)}: check {number}, {title}...")
        logger.info("=" * 60)
        started = time.perf_counter()
        passed, details = func(args, state) if needs_state else func(args)
        elapsed = time.perf_counter() - started
        results[number] = {"title": title, "passed": bool(passed), "seconds": elapsed, "details": details}
        logger.info(f"check {number}: {'PASS' if passed else 'FAIL'} in {elapsed:.1f}s {details}")
    return results


def main():
    parser = argparse.ArgumentParser(description="Desk-scale acceptance experiments")
    parser.add_argument("--steps", help="Comma-separated step numbers (default: all)")
    parser.add_argument("--seeds", default="1-30")
    parser.add_argument("--workers", type=int, default=settings.NUM_WORKERS)
    parser.add_argument("--output-dir", default=os.path.join(settings.OUTPUT_DIR, "acceptance"))
    args = parser.parse_args()
    args.seeds = parse_seed_list(args.seeds)

    results = run_acceptance(args)
    os.makedirs(args.output_dir, exist_ok=True)
    path = os.path.join(args.output_dir, "acceptance.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(results, f, indent=2, default=str)

    failed = [n for n, r in results.items() if not r["passed"]]
    logger.info("")
    logger.info("=" * 60)
    logger.info(f"{len(results) - len(failed)}/{len(results)} criteria passed; results in {path}")
    if failed:
        logger.info(f"Failed: {failed}")
    logger.info("=" * 60)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()

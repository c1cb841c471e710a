"""
Command-line entry point: run, battery, sweep, ablation, report, plot.

    python scripts/cli.py run --config configs/evopref.cfg --seed 3
    python scripts/cli.py run --config configs/evopref.cfg --algo moead --seed 3
    python scripts/cli.py battery --config configs/evopref.cfg --config configs/moead.cfg --seeds 1-30
    python scripts/cli.py sweep --config configs/evopref.cfg --parameter p_c
    python scripts/cli.py report --label EvoPref --label MOEA/D
    python scripts/cli.py report --theory

Exit codes: 0 success, 2 config error, 3 runtime/algorithm error, 4 I/O error.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

# Project root on the path so `evopref` imports without installation
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from evopref import config as settings  # noqa: E402
from evopref import storage  # noqa: E402
from evopref.config import ALGORITHMS, ExperimentConfig, load_config, parse_seed_list  # noqa: E402
from evopref.errors import ConfigError, EvoPrefError, StorageError  # noqa: E402
from evopref.metrics import theory_report  # noqa: E402
from evopref.plots import emit_plots, sweep_plot  # noqa: E402
from evopref.runner import (  # noqa: E402
    ablation,
    battery_report,
    build_problem,
    format_battery_report,
    run_battery,
    run_single,
    sensitivity_sweep,
)

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format=settings.LOG_FORMAT
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _config(path: Optional[str], output_dir: Optional[str], algo: Optional[str] = None) -> ExperimentConfig:
    cfg = load_config(path) if path else ExperimentConfig()
    if algo and algo != cfg.algorithm:
        # label falls back to the algorithm name
        cfg = cfg.variant(algorithm=algo, label=None)
    if output_dir:
        cfg = cfg.variant(output_dir=output_dir)
    return cfg


def _seeds(text: Optional[str]) -> Optional[List[int]]:
    return parse_seed_list(text) if text else None


def _value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def cmd_run(args) -> None:
    cfg = _config(args.config, args.output_dir, args.algo)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    landscape, _ = build_problem(cfg)
    storage.write_landscape(landscape, cfg.output_dir)
    record = run_single(cfg, seed, landscape)
    path = storage.save_run(record, cfg.output_dir)
    print(f"{record.run_id}: {len(record.final_coverage.covered_modes)}/{landscape.k} modes, "
          f"HV={record.final_hypervolume:.4f}, {record.evaluations_used} evaluations -> {path}")


def _finish_battery(report, grouped, output_dir: str, name: str) -> None:
    storage.save_runs(grouped, output_dir)
    text = format_battery_report(report)
    storage.write_battery_report(report, text, output_dir, name)
    emit_plots([r for runs in grouped.values() for r in runs], os.path.join(output_dir, f"{name}_plots"))
    print(text)


def cmd_battery(args) -> None:
    paths = args.config or [None]
    algos = args.algo or [None]
    configs = [_config(p, args.output_dir, a) for p in paths for a in algos]
    report, grouped = run_battery(configs, _seeds(args.seeds), args.reference, args.workers)
    _finish_battery(report, grouped, configs[0].output_dir, "battery")


def cmd_sweep(args) -> None:
    base = _config(args.config, args.output_dir)
    values = [_value(v) for v in args.values.split(",")] if args.values else None
    seeds = _seeds(args.seeds) or settings.SWEEP_SEEDS
    report, grouped = sensitivity_sweep(base, args.parameter, values, seeds, args.workers)
    storage.save_runs(grouped, base.output_dir)
    storage.write_sweep_report(report, base.output_dir)
    sweep_plot(report.parameter, report.values, report.median_coverage, base.output_dir)
    for value, med in zip(report.values, report.median_coverage):
        flag = "  (default)" if value == report.default else ""
        print(f"{report.parameter}={value}: median coverage {med:.3f}{flag}")


def cmd_ablation(args) -> None:
    base = _config(args.config, args.output_dir)
    report, grouped = ablation(base, _seeds(args.seeds), args.workers)
    _finish_battery(report, grouped, base.output_dir, "ablation")


def cmd_report(args) -> None:
    if args.theory:
        t = theory_report(args.mu, args.generations, args.grid, args.objectives, args.cells_per_mode, args.modes)
        print(f"Coverage prediction k(1 - exp(-mu T / (g^m c))) with mu={t.mu}, T={t.T}, g={t.g}, "
              f"m={t.m}, c={t.c:g}, k={t.k}")
        print(f"  as printed : {t.predicted_modes:.3f} modes (fraction {t.predicted_fraction:.4f})")
        print(f"  without c  : {t.c_free_modes:.3f} modes (fraction {t.c_free_fraction:.4f})")
        print(f"  note: {t.note}")
        return
    summaries = []
    for label in args.label or [None]:
        summaries.extend(storage.list_runs(label=label, landscape_seed=args.landscape_seed,
                                           algorithm=args.algorithm))
    if not summaries:
        raise ConfigError("No stored runs match the filters")
    grouped = storage.load_grouped(summaries)
    report = battery_report(grouped, args.reference, args.metric)
    text = format_battery_report(report)
    out = args.output_dir or settings.OUTPUT_DIR
    storage.write_battery_report(report, text, out, "report")
    print(text)


def cmd_plot(args) -> None:
    summaries = []
    for label in args.label or [None]:
        summaries.extend(storage.list_runs(label=label, landscape_seed=args.landscape_seed))
    if not summaries:
        raise ConfigError("No stored runs match the filters")
    grouped = storage.load_grouped(summaries)
    out = args.output_dir or os.path.join(settings.OUTPUT_DIR, "plots")
    written = emit_plots([r for runs in grouped.values() for r in runs], out)
    for path in written:
        print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evopref", description="EvoPref experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_multiple: bool = False):
        if config_multiple:
            p.add_argument("--config", action="append", help="Config file (repeat for each algorithm)")
        else:
            p.add_argument("--config", help="Config file (key=value, dotted sections)")
        p.add_argument("--output-dir", help="Override the output directory")
        p.add_argument("--workers", type=int, default=settings.NUM_WORKERS, help="Worker threads")

    p = sub.add_parser("run", help="Single (config, seed) run")
    common(p)
    p.add_argument("--algo", choices=ALGORITHMS, help="Override the config's algorithm")
    p.add_argument("--seed", type=int, help="Run seed (default: first seed of the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("battery", help="Several configs over the same seeds, with statistics")
    common(p, config_multiple=True)
    p.add_argument("--algo", action="append", choices=ALGORITHMS,
                   help="Algorithm to run on every config (repeatable)")
    p.add_argument("--seeds", help="Seed list, e.g. 1-30")
    p.add_argument("--reference", help="Label the others are compared against")
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("sweep", help="One-parameter sensitivity sweep")
    common(p)
    p.add_argument("--parameter", required=True, help="sigma0, p_c, grid (g) or tournament_size (k_t)")
    p.add_argument("--values", help="Comma-separated values (default: the preset grid)")
    p.add_argument("--seeds", help="Seed list (default 1-15)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablation", help="Full algorithm against its ablated variants")
    common(p)
    p.add_argument("--seeds", help="Seed list")
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("report", help="Statistics from stored runs, or the coverage prediction")
    p.add_argument("--theory", action="store_true", help="Print the coverage prediction instead")
    p.add_argument("--label", action="append", help="Run label to include (repeatable)")
    p.add_argument("--algorithm")
    p.add_argument("--landscape-seed", type=int)
    p.add_argument("--reference")
    p.add_argument("--metric", default="coverage_fraction",
                   choices=["coverage_fraction", "covered_modes", "hypervolume"])
    p.add_argument("--output-dir")
    p.add_argument("--mu", type=int, default=32)
    p.add_argument("--generations", type=int, default=50)
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--objectives", type=int, default=3)
    p.add_argument("--cells-per-mode", type=float, default=4.0)
    p.add_argument("--modes", type=int, default=50)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", help="SVG plots (and their CSVs) from stored runs")
    p.add_argument("--label", action="append")
    p.add_argument("--landscape-seed", type=int)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (StorageError, OSError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except EvoPrefError as e:
        logger.error(f"Run failed: {e}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

import numpy as np
import pytest

from evopref import runner
from evopref.config import LandscapeConfig, ablation_variants
from evopref.errors import ConfigError, GenerationError, ParameterError
from evopref.genome import LowRankGenome
from evopref.landscape import evaluate_batch, generation_seed, genome_at_feature, landscape_for
from evopref.runner import (
    RunRecorder,
    battery_report,
    execute,
    format_battery_report,
    offspring_successes,
    run_battery,
    run_single,
    sensitivity_sweep,
)
from evopref.storage import metrics_csv


def test_evopref_run_logs_every_generation(small_config):
    record = run_single(small_config, 1)
    G = small_config.generations
    assert [row.generation for row in record.rows] == list(range(G + 1))
    first = record.rows[0]
    assert (first.evaluations_used, first.hypervolume, first.covered_modes, first.archive_occupied) == (0, 0.0, 0, 0)
    assert record.evaluations_used == small_config.mu * G
    assert record.rows[-1].evaluations_used == small_config.mu * G
    assert record.final_hypervolume == pytest.approx(record.rows[-1].hypervolume)


def test_archive_hypervolume_never_decreases(small_config):
    record = run_single(small_config, 2)
    hv = [row.hypervolume for row in record.rows]
    assert all(b >= a - 1e-12 for a, b in zip(hv, hv[1:]))
    occupied = [row.archive_occupied for row in record.rows]
    assert all(b >= a for a, b in zip(occupied, occupied[1:]))
    assert occupied[-1] <= small_config.grid ** 3


def test_run_is_deterministic(small_config):
    a = run_single(small_config, 3)
    b = run_single(small_config, 3)
    assert metrics_csv(a) == metrics_csv(b)
    assert a.final_objectives == b.final_objectives
    assert a.run_id == b.run_id


def test_sigma_trajectory_and_extra(small_config):
    record = run_single(small_config, 1)
    assert len(record.sigma_trajectory) == small_config.generations + 1
    assert record.extra["final_sigma"] == pytest.approx(record.sigma_trajectory[-1])
    assert set(record.extra["composition"]) == {"objective_1", "objective_2", "objective_3", "balanced"}
    assert record.cells_per_mode is not None


def test_zero_generations_leaves_empty_archive(small_config):
    record = run_single(small_config.variant(generations=0), 1)
    assert len(record.rows) == 1
    assert record.final_archive == []
    assert record.final_coverage.covered_modes == []
    assert record.evaluations_used == 0


@pytest.mark.parametrize("flag", ["no_archive", "no_crossover", "no_crowding", "generational"])
def test_ablation_flags_run(small_config, flag):
    record = run_single(small_config.variant(**{flag: True}), 1)
    assert len(record.rows) == small_config.generations + 1
    assert record.evaluations_used == small_config.mu * small_config.generations
    if flag == "no_archive":
        assert "composition" not in record.extra


@pytest.mark.parametrize("algorithm", ["moead", "smsemoa", "cmaes", "random", "gradient"])
def test_baselines_share_the_row_layout(small_config, algorithm):
    cfg = small_config.variant(algorithm=algorithm, label=algorithm)
    record = run_single(cfg, 1)
    G = small_config.generations
    assert [row.generation for row in record.rows] == list(range(G + 1))
    assert record.rows[0].evaluations_used == 0
    assert record.max_evaluations == small_config.mu * G
    assert record.evaluations_used <= record.max_evaluations
    if algorithm in ("moead", "smsemoa", "random"):
        assert record.evaluations_used == record.max_evaluations


def test_gradient_record_notes_surrogate(small_config):
    record = run_single(small_config.variant(algorithm="gradient", label="gd"), 2)
    assert record.extra["steps_per_restart"] == small_config.mu * small_config.generations // 4 - 1
    assert len(record.final_objectives) == 4


def test_generation_errors_carry_the_generation(small_config, monkeypatch):
    def broken(*args, **kwargs):
        raise ParameterError("boom")
    monkeypatch.setattr(runner, "gaussian_mutate", broken)
    with pytest.raises(GenerationError) as info:
        run_single(small_config, 1)
    assert info.value.generation == 1


def test_recorder_pads_to_final_generation(small_landscape):
    rec = RunRecorder(small_landscape, mu=4, generations=3)
    rec.observe(0, [], np.zeros((0, 3)), None)
    rec.finish()
    assert len(rec.rows) == 4
    assert set(rec.snapshots) == {0, 1, 2, 3}


def test_execute_is_thread_count_independent(small_config):
    configs = [small_config, small_config.variant(algorithm="random", label="Random")]
    one = execute(configs, [1, 2], workers=1)
    three = execute(configs, [1, 2], workers=3)
    assert list(one) == ["EvoPref", "Random"]
    for label in one:
        assert [metrics_csv(r) for r in one[label]] == [metrics_csv(r) for r in three[label]]


@pytest.mark.slow
def test_battery_report_statistics(small_config):
    configs = [
        small_config,
        small_config.variant(algorithm="random", label="Random"),
        small_config.variant(algorithm="moead", label="MOEA/D"),
    ]
    report, grouped = run_battery(configs, reference="EvoPref", workers=2)
    assert [s.label for s in report.summaries] == ["EvoPref", "Random", "MOEA/D"]
    assert report.friedman is not None
    assert report.friedman.n_blocks == 5
    assert [c.comparison for c in report.comparisons] == ["EvoPref vs Random", "EvoPref vs MOEA/D"]
    for row in report.comparisons:
        assert row.adjusted_p >= row.p_value - 1e-15
        assert 0.0 <= row.a12 <= 1.0
    assert report.budgets_equal
    assert len(report.runs) == 15
    text = format_battery_report(report)
    assert "Friedman" in text
    assert "EvoPref vs Random" in text


def test_battery_rejects_mixed_landscapes(small_config):
    other = small_config.variant(landscape={"seed": 9}, label="other")
    with pytest.raises(ConfigError):
        run_battery([small_config, other], seeds=[1])


def test_battery_report_rejects_unknown_reference(small_config):
    grouped = execute([small_config], [1])
    with pytest.raises(ConfigError):
        battery_report(grouped, reference="nope")


def test_duplicate_labels_are_suffixed(small_config):
    report, grouped = run_battery([small_config, small_config], seeds=[1, 2, 3, 4, 5], workers=1)
    assert list(grouped) == ["EvoPref", "EvoPref#2"]


@pytest.mark.slow
def test_sweep_uses_alias_and_reports_medians(small_config):
    report, grouped = sensitivity_sweep(small_config, "g", [3, 4], seeds=[1, 2], workers=2)
    assert report.parameter == "grid"
    assert report.values == [3, 4]
    assert report.default == 10
    assert len(report.median_coverage) == 2
    assert list(grouped) == ["grid=3", "grid=4"]


def test_sweep_rejects_unknown_parameter(small_config):
    with pytest.raises(ConfigError):
        sensitivity_sweep(small_config, "alpha", [1], seeds=[1])


def test_ablation_rows(small_config):
    labels = [cfg.name for cfg in ablation_variants(small_config)]
    assert labels == ["Full", "w/o Archive", "w/o LoRA Crossover", "w/o Crowding", "mu=8", "mu=64", "Random"]
    random_row = ablation_variants(small_config)[-1]
    assert random_row.evaluation_budget == small_config.mu * small_config.generations


def test_offspring_successes_compare_under_one_noise_draw(small_landscape, small_shape):
    noisy = LandscapeConfig(**{**small_landscape.config.model_dump(), "noise_scale": 0.05})
    L = landscape_for(noisy, small_shape)
    parents = [genome_at_feature(L.centers[i], L, small_shape) for i in range(3)]
    gen_seed = generation_seed(7, 4)
    unchanged = evaluate_batch([g.copy() for g in parents], L, gen_seed)
    assert offspring_successes(unchanged, parents, L, gen_seed) == [False] * 3

    far = genome_at_feature(np.full(L.p, 50.0), L, small_shape)
    assert offspring_successes(unchanged[:1], [far], L, gen_seed) == [True]
    with pytest.raises(ParameterError):
        offspring_successes(unchanged[:2], parents, L, gen_seed)


def test_unchanged_offspring_never_count_as_successes(small_config, monkeypatch):
    config = small_config.variant(p_c=0.0, landscape={"noise_scale": 0.05})

    def clone(parent, sigma, seed, genome_id=None):
        return LowRankGenome(parent.flat.copy(), parent.shape, parent.alpha, genome_id)

    monkeypatch.setattr(runner, "gaussian_mutate", clone)
    seen = []
    real = runner.record_offspring

    def spy(ctrl, improved):
        seen.append(improved)
        return real(ctrl, improved)

    monkeypatch.setattr(runner, "record_offspring", spy)
    run_single(config, 1)
    assert len(seen) == config.mu * (config.generations - 1)
    assert not any(seen)

import pytest

from evopref import storage
from evopref.config import dump_config
from evopref.errors import ConfigError
from scripts import cli
from scripts.cli import EXIT_CONFIG, EXIT_OK, main


@pytest.fixture
def config_file(small_config, tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(dump_config(small_config))
    return str(path)


def test_theory_report(capsys):
    assert main(["report", "--theory"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "as printed" in out
    assert "without c" in out


def test_run_saves_and_indexes(config_file, results_dir):
    assert main(["run", "--config", config_file, "--seed", "3"]) == EXIT_OK
    assert (results_dir / "landscape.json").exists()
    assert (results_dir / "EvoPref" / "seed_3" / "metrics.csv").exists()
    assert [r.seed for r in storage.list_runs()] == [3]


@pytest.mark.slow
def test_battery_then_report(config_file, results_dir, capsys):
    assert main(["battery", "--config", config_file, "--seeds", "1-5", "--workers", "2"]) == EXIT_OK
    assert (results_dir / "battery_report.json").exists()
    assert (results_dir / "battery_plots" / "hypervolume.svg").exists()
    assert main(["report", "--label", "EvoPref", "--output-dir", str(results_dir)]) == EXIT_OK
    assert (results_dir / "report_summary.csv").exists()


def test_config_errors_exit_2(results_dir):
    assert main(["run", "--config", "/nonexistent/evopref.cfg"]) == EXIT_CONFIG
    assert main(["report", "--label", "nothing-stored"]) == EXIT_CONFIG
    assert main(["sweep", "--parameter", "alpha"]) == EXIT_CONFIG


def test_algo_flag_overrides_config_algorithm(config_file, results_dir):
    assert main(["run", "--config", config_file, "--seed", "2", "--algo", "random"]) == EXIT_OK
    assert [(r.algorithm, r.label) for r in storage.list_runs()] == [("random", "random")]
    assert (results_dir / "random" / "seed_2" / "metrics.csv").exists()


def test_battery_runs_each_algo_on_each_config(config_file, monkeypatch):
    seen = []

    def fake_battery(configs, seeds, reference, workers):
        seen.extend((c.algorithm, c.name) for c in configs)
        raise ConfigError("stop")

    monkeypatch.setattr(cli, "run_battery", fake_battery)
    argv = ["battery", "--config", config_file, "--algo", "evopref", "--algo", "cmaes", "--seeds", "1-2"]
    assert main(argv) == EXIT_CONFIG
    # evopref keeps the file's label
    assert seen == [("evopref", "EvoPref"), ("cmaes", "cmaes")]


def test_unknown_algo_is_a_usage_error():
    with pytest.raises(SystemExit):
        main(["run", "--algo", "nsga3"])

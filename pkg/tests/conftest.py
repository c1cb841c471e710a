import numpy as np
import pytest

from evopref import config as settings
from evopref.config import ExperimentConfig, LandscapeConfig
from evopref.genome import LayerShape
from evopref.landscape import landscape_for

SMALL_LANDSCAPE = {"k": 6, "p": 3, "m": 3, "seed": 0, "width": 0.3}
SMALL_GENOME = {"n_layers": 1, "d": 4, "k_cols": 4, "r": 2}


@pytest.fixture
def small_shape():
    return [LayerShape(4, 4, 2)]


@pytest.fixture
def small_landscape(small_shape):
    return landscape_for(LandscapeConfig(**SMALL_LANDSCAPE), small_shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def results_dir(tmp_path, monkeypatch):
    """Output directory and run index isolated per test"""
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.setattr(settings, "DB_PATH", str(tmp_path / "results" / "runs.db"))
    return tmp_path / "results"


@pytest.fixture
def small_config(results_dir):
    return ExperimentConfig(
        label="EvoPref",
        mu=8,
        generations=6,
        grid=4,
        window=2,
        seeds=[1, 2, 3, 4, 5],
        landscape=SMALL_LANDSCAPE,
        genome=SMALL_GENOME,
        output_dir=str(results_dir),
        gradient_restarts=4,
        cmaes_popsize=8,
        snapshot_every=1,
    )

import numpy as np
import pytest

from evopref.adaptation import DECREASE, INCREASE, SigmaController, adapt_sigma, maybe_adapt, record_offspring
from evopref.errors import ParameterError


def test_factors_are_exact():
    assert adapt_sigma(SigmaController(0.01, successes=3, trials=10)).sigma == 0.01 * 1.2
    assert adapt_sigma(SigmaController(0.01, successes=1, trials=10)).sigma == 0.01 * 1.2 ** -0.25
    assert INCREASE == 1.2
    assert DECREASE == 1.2 ** -0.25


def test_exactly_one_fifth_holds():
    assert adapt_sigma(SigmaController(0.01, successes=2, trials=10)).sigma == 0.01
    assert adapt_sigma(SigmaController(0.01, successes=64, trials=320)).sigma == 0.01


def test_no_trials_is_a_no_op():
    ctrl = adapt_sigma(SigmaController(0.05))
    assert ctrl.sigma == 0.05


def test_adapt_resets_counters_and_clamps():
    ctrl = adapt_sigma(SigmaController(0.95, successes=10, trials=10))
    assert ctrl.sigma == 1.0
    assert (ctrl.successes, ctrl.trials) == (0, 0)
    low = adapt_sigma(SigmaController(1e-6, successes=0, trials=10))
    assert low.sigma == 1e-6


def test_record_and_window():
    ctrl = SigmaController(0.01, window=3)
    for improved in (True, False, False):
        ctrl = record_offspring(ctrl, improved)
    assert ctrl.success_rate == pytest.approx(1 / 3)
    assert maybe_adapt(ctrl, 2) is ctrl
    adapted = maybe_adapt(ctrl, 3)
    assert adapted.sigma == pytest.approx(0.012)
    assert adapted.trials == 0


def test_invalid_controller():
    with pytest.raises(ParameterError):
        SigmaController(0.0)
    with pytest.raises(ParameterError):
        SigmaController(0.1, sigma_min=1.0, sigma_max=0.5)


def _one_plus_four(seed: int, generations: int = 300):
    """(1+4)-ES on -|x| in 5-D; sigma recorded after every generation"""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=5)
    ctrl = SigmaController(1.0, window=5, sigma_max=10.0)
    sigmas = []
    for t in range(1, generations + 1):
        children = x + ctrl.sigma * rng.normal(size=(4, 5))
        dist = np.linalg.norm(children, axis=1)
        for d in dist:
            ctrl = record_offspring(ctrl, d < np.linalg.norm(x))
        best = int(np.argmin(dist))
        if dist[best] < np.linalg.norm(x):
            x = children[best]
        ctrl = maybe_adapt(ctrl, t)
        sigmas.append(ctrl.sigma)
    return np.array(sigmas)


def test_sigma_shrinks_on_a_single_peak():
    trajectories = np.stack([_one_plus_four(seed) for seed in range(20)])
    checkpoints = np.median(trajectories[:, [59, 119, 179, 239, 299]], axis=0)
    assert np.all(np.diff(checkpoints) < 0)
    assert checkpoints[-1] < 0.2

import itertools
import math

import numpy as np
import pytest

from evopref.errors import MissingSnapshotError, ParameterError
from evopref.metrics import (
    collapse_rate,
    coverage_from_modes,
    coverage_of_features,
    coverage_prediction,
    empirical_coverage_curve,
    hv_contributions,
    hypervolume,
    hypervolume_mc,
    is_collapsed,
    theory_report,
)
from evopref.models import CoverageReport
from evopref.runner import build_problem, evopref_run, run_single


def inclusion_exclusion(P):
    total = 0.0
    for size in range(1, len(P) + 1):
        for subset in itertools.combinations(range(len(P)), size):
            total += (-1) ** (size + 1) * float(np.prod(P[list(subset)].min(axis=0)))
    return total


def test_hypervolume_simple_cases():
    assert hypervolume([[0.5, 0.5]]) == pytest.approx(0.25)
    assert hypervolume([[1.0, 0.2], [0.2, 1.0]]) == pytest.approx(0.36)
    assert hypervolume([[0.5, 0.5, 0.5]]) == pytest.approx(0.125)
    assert hypervolume(np.zeros((0, 3)), np.zeros(3)) == 0.0
    assert hypervolume([[0.7]]) == pytest.approx(0.7)


def test_dominated_points_add_nothing():
    assert hypervolume([[0.6, 0.6], [0.3, 0.3]]) == pytest.approx(0.36)


@pytest.mark.parametrize("seed", range(40))
def test_exact_3d_matches_inclusion_exclusion(seed):
    rng = np.random.default_rng(seed)
    P = rng.uniform(size=(int(rng.integers(1, 6)), 3))
    assert abs(hypervolume(P) - inclusion_exclusion(P)) < 1e-9


def test_exact_2d_matches_inclusion_exclusion():
    rng = np.random.default_rng(99)
    for _ in range(50):
        P = rng.uniform(size=(int(rng.integers(1, 7)), 2))
        assert abs(hypervolume(P) - inclusion_exclusion(P)) < 1e-12


def test_points_below_reference_are_discarded(caplog):
    hv = hypervolume([[0.5, 0.5], [0.05, 0.9]], reference=[0.1, 0.1])
    assert hv == pytest.approx(0.16)
    assert "below the hypervolume reference" in caplog.text


def test_exact_hypervolume_limited_to_three_objectives():
    with pytest.raises(ParameterError):
        hypervolume(np.full((2, 4), 0.5))


def test_monte_carlo_within_three_standard_errors():
    rng = np.random.default_rng(1)
    P = rng.uniform(size=(20, 3))
    est, se = hypervolume_mc(P, n_samples=200_000, seed=3)
    assert se > 0
    assert abs(est - hypervolume(P)) <= 3 * se + 1e-12


def test_monte_carlo_handles_four_objectives():
    est, se = hypervolume_mc([[0.5, 0.5, 0.5, 0.5]], n_samples=10_000, seed=0)
    assert est == pytest.approx(0.0625)
    assert se == 0.0


def test_pymoo_agrees_when_available():
    pymoo_hv = pytest.importorskip("pymoo.indicators.hv")
    rng = np.random.default_rng(4)
    P = rng.uniform(size=(15, 3))
    # pymoo minimizes with reference at the top corner
    reference = pymoo_hv.HV(ref_point=np.zeros(3))(-P)
    assert hypervolume(P) == pytest.approx(reference, abs=1e-9)


def test_contributions():
    P = np.array([[0.9, 0.1], [0.5, 0.5], [0.1, 0.9]])
    contrib = hv_contributions(P, np.zeros(2))
    np.testing.assert_allclose(contrib, [0.04, 0.16, 0.04], atol=1e-12)


def test_collapse_threshold_is_strict():
    assert is_collapsed(13, 20)
    assert not is_collapsed(14, 20)
    assert is_collapsed(34, 50)
    assert not is_collapsed(35, 50)


def test_coverage_from_modes():
    report = coverage_from_modes([3, None, 3, 1], 20)
    assert report.covered_modes == [1, 3]
    assert report.coverage_fraction == pytest.approx(0.1)
    assert report.collapsed


def test_coverage_of_features(small_landscape):
    L = small_landscape
    report = coverage_of_features(np.vstack([L.centers, np.full((1, L.p), 40.0)]), L)
    assert report.covered_modes == list(range(L.k))
    assert report.coverage_fraction == 1.0
    assert not report.collapsed
    assert coverage_of_features(np.zeros((0, L.p)), L).covered_modes == []


def test_collapse_rate():
    reports = [CoverageReport(covered_modes=[], coverage_fraction=0.0, collapsed=c, k=10) for c in (True, False, True)]
    assert collapse_rate(reports) == pytest.approx(2 / 3)
    assert collapse_rate([]) == 0.0


def test_coverage_prediction_values():
    assert coverage_prediction(32, 50, 10, 3, 4, 50) == pytest.approx(50 * (1 - math.exp(-0.4)))
    assert coverage_prediction(32, 50, 10, 3, 4, 50) == pytest.approx(16.484, abs=1e-3)
    assert coverage_prediction(32, 50, 10, 3, 1, 50) / 50 == pytest.approx(0.7981, abs=1e-4)
    with pytest.raises(ParameterError):
        coverage_prediction(0, 50, 10, 3, 4, 50)


def test_theory_report_carries_both_values():
    report = theory_report()
    assert report.predicted_fraction == pytest.approx(0.3297, abs=1e-4)
    assert report.c_free_fraction == pytest.approx(0.7981, abs=1e-4)
    assert "0.80" in report.note


def test_empirical_curve_requires_snapshots(small_config):
    record = run_single(small_config, 1)
    curve = empirical_coverage_curve(record, build_problem(small_config)[0])
    assert sorted(curve) == list(range(small_config.generations + 1))
    assert curve[small_config.generations] == len(record.final_coverage.covered_modes)
    del record.snapshots[2]
    with pytest.raises(MissingSnapshotError):
        empirical_coverage_curve(record, build_problem(small_config)[0])


@pytest.mark.slow
@pytest.mark.parametrize("landscape_seed", [0, 1, 2])
def test_archive_coverage_curve_never_decreases(small_config, landscape_seed):
    config = small_config.variant(
        mu=16,
        generations=30,
        grid=4,
        landscape={"k": 20, "p": 3, "width": 0.1, "seed": landscape_seed},
    )
    L = build_problem(config)[0]
    for seed in range(1, 11):
        curve = empirical_coverage_curve(evopref_run(config, seed, L), L)
        counts = [curve[t] for t in sorted(curve)]
        drops = [(t, a, b) for t, (a, b) in enumerate(zip(counts, counts[1:])) if b < a]
        assert drops == [], f"seed {seed}"

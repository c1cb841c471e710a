import numpy as np
import pytest

from evopref.config import LandscapeConfig
from evopref.errors import ConstructionError, IncompatibilityError, ParameterError
from evopref.genome import random_init
from evopref.landscape import (
    build_landscape,
    evaluate,
    evaluate_batch,
    generation_noise,
    generation_seed,
    genome_at_feature,
    landscape_for,
    mode_of,
    modes_of_features,
    noiseless_objectives,
    smoothed_objectives,
    weighted_gradient,
)
from evopref.selection import dominates


def test_landscape_is_reproducible(small_shape):
    cfg = LandscapeConfig(k=6, p=3, seed=4, width=0.3)
    a = landscape_for(cfg, small_shape)
    b = landscape_for(cfg, small_shape)
    np.testing.assert_array_equal(a.centers, b.centers)
    np.testing.assert_array_equal(a.projection, b.projection)
    np.testing.assert_array_equal(a.scores, b.scores)


def test_centers_are_separated(small_landscape):
    c = small_landscape.centers
    for i in range(len(c)):
        for j in range(i + 1, len(c)):
            assert np.linalg.norm(c[i] - c[j]) >= 3 * small_landscape.widths.max() - 1e-12


def test_mode_scores_do_not_dominate_each_other(small_landscape):
    S = small_landscape.scores
    for i in range(len(S)):
        for j in range(len(S)):
            if i != j:
                assert not dominates(S[i], S[j])


def test_impossible_separation_fails():
    with pytest.raises(ConstructionError):
        build_landscape(50, 1, 8, 0, LandscapeConfig(k=50, p=1, width=0.5, max_retries=50))


def test_feature_dimension_cannot_exceed_genome_dimension():
    with pytest.raises(ParameterError):
        build_landscape(3, 20, 16, 0, LandscapeConfig(k=3, p=20))


def test_genome_at_center_scores_near_profile(small_landscape, small_shape):
    L = small_landscape
    g = genome_at_feature(L.centers[2], L, small_shape)
    assert mode_of(g, L) == 2
    f = noiseless_objectives(g.flat, L)[0]
    # neighbouring basins contribute at most exp(-4.5) of their score
    np.testing.assert_allclose(f, np.minimum(L.floor + L.scores[2], 1.0), atol=0.02)


def test_far_from_every_mode_scores_floor(small_landscape, small_shape):
    L = small_landscape
    g = genome_at_feature(np.full(L.p, 50.0), L, small_shape)
    assert mode_of(g, L) is None
    np.testing.assert_allclose(noiseless_objectives(g.flat, L)[0], L.floor, atol=1e-9)


def test_objectives_in_unit_box(small_landscape, small_shape):
    rng = np.random.default_rng(0)
    genomes = [random_init(small_shape, 0.2, rng) for _ in range(50)]
    F = evaluate_batch(genomes, small_landscape, generation_seed(1, 1))
    assert F.shape == (50, 3)
    assert np.all((F >= 0) & (F <= 1))


def test_noise_is_shared_within_a_generation(small_landscape, small_shape):
    L = small_landscape
    genomes = [random_init(small_shape, 0.2, s) for s in range(4)]
    seed = generation_seed(3, 7)
    noisy = evaluate_batch(genomes, L, seed)
    clean = noiseless_objectives(np.stack([g.flat for g in genomes]), L)
    shift = noisy - clean
    unclipped = (noisy > 0) & (noisy < 1)
    noise = generation_noise(L, seed)
    for j in range(L.m):
        np.testing.assert_allclose(shift[unclipped[:, j], j], noise[j], atol=1e-12)


def test_evaluate_matches_batch_and_no_noise(small_landscape, small_shape):
    g = random_init(small_shape, 0.2, 9)
    np.testing.assert_array_equal(evaluate(g, small_landscape, 11), evaluate_batch([g], small_landscape, 11)[0])
    np.testing.assert_allclose(evaluate(g, small_landscape, None), noiseless_objectives(g.flat, small_landscape)[0])


def test_generation_seed_depends_on_run_and_block():
    assert generation_seed(1, 1) == generation_seed(1, 1)
    assert generation_seed(1, 1) != generation_seed(1, 2)
    assert generation_seed(1, 1) != generation_seed(2, 1)


def test_features_reject_wrong_dimension(small_landscape):
    with pytest.raises(IncompatibilityError):
        small_landscape.features(np.zeros(7))


def test_modes_of_features_capture_radius(small_landscape):
    L = small_landscape
    inside = L.centers[0] + 0.5 * L.widths[0]
    outside = np.full(L.p, 40.0)
    assert modes_of_features(np.stack([inside, outside]), L) == [0, None]
    assert modes_of_features(np.zeros((0, L.p)), L) == []


def test_smoothed_objectives_upper_bound_max(small_landscape, small_shape):
    rng = np.random.default_rng(3)
    X = np.stack([random_init(small_shape, 0.2, rng).flat for _ in range(20)])
    assert np.all(smoothed_objectives(X, small_landscape) >= noiseless_objectives(X, small_landscape) - 1e-12)


def test_weighted_gradient_matches_finite_differences(small_landscape, small_shape):
    L = small_landscape
    w = np.array([0.4, 0.3, 0.3])
    rng = np.random.default_rng(5)
    h = 1e-6
    for _ in range(10):
        i = int(rng.integers(L.k))
        g = genome_at_feature(L.centers[i] + rng.normal(0, 0.15, size=L.p), L, small_shape)
        analytic = weighted_gradient(g, L, w)
        E = np.eye(g.dimension) * h
        numeric = (smoothed_objectives(g.flat + E, L) @ w - smoothed_objectives(g.flat - E, L) @ w) / (2 * h)
        assert np.linalg.norm(analytic - numeric) <= 1e-4 * max(np.linalg.norm(numeric), 1e-12)


def test_weighted_gradient_rejects_bad_weights(small_landscape, small_shape):
    g = random_init(small_shape, 0.1, 0)
    with pytest.raises(ParameterError):
        weighted_gradient(g, small_landscape, [1.0, 0.0])
    with pytest.raises(ParameterError):
        weighted_gradient(g, small_landscape, [-1.0, 1.0, 1.0])

import numpy as np
import pytest

from evopref.errors import IncompatibilityError, LayerIndexError, ParameterError, ShapeError
from evopref.genome import (
    LayerShape,
    LowRankGenome,
    default_shape,
    effective_delta,
    flatten,
    from_layers,
    gaussian_mutate,
    genome_from_dict,
    genome_to_dict,
    numerical_rank,
    random_init,
    rank_preserving_crossover,
    sample_gamma,
    total_dimension,
    unflatten,
)


def test_default_shape_is_512_dimensional():
    assert total_dimension(default_shape()) == 512


def test_layer_shape_rejects_rank_above_min_dimension():
    with pytest.raises(ShapeError):
        LayerShape(4, 2, 3)


def test_flat_layout_is_b_then_a_per_layer():
    B = np.arange(8.0).reshape(4, 2)
    A = np.arange(8.0, 16.0).reshape(2, 4)
    g = from_layers([(B, A)])
    np.testing.assert_array_equal(g.flat, np.arange(16.0))
    B2, A2 = g.layers[0]
    np.testing.assert_array_equal(B2, B)
    np.testing.assert_array_equal(A2, A)


def test_unflatten_checks_length(small_shape):
    with pytest.raises(ShapeError):
        unflatten(np.zeros(15), small_shape)


def test_genome_is_read_only(small_shape):
    g = random_init(small_shape, 0.1, 0)
    with pytest.raises(ValueError):
        g.flat[0] = 1.0
    copy = flatten(g)
    copy[0] = 99.0
    assert g.flat[0] != 99.0


def test_random_init_is_seeded(small_shape):
    a = random_init(small_shape, 0.01, 7)
    b = random_init(small_shape, 0.01, 7)
    assert a == b
    assert a.flat.std() == pytest.approx(0.01, rel=0.5)


def test_random_init_rejects_bad_sigma(small_shape):
    with pytest.raises(ParameterError):
        random_init(small_shape, 0.0, 0)


def test_mutation_leaves_parent_untouched(small_shape):
    parent = random_init(small_shape, 0.1, 0)
    before = parent.flat.copy()
    child = gaussian_mutate(parent, 0.05, 1)
    np.testing.assert_array_equal(parent.flat, before)
    assert child != parent
    assert child.shape == parent.shape


def test_mutation_displacement_matches_sigma():
    parent = random_init([LayerShape(32, 32, 4)], 0.01, 3)
    rng = np.random.default_rng(11)
    msd = np.mean([np.mean((gaussian_mutate(parent, 0.01, rng).flat - parent.flat) ** 2) for _ in range(1000)])
    assert msd == pytest.approx(1e-4, rel=0.2)


def test_crossover_endpoints_copy_parents(small_shape):
    p1 = random_init(small_shape, 0.1, 1)
    p2 = random_init(small_shape, 0.1, 2)
    assert rank_preserving_crossover(p1, p2, 1.0) == p1
    assert rank_preserving_crossover(p1, p2, 0.0) == p2


def test_crossover_interpolates_factors_not_products(small_shape):
    p1 = random_init(small_shape, 0.1, 1)
    p2 = random_init(small_shape, 0.1, 2)
    child = rank_preserving_crossover(p1, p2, 0.4)
    B, A = child.layers[0]
    np.testing.assert_allclose(B, 0.4 * p1.layers[0][0] + 0.6 * p2.layers[0][0])
    np.testing.assert_allclose(A, 0.4 * p1.layers[0][1] + 0.6 * p2.layers[0][1])


def test_crossover_keeps_rank_where_product_averaging_does_not():
    shape = [LayerShape(16, 16, 4)]
    rng = np.random.default_rng(0)
    exceeded = 0
    for _ in range(20):
        p1 = random_init(shape, 0.1, rng)
        p2 = random_init(shape, 0.1, rng)
        gamma = sample_gamma(rng)
        assert numerical_rank(effective_delta(rank_preserving_crossover(p1, p2, gamma), 0)) <= 4
        naive = gamma * effective_delta(p1, 0) + (1 - gamma) * effective_delta(p2, 0)
        exceeded += numerical_rank(naive) > 4
    assert exceeded >= 18


def test_crossover_rejects_mismatched_parents(small_shape):
    p1 = random_init(small_shape, 0.1, 1)
    p2 = random_init([LayerShape(4, 4, 1)], 0.1, 2)
    with pytest.raises(IncompatibilityError):
        rank_preserving_crossover(p1, p2, 0.5)
    with pytest.raises(IncompatibilityError):
        rank_preserving_crossover(p1, random_init(small_shape, 0.1, 3, alpha=16.0), 0.5)
    with pytest.raises(ParameterError):
        rank_preserving_crossover(p1, random_init(small_shape, 0.1, 3), 1.5)


def test_sample_gamma_range():
    rng = np.random.default_rng(0)
    values = [sample_gamma(rng) for _ in range(1000)]
    assert min(values) >= 0.3
    assert max(values) < 0.7


def test_effective_delta_scaling_and_index():
    B = np.ones((4, 2))
    A = np.ones((2, 4))
    g = from_layers([(B, A)], alpha=8.0)
    np.testing.assert_allclose(effective_delta(g, 0), 4.0 * (B @ A))
    with pytest.raises(LayerIndexError):
        effective_delta(g, 1)


def test_numerical_rank_of_zero_matrix():
    assert numerical_rank(np.zeros((3, 3))) == 0


@pytest.mark.parametrize("encoding", ["plain", "base64"])
def test_genome_json_snapshot(small_shape, encoding):
    g = random_init(small_shape, 0.1, 5, genome_id="g-5")
    restored = genome_from_dict(genome_to_dict(g, encoding))
    assert restored == g
    assert restored.id == "g-5"


def test_genome_equality_and_hash(small_shape):
    a = random_init(small_shape, 0.1, 1)
    b = LowRankGenome(a.flat, small_shape, a.alpha, "other-id")
    assert a == b
    assert hash(a) == hash(b)

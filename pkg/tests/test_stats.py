import itertools

import numpy as np
import pytest
from scipy.stats import rankdata

from evopref.errors import ParameterError
from evopref.stats import (
    FRIEDMAN_EXAMPLE,
    effect_magnitude,
    friedman_test,
    holm_correction,
    median_iqr,
    vargha_delaney_a12,
    wilcoxon_signed_rank,
)


def enumerated_p(d):
    ranks = rankdata(np.abs(d))
    observed = min(ranks[d > 0].sum(), ranks[d < 0].sum())
    total = ranks.sum()
    hits = sum(
        1 for signs in itertools.product((0, 1), repeat=len(d))
        if min(np.dot(signs, ranks), total - np.dot(signs, ranks)) <= observed + 1e-9
    )
    return hits / 2 ** len(d)


def test_wilcoxon_all_positive_five_pairs():
    result = wilcoxon_signed_rank([2, 3, 4, 5, 6], [1, 1, 1, 1, 1])
    assert result.p_value == pytest.approx(0.0625)
    assert result.exact
    assert result.statistic == 0.0


def test_wilcoxon_identical_samples_degenerate():
    result = wilcoxon_signed_rank([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    assert result.degenerate
    assert result.p_value == 1.0


def test_wilcoxon_is_symmetric():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=12), rng.normal(size=12)
    assert wilcoxon_signed_rank(a, b).p_value == wilcoxon_signed_rank(b, a).p_value


def test_wilcoxon_needs_five_pairs():
    with pytest.raises(ParameterError):
        wilcoxon_signed_rank([1, 2, 3], [0, 0, 0])
    with pytest.raises(ParameterError):
        wilcoxon_signed_rank([1, 2, 3, 4, 5], [0, 0, 0, 0])


def test_wilcoxon_drops_zero_differences():
    result = wilcoxon_signed_rank([1, 2, 3, 4, 5, 6, 7], [1, 2, 0, 0, 0, 0, 0])
    assert result.dropped == 2
    assert result.n == 5


@pytest.mark.parametrize("seed", range(60))
def test_exact_p_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 13))
    # coarse rounding produces tied ranks
    a = np.round(rng.normal(size=n), 1)
    b = np.round(rng.normal(size=n), 1)
    d = a - b
    if np.count_nonzero(d) < 5:
        pytest.skip("too many zero differences")
    assert wilcoxon_signed_rank(a, b).p_value == pytest.approx(enumerated_p(d[d != 0]), abs=1e-12)


def test_normal_approximation_for_large_n():
    rng = np.random.default_rng(1)
    a = rng.normal(size=40) + 0.8
    b = rng.normal(size=40)
    result = wilcoxon_signed_rank(a, b)
    assert not result.exact
    assert result.p_value < 0.01


def test_friedman_hand_example():
    result = friedman_test(FRIEDMAN_EXAMPLE)
    assert result.statistic == pytest.approx(8.0)
    assert result.df == 2
    assert result.mean_ranks == (1.0, 2.0, 3.0)


def test_friedman_invariant_to_column_order_and_monotone_transform():
    rng = np.random.default_rng(2)
    X = rng.uniform(size=(10, 4))
    base = friedman_test(X).statistic
    assert friedman_test(X[:, [2, 0, 3, 1]]).statistic == pytest.approx(base)
    assert friedman_test(np.exp(3 * X)).statistic == pytest.approx(base)


def test_friedman_constant_matrix_is_degenerate():
    result = friedman_test(np.ones((5, 3)))
    assert result.statistic == 0.0
    assert result.p_value == 1.0
    assert result.degenerate


def test_friedman_input_checks():
    with pytest.raises(ParameterError):
        friedman_test(np.ones((5, 2)))
    with pytest.raises(ParameterError):
        friedman_test(np.ones((1, 3)))


def test_holm_example():
    assert holm_correction([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06])
    assert holm_correction([0.2]) == [0.2]
    assert holm_correction([1.0, 0.01]) == pytest.approx([1.0, 0.02])
    assert holm_correction([]) == []


def test_holm_bounds():
    p = np.random.default_rng(3).uniform(size=8)
    adjusted = holm_correction(p)
    assert all(a >= r for a, r in zip(adjusted, p))
    assert all(a <= 1.0 for a in adjusted)


def test_a12_examples():
    assert vargha_delaney_a12([1, 2, 3], [2, 2, 2]).a12 == pytest.approx(0.5)
    effect = vargha_delaney_a12([5, 6, 7], [1, 2, 3])
    assert effect.a12 == 1.0
    assert effect.magnitude == "large"


def test_a12_symmetry():
    rng = np.random.default_rng(4)
    for _ in range(200):
        x, y = rng.integers(0, 5, 8), rng.integers(0, 5, 11)
        assert vargha_delaney_a12(x, y).a12 + vargha_delaney_a12(y, x).a12 == pytest.approx(1.0)


@pytest.mark.parametrize("a12, magnitude", [
    (0.72, "large"), (0.28, "large"), (0.65, "medium"), (0.57, "small"), (0.5, "negligible"), (0.71, "medium"),
])
def test_effect_magnitude_thresholds(a12, magnitude):
    assert effect_magnitude(a12) == magnitude


def test_median_iqr():
    assert median_iqr([1, 2, 3, 4, 5]) == (3.0, 2.0, 4.0)
    assert median_iqr([7.5]) == (7.5, 7.5, 7.5)
    with pytest.raises(ParameterError):
        median_iqr([])

import logging

import numpy as np
import pytest

from quadscreen.exceptions import ModelError
from quadscreen.models import Alphabet, Dataset, HashAggregate, ScreenConfig
from quadscreen.services.generative_service import sample_dataset
from quadscreen.services.linear_screen_service import correlation_scores
from quadscreen.services.nonlinear_screen_service import (
    make_hash_family, nonlinear_scores, select_weak_support_nl, symbol_statistics,
)
from quadscreen.services.oracle_service import direct_correlation

from .conftest import NONLINEAR_EXAMPLE, TEST_TIMEOUTS
from .helpers.test_helpers import binary_matrix

FOUR = Alphabet(values=(-2.0, -1.0, 1.0, 2.0))


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_symbol_statistics():
    x = np.array([
        [-2, 1],
        [-2, 2],
        [1, 2],
        [2, 2],
    ], dtype=float)
    data = Dataset(x=x, y=np.array([1, 0, 1, 1]))
    counts, label_sums = symbol_statistics(data, FOUR)
    assert counts[:, 0].tolist() == [2, 0, 1, 1]
    assert counts[:, 1].tolist() == [0, 0, 1, 3]
    assert label_sums[:, 0].tolist() == [1, 0, 1, 1]
    assert label_sums[:, 1].tolist() == [0, 0, 1, 2]


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_hash_family_is_seeded_and_bounded():
    family = make_hash_family(FOUR, m=5, U=3, seed=9)
    assert family.tables.shape == (5, 4)
    assert np.abs(family.tables).max() <= 3
    assert np.array_equal(family.tables, make_hash_family(FOUR, m=5, U=3, seed=9).tables)
    with pytest.raises(ModelError):
        make_hash_family(FOUR, m=0)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_binary_alphabet_reduces_to_normalized_linear_test(rng):
    """An affine hash of a +-1 column is a rescaled copy of the column, so each
    hashed score equals the normalized linear score up to sign."""
    data = Dataset(x=binary_matrix(rng, 400, 12, bias=0.35), y=rng.integers(0, 2, 400))
    linear = correlation_scores(data, normalize=True).scores
    # U = 2 makes tied table entries common, exercising the redraw path
    family = make_hash_family(Alphabet.binary(), m=20, U=2, seed=4)
    scores = nonlinear_scores(data, family, HashAggregate.SIGNED)
    assert scores.degenerate == ()
    for ell in range(family.m):
        assert np.allclose(np.abs(scores.per_hash[ell]), np.abs(linear), atol=1e-12)
    absolute = nonlinear_scores(data, family, HashAggregate.ABSOLUTE)
    assert np.allclose(absolute.c, np.abs(linear), atol=1e-12)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_single_symbol_column_is_degenerate(rng):
    x = rng.choice(FOUR.as_array(), size=(300, 3))
    x[:, 1] = 2.0
    data = Dataset(x=x, y=rng.integers(0, 2, 300))
    family = make_hash_family(FOUR, m=4, seed=1)
    scores = nonlinear_scores(data, family)
    assert scores.warning
    assert sorted(scores.degenerate) == [(1, ell) for ell in range(4)]
    assert scores.c[1] == 0.0
    assert np.all(scores.per_hash[:, 1] == 0.0)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_value_outside_alphabet_is_rejected():
    data = Dataset(x=np.array([[1.0, 3.0], [2.0, -1.0]]), y=np.array([0, 1]))
    with pytest.raises(ModelError) as exc:
        nonlinear_scores(data, make_hash_family(FOUR))
    assert exc.value.code == "VALUE_NOT_IN_ALPHABET"
    assert exc.value.detail["column"] == 1


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_needs_two_samples():
    data = Dataset(x=np.array([[1.0, 2.0]]), y=np.array([1]))
    with pytest.raises(ModelError) as exc:
        nonlinear_scores(data, make_hash_family(FOUR))
    assert exc.value.code == "INSUFFICIENT_SAMPLES"


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_selection_on_nonlinear_scores(rng):
    x = rng.choice(FOUR.as_array(), size=(500, 6))
    y = (np.abs(x[:, 4]) == 2).astype(int)
    data = Dataset(x=x, y=y)
    family = make_hash_family(FOUR, m=10, seed=2)
    scores = nonlinear_scores(data, family, HashAggregate.ABSOLUTE)
    logging.info(f"scores {np.round(scores.c, 3)}")
    assert int(np.argmax(scores.c)) == 4
    assert select_weak_support_nl(scores, ScreenConfig.top_k(1)) == (4,)
    assert select_weak_support_nl(scores, ScreenConfig.top_k(6)) == tuple(range(6))
    assert 4 in select_weak_support_nl(scores, ScreenConfig.threshold(0.15))


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_example_defeats_the_linear_test(nonlinear_example):
    """X1 enters f but its linear correlation with the label nearly vanishes;
    X3 stays strongly correlated."""
    x1 = direct_correlation(nonlinear_example, 0)
    x3 = direct_correlation(nonlinear_example, 2)
    logging.info(f"linear correlations: x1 {x1:.5f}, x3 {x3:.5f}")
    assert 0 in nonlinear_example.relevant_variables()
    assert abs(x1) < NONLINEAR_EXAMPLE['x1_linear_max']
    assert abs(x3) > NONLINEAR_EXAMPLE['x3_linear_min']


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_scores_follow_column_permutations(rng):
    x = rng.choice(FOUR.as_array(), size=(400, 12))
    y = (x[:, 3] ** 2 + rng.standard_normal(400) > 2.5).astype(int)
    family = make_hash_family(FOUR, m=6, seed=5)
    base = nonlinear_scores(Dataset(x=x, y=y), family)
    cols = rng.permutation(12)
    moved = nonlinear_scores(Dataset(x=x[:, cols], y=y), family)
    assert np.allclose(moved.c, base.c[cols], atol=1e-12)
    assert np.allclose(moved.per_hash, base.per_hash[:, cols], atol=1e-12)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_averaging_over_hashes_shrinks_the_spread(nonlinear_example):
    """Across hash seeds, the mean of m hashed correlations varies about
    m times less than a single one."""
    data = sample_dataset(nonlinear_example, 5000, seed=4)
    single = [nonlinear_scores(data, make_hash_family(FOUR, m=1, seed=s)).c[2] for s in range(200)]
    ten = [nonlinear_scores(data, make_hash_family(FOUR, m=10, seed=s)).c[2] for s in range(200)]
    ratio = np.var(single) / np.var(ten)
    logging.info(f"variance ratio m=1 / m=10: {ratio:.2f}")
    assert ratio > 4


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_irrelevant_columns_stay_within_noise(rng):
    n = 10000
    x = rng.choice(FOUR.as_array(), size=(n, 200), p=[0.1, 0.2, 0.3, 0.4])
    data = Dataset(x=x, y=rng.integers(0, 2, n))
    family = make_hash_family(FOUR, m=10, seed=6)
    for aggregate in HashAggregate:
        c = nonlinear_scores(data, family, aggregate).c
        inside = float(np.mean(np.abs(c) <= 5 / np.sqrt(n)))
        logging.info(f"{aggregate.value}: {inside:.3f} of irrelevant columns within 5/sqrt(n)")
        assert inside >= 0.99


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_scores_ignore_affine_relabelling_of_the_alphabet(rng):
    """Tables are indexed by alphabet position, so s * x + t (s > 0) hashes
    to the same values and gives the same correlations."""
    x = rng.choice(FOUR.as_array(), size=(500, 8))
    y = (np.abs(x[:, 1]) + x[:, 5] > 1).astype(int)
    shifted = Alphabet(values=tuple(3.0 * v - 5.0 for v in FOUR.values))
    base = nonlinear_scores(Dataset(x=x, y=y), make_hash_family(FOUR, m=8, seed=3))
    moved = nonlinear_scores(Dataset(x=3.0 * x - 5.0, y=y), make_hash_family(shifted, m=8, seed=3))
    assert np.allclose(np.abs(moved.per_hash), np.abs(base.per_hash), atol=1e-10)
    assert np.allclose(moved.c, base.c, atol=1e-10)

import logging

import numpy as np
import pytest
from pydantic import ValidationError

from quadscreen.exceptions import ModelError
from quadscreen.models import Dataset, LinTerm, QuadPoly, QuadTerm, ScreenConfig, ScreenMode
from quadscreen.services.experiment_service import fig1_model
from quadscreen.services.generative_service import binary_model, sample_dataset
from quadscreen.services.linear_screen_service import (
    correlation_scores, min_samples, sample_bound, select_weak_support,
)
from quadscreen.services.oracle_service import population_correlation

from .conftest import SAMPLE_SIZES, TEST_TIMEOUTS


def toy_dataset() -> Dataset:
    x = np.array([
        [1, 1, 1],
        [1, -1, 1],
        [-1, 1, 1],
        [-1, -1, 1],
    ], dtype=float)
    return Dataset(x=x, y=np.array([1, 1, 0, 0]))


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_scores_on_toy_data():
    """Hand-computed scores; the constant column scores 0 and is flagged."""
    scores = correlation_scores(toy_dataset())
    assert scores.scores.tolist() == pytest.approx([0.5, 0.0, 0.0])
    assert scores.mu_hat.tolist() == pytest.approx([0.0, 0.0, 1.0])
    assert scores.degenerate.tolist() == [False, False, True]

    normalized = correlation_scores(toy_dataset(), normalize=True)
    assert normalized.scores[0] == pytest.approx(0.5 / np.sqrt(4 / 3))
    assert normalized.scores[2] == 0.0


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_selection_rules():
    scores = correlation_scores(toy_dataset())
    assert select_weak_support(scores, ScreenConfig.threshold(0.1)) == (0,)
    assert select_weak_support(scores, ScreenConfig.threshold(0.6)) == ()
    # the constant column is never picked, ties go to the lowest index
    assert select_weak_support(scores, ScreenConfig.top_k(2)) == (0, 1)
    assert select_weak_support(scores, ScreenConfig.top_k(3)) == (0, 1)
    with pytest.raises(ModelError):
        select_weak_support(scores, ScreenConfig.top_k(4))


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_screen_config_requires_mode_parameter():
    with pytest.raises(ValidationError):
        ScreenConfig(mode=ScreenMode.THRESHOLD)
    with pytest.raises(ValidationError):
        ScreenConfig(mode=ScreenMode.TOP_K)
    with pytest.raises(ValidationError):
        ScreenConfig.threshold(-0.1)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_normalized_scores_need_two_samples():
    single = Dataset(x=np.array([[1.0, -1.0]]), y=np.array([1]))
    assert correlation_scores(single).scores.tolist() == [0.0, 0.0]
    with pytest.raises(ModelError) as exc:
        correlation_scores(single, normalize=True)
    assert exc.value.code == "INSUFFICIENT_SAMPLES"


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_sample_bound():
    assert min_samples(1000, 0.05, 2) == 44210
    assert sample_bound(1000, 0.025, 2) == pytest.approx(4 * sample_bound(1000, 0.05, 2))
    for bad in [(1, 0.1, 2), (100, 0.0, 2), (100, 0.1, 1.0)]:
        with pytest.raises(ModelError):
            sample_bound(*bad)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_scores_do_not_depend_on_threads(rng):
    x = np.where(rng.random((500, 40)) < 0.3, 1.0, -1.0)
    data = Dataset(x=x, y=rng.integers(0, 2, 500))
    one = correlation_scores(data, normalize=True, threads=1)
    many = correlation_scores(data, normalize=True, threads=4)
    assert np.array_equal(one.scores, many.scores)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_empirical_score_tracks_population_correlation():
    """At biases (1/4, 1/4) the sampled score converges to the exact correlation."""
    model = fig1_model(0.25, 0.25)
    exact = population_correlation(model, 0)
    n = SAMPLE_SIZES['large']
    data = sample_dataset(model, n, seed=3)
    score = correlation_scores(data).scores[0]
    logging.info(f"exact {exact:.6f}, empirical {score:.6f}")
    assert abs(exact) > 1e-3
    assert abs(score - exact) < 5 / np.sqrt(n)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_threshold_recovers_weak_support():
    """f = 2 x7 x19 + 1.5 x33 with biases 0.8 has population correlations near
    0.11 on its support; eps = 0.05 separates them from 47 irrelevant columns."""
    p = 50
    poly = QuadPoly(quad_terms=(QuadTerm(i=7, j=19, beta=2.0),), lin_terms=(LinTerm(j=33, alpha=1.5),))
    biases = [0.8 if v in (7, 19, 33) else 0.3 for v in range(p)]
    model = binary_model(poly, p, biases, gamma=1.0)
    for k in (7, 19, 33):
        assert population_correlation(model, k) > 0.1
    data = sample_dataset(model, 20000, seed=8)
    scores = correlation_scores(data)
    assert select_weak_support(scores, ScreenConfig.threshold(0.05)) == (7, 19, 33)
    assert select_weak_support(scores, ScreenConfig.top_k(3)) == (7, 19, 33)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_scores_follow_column_permutations(rng):
    """Reordering columns reorders the scores; reordering rows changes nothing."""
    x = np.where(rng.random((300, 25)) < 0.6, 1.0, -1.0)
    y = rng.integers(0, 2, 300)
    base = correlation_scores(Dataset(x=x, y=y), normalize=True)
    cols = rng.permutation(25)
    moved = correlation_scores(Dataset(x=x[:, cols], y=y), normalize=True)
    assert np.allclose(moved.scores, base.scores[cols], atol=1e-12)
    assert np.allclose(moved.mu_hat, base.mu_hat[cols], atol=1e-12)
    rows = rng.permutation(300)
    shuffled = correlation_scores(Dataset(x=x[rows], y=y[rows]), normalize=True)
    assert np.allclose(shuffled.scores, base.scores, atol=1e-12)

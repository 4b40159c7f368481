import logging

import numpy as np
import pytest
from pydantic import ValidationError

from quadscreen.exceptions import ModelError
from quadscreen.models import Alphabet, GenerativeModel, LinTerm, Nonlinearity, QuadPoly, QuadTerm
from quadscreen.services.generative_service import (
    apply_sigma, binary_model, eval_poly, eval_poly_batch, finite_model, general_position_poly,
    min_signed_sum, random_quad_poly, random_simplex_pmfs, sample_dataset,
)

from .conftest import SAMPLE_SIZES, TEST_TIMEOUTS
from .helpers.model_helpers import naive_eval


def simple_poly() -> QuadPoly:
    return QuadPoly(
        quad_terms=(QuadTerm(i=0, j=2, beta=1.5),),
        lin_terms=(LinTerm(j=1, alpha=-0.5),),
        constant=0.25,
    )


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_eval_poly_matches_reference(rng):
    """Vectorized and single-row evaluation agree with a term-by-term loop."""
    poly = random_quad_poly(12, 3, 5, 6, (0.1, 1.0), seed=4, signed=True, constant_range=(-1, 1))
    x = rng.choice((-2.0, -1.0, 1.0, 2.0), size=(50, 12))
    batch = eval_poly_batch(poly, x)
    for row in range(x.shape[0]):
        assert eval_poly(poly, x[row]) == pytest.approx(naive_eval(poly, x[row]), abs=1e-12)
        assert batch[row] == pytest.approx(naive_eval(poly, x[row]), abs=1e-12)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_eval_poly_examples():
    poly = simple_poly()
    # 1.5 * 1 * -1 - 0.5 * 1 + 0.25
    assert eval_poly(poly, [1, 1, -1]) == pytest.approx(-1.75)
    assert eval_poly(QuadPoly(), [1, -1]) == 0.0


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_eval_poly_index_out_of_range():
    with pytest.raises(ModelError) as exc:
        eval_poly(simple_poly(), [1.0, -1.0])
    assert exc.value.code == "INDEX_OUT_OF_RANGE"


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_quad_terms_are_canonical_and_unique():
    assert QuadTerm(i=5, j=2, beta=1.0).i == 2
    assert QuadTerm.model_validate([4, 1, 0.5]) == QuadTerm(i=1, j=4, beta=0.5)
    with pytest.raises(ValidationError):
        QuadPoly(quad_terms=(QuadTerm(i=0, j=1, beta=1.0), QuadTerm(i=1, j=0, beta=2.0)))
    with pytest.raises(ValidationError):
        QuadPoly(lin_terms=(LinTerm(j=3, alpha=1.0), LinTerm(j=3, alpha=-1.0)))


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_poly_structure_helpers():
    poly = QuadPoly(
        quad_terms=(QuadTerm(i=0, j=1, beta=1.0), QuadTerm(i=4, j=5, beta=1.0)),
        lin_terms=(LinTerm(j=1, alpha=0.5), LinTerm(j=7, alpha=0.5)),
    )
    assert poly.variables() == (0, 1, 4, 5, 7)
    components = poly.interaction_components()
    assert components[0] == frozenset({0, 1})
    assert components[5] == frozenset({4, 5})
    assert components[7] == frozenset({7})
    restricted = poly.restrict([0, 1, 4, 5, 7])
    assert restricted.variables() == (0, 1, 2, 3, 4)
    assert list(poly.coefficients()) == [1.0, 1.0, 0.5, 0.5]


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_apply_sigma():
    assert apply_sigma(Nonlinearity.SIGMOID, 0.0) == 0.5
    assert apply_sigma(Nonlinearity.PIECEWISE_LINEAR, 2.0) == 1.0
    assert apply_sigma(Nonlinearity.PIECEWISE_LINEAR, -0.4) == pytest.approx(0.3)
    out = apply_sigma(Nonlinearity.SIGMOID, np.array([-50.0, 50.0]))
    assert out[0] < 1e-20 and out[1] == pytest.approx(1.0)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_model_validation():
    poly = simple_poly()
    with pytest.raises(ModelError) as exc:
        binary_model(poly, 3, [0.5, 1.2, 0.3], gamma=1.0)
    assert exc.value.code == "INVALID_MODEL"
    with pytest.raises(ModelError):
        binary_model(poly, 2, [0.5, 0.5], gamma=1.0)
    with pytest.raises(ModelError):
        binary_model(poly, 3, [0.3, 0.3, 0.3], gamma=-1.0)
    # delta forbids biases near 1/2
    with pytest.raises(ModelError):
        binary_model(poly, 3, [0.2, 0.45, 0.8], gamma=1.0, delta=0.1)
    model = binary_model(poly, 3, [0.2, 0.3, 0.8], gamma=1.0, delta=0.1)
    assert model.is_binary
    assert np.allclose(model.means(), [-0.6, -0.4, 0.6])
    with pytest.raises(ValidationError):
        GenerativeModel(p=1, poly=QuadPoly(), gamma=1.0, alphabets=[Alphabet.binary()], marginals=[[0.6, 0.6]])


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_random_quad_poly_counts():
    poly = random_quad_poly(100, 4, 6, 8, (0.1, 1.0), seed=1)
    assert len(poly.lin_terms) == 4 and len(poly.quad_terms) == 6
    assert len(poly.variables()) <= 8
    assert all(0.1 <= abs(a) <= 1.0 for a in poly.coefficients())
    assert random_quad_poly(100, 4, 6, 8, (0.1, 1.0), seed=1) == poly
    squares = random_quad_poly(20, 0, 15, 5, (-1.0, 1.0), seed=2, include_squares=True)
    assert len(squares.quad_terms) == 15
    with pytest.raises(ModelError) as exc:
        random_quad_poly(100, 2, 11, 5, (0.1, 1.0), seed=1)
    assert exc.value.code == "INFEASIBLE_COUNTS"


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_min_signed_sum():
    poly = QuadPoly(quad_terms=(QuadTerm(i=0, j=1, beta=1.0),), lin_terms=(LinTerm(j=0, alpha=0.3),))
    value, signs = min_signed_sum(poly)
    assert value == pytest.approx(0.3)
    assert signs[0] == 0 and abs(signs[1]) == 1

    tied = QuadPoly(
        quad_terms=(QuadTerm(i=0, j=1, beta=1.0),),
        lin_terms=(LinTerm(j=0, alpha=2.0), LinTerm(j=1, alpha=3.0)),
    )
    value, signs = min_signed_sum(tied)
    assert value == 0.0
    assert any(signs)
    assert abs(np.dot(signs, [1.0, 2.0, 3.0])) == 0.0


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_general_position_poly():
    poly = general_position_poly(6, 2, 3, 6, (0.2, 1.0), seed=3, gap=0.01, constant_range=(0.2, 1.0))
    assert min_signed_sum(poly)[0] > 0.01
    assert poly.constant != 0.0


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_sample_dataset_is_deterministic_and_thread_independent():
    model = binary_model(simple_poly(), 3, [0.2, 0.7, 0.9], gamma=2.0)
    first = sample_dataset(model, SAMPLE_SIZES['small'], seed=11, threads=1)
    again = sample_dataset(model, SAMPLE_SIZES['small'], seed=11, threads=3)
    other = sample_dataset(model, SAMPLE_SIZES['small'], seed=12, threads=1)
    assert np.array_equal(first.x, again.x) and np.array_equal(first.y, again.y)
    assert not np.array_equal(first.x, other.x)
    with pytest.raises(ModelError):
        sample_dataset(model, 0, seed=1)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_sample_dataset_marginals_and_labels():
    """Column frequencies follow the biases; labels follow sigma(gamma c) for a constant f."""
    n = SAMPLE_SIZES['large']
    biases = [0.2, 0.7, 0.9]
    model = binary_model(QuadPoly(constant=0.8), 3, biases, gamma=1.5)
    data = sample_dataset(model, n, seed=5)
    freq = (data.x == 1).mean(axis=0)
    logging.info(f"empirical biases {freq}")
    assert np.all(np.abs(freq - biases) < 5 / np.sqrt(n))
    expected = apply_sigma(Nonlinearity.SIGMOID, 1.2)
    assert abs(data.y.mean() - expected) < 5 / np.sqrt(n)


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_labels_are_calibrated_per_assignment():
    """Within each of the 8 assignments the label frequency matches sigma(gamma f(x))."""
    model = binary_model(simple_poly(), 3, [0.2, 0.7, 0.9], gamma=2.0)
    data = sample_dataset(model, 100000, seed=8)
    rows, inverse, counts = np.unique(data.x, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    assert len(rows) == 8
    for q, row in enumerate(rows):
        freq = data.y[inverse == q].mean()
        expected = apply_sigma(Nonlinearity.SIGMOID, model.gamma * eval_poly(model.poly, row))
        assert abs(freq - expected) <= 5 / np.sqrt(counts[q])


@pytest.mark.timeout(TEST_TIMEOUTS['unit'])
def test_finite_model_sampling_stays_in_alphabet():
    alphabet = Alphabet(values=(-2.0, -1.0, 1.0, 2.0))
    pmfs = random_simplex_pmfs(4, alphabet.size, seed=3)
    assert all(abs(sum(pmf) - 1.0) < 1e-12 for pmf in pmfs)
    model = finite_model(simple_poly(), [alphabet] * 3 + [alphabet], pmfs, gamma=1.0)
    data = sample_dataset(model, SAMPLE_SIZES['small'], seed=2)
    assert np.isin(data.x, alphabet.values).all()
    assert data.codes().max() < alphabet.size

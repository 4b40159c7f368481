"""Generative model of sparse quadratic logistic regression: polynomial and
nonlinearity evaluation, random polynomials and synthetic datasets."""
import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy.special import expit

from ..config.settings import ENUMERATION_MAX_ASSIGNMENTS, THREADS
from ..exceptions import EnumerationBudgetError, ModelError
from ..models import Alphabet, Dataset, GenerativeModel, LinTerm, Nonlinearity, QuadPoly, QuadTerm

logger = logging.getLogger(__name__)

# PRNG stream tags; every draw is keyed by (seed, stream, ...)
_COLUMN_STREAM = 0
_LABEL_STREAM = 1
_POLY_STREAM = 2
_COEFF_STREAM = 3
_BIAS_STREAM = 4
_PMF_STREAM = 5

Interval = Tuple[float, float]


def eval_poly(poly: QuadPoly, x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    if poly.max_index >= x.shape[0]:
        raise ModelError(
            "INDEX_OUT_OF_RANGE",
            f"polynomial uses index {poly.max_index} but the assignment has {x.shape[0]} entries",
        )
    total = poly.constant
    for t in poly.quad_terms:
        total += t.beta * x[t.i] * x[t.j]
    for t in poly.lin_terms:
        total += t.alpha * x[t.j]
    return float(total)


def eval_poly_batch(poly: QuadPoly, x: np.ndarray) -> np.ndarray:
    if poly.max_index >= x.shape[1]:
        raise ModelError(
            "INDEX_OUT_OF_RANGE",
            f"polynomial uses index {poly.max_index} but the matrix has {x.shape[1]} columns",
        )
    f = np.full(x.shape[0], poly.constant, dtype=float)
    qi, qj, beta = poly.quad_arrays()
    if beta.size:
        f += (x[:, qi] * x[:, qj]) @ beta
    lj, alpha = poly.lin_arrays()
    if alpha.size:
        f += x[:, lj] @ alpha
    return f


def apply_sigma(sigma: Nonlinearity, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    if sigma is Nonlinearity.SIGMOID:
        out = expit(t)
    else:
        out = 0.5 + 0.5 * np.clip(t, -1.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def sample_dataset(model: GenerativeModel, n: int, seed: int, threads: int = THREADS) -> Dataset:
    """Columns drawn i.i.d. from the marginals, labels Bernoulli(sigma(gamma f))."""
    if n < 1:
        raise ModelError("INVALID_SAMPLE_SIZE", f"n must be >= 1, got {n}")
    x = np.empty((n, model.p), dtype=float)

    def draw_columns(columns: range) -> None:
        for j in columns:
            alphabet = model.alphabets[j]
            rng = np.random.default_rng([seed, _COLUMN_STREAM, j])
            codes = rng.choice(alphabet.size, size=n, p=np.asarray(model.marginals[j]))
            x[:, j] = alphabet.as_array()[codes]

    blocks = _column_blocks(model.p, threads)
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(draw_columns, blocks))
    else:
        for block in blocks:
            draw_columns(block)

    prob = apply_sigma(model.sigma, model.gamma * eval_poly_batch(model.poly, x))
    u = np.random.default_rng([seed, _LABEL_STREAM]).random(n)
    y = (u < prob).astype(np.int8)
    logger.debug(f"sampled n={n} p={model.p} seed={seed}, label mean {y.mean():.4f}")
    return Dataset(x=x, y=y, seed=seed, alphabets=model.alphabets)


def random_quad_poly(
    p: int,
    num_lin: int,
    num_quad: int,
    r: int,
    coeff_range: Interval,
    seed: int,
    signed: bool = False,
    include_squares: bool = False,
    constant_range: Optional[Interval] = None,
) -> QuadPoly:
    """Random polynomial whose weak support lies in a uniformly chosen r-subset
    of [p]; coefficients uniform in ``coeff_range`` (random sign if ``signed``)."""
    if not 1 <= r <= p:
        raise ModelError("INFEASIBLE_COUNTS", f"need 1 <= r <= p, got r={r}, p={p}")
    pairs = list(combinations(range(r), 2))
    if include_squares:
        pairs = sorted(pairs + [(a, a) for a in range(r)])
    if num_lin > r or num_quad > len(pairs) or num_lin < 0 or num_quad < 0:
        raise ModelError(
            "INFEASIBLE_COUNTS",
            f"cannot place {num_lin} linear and {num_quad} quadratic terms on {r} variables",
            max_linear=r,
            max_quadratic=len(pairs),
        )
    rng = np.random.default_rng([seed, _POLY_STREAM])
    support = np.sort(rng.choice(p, size=r, replace=False))
    lin_vars = np.sort(rng.choice(r, size=num_lin, replace=False))
    quad_pick = np.sort(rng.choice(len(pairs), size=num_quad, replace=False))
    coeffs = _draw_coefficients(rng, num_quad + num_lin, coeff_range, signed)
    constant = float(rng.uniform(*constant_range)) if constant_range is not None else 0.0
    return QuadPoly(
        quad_terms=tuple(
            QuadTerm(i=int(support[pairs[q][0]]), j=int(support[pairs[q][1]]), beta=float(b))
            for q, b in zip(quad_pick, coeffs[:num_quad])
        ),
        lin_terms=tuple(
            LinTerm(j=int(support[v]), alpha=float(a)) for v, a in zip(lin_vars, coeffs[num_quad:])
        ),
        constant=constant,
    )


def min_signed_sum(poly: QuadPoly) -> Tuple[float, Tuple[int, ...]]:
    """Smallest |sum_k s_k a_k| over nonzero sign vectors s in {0, +1, -1}^t,
    where a runs over the coefficients (beta, then alpha, then a nonzero
    constant). Returns the minimum and its sign vector."""
    coeffs = list(poly.coefficients())
    if poly.constant != 0.0:
        coeffs.append(poly.constant)
    if not coeffs:
        raise ModelError("EMPTY_POLYNOMIAL", "polynomial has no coefficients")
    if 3 ** len(coeffs) > ENUMERATION_MAX_ASSIGNMENTS:
        raise EnumerationBudgetError(3 ** len(coeffs), ENUMERATION_MAX_ASSIGNMENTS)
    sums = np.zeros(1)
    for a in coeffs:
        sums = np.concatenate([sums, sums + a, sums - a])
    idx = int(np.argmin(np.abs(sums[1:]))) + 1
    signs = []
    for _ in coeffs:
        idx, digit = divmod(idx, 3)
        signs.append((0, 1, -1)[digit])
    return float(np.min(np.abs(sums[1:]))), tuple(signs)


def general_position_poly(
    p: int,
    num_lin: int,
    num_quad: int,
    r: int,
    coeff_range: Interval,
    seed: int,
    gap: float,
    signed: bool = True,
    constant_range: Optional[Interval] = None,
    max_tries: int = 1000,
) -> QuadPoly:
    """Random polynomial whose nonzero signed coefficient combinations all
    exceed ``gap`` in magnitude; structure fixed, coefficients rejection-sampled."""
    structure = random_quad_poly(p, num_lin, num_quad, r, coeff_range, seed, signed, constant_range=constant_range)
    rng = np.random.default_rng([seed, _COEFF_STREAM])
    for attempt in range(max_tries):
        coeffs = _draw_coefficients(rng, structure.num_terms, coeff_range, signed)
        constant = float(rng.uniform(*constant_range)) if constant_range is not None else 0.0
        candidate = _with_coefficients(structure, coeffs, constant)
        if min_signed_sum(candidate)[0] > gap:
            logger.debug(f"general-position polynomial found after {attempt + 1} draws")
            return candidate
    raise ModelError("GENERAL_POSITION", f"no coefficient draw cleared gap {gap} in {max_tries} tries")


def binary_model(
    poly: QuadPoly,
    p: int,
    biases: Sequence[float],
    gamma: float,
    sigma: Nonlinearity = Nonlinearity.SIGMOID,
    delta: Optional[float] = None,
    seed: int = 0,
) -> GenerativeModel:
    return _build_model(p=p, poly=poly, gamma=gamma, sigma=sigma, biases=list(biases), delta=delta, seed=seed)


def finite_model(
    poly: QuadPoly,
    alphabets: Sequence[Alphabet],
    marginals: Sequence[Sequence[float]],
    gamma: float,
    sigma: Nonlinearity = Nonlinearity.SIGMOID,
    seed: int = 0,
) -> GenerativeModel:
    return _build_model(
        p=len(alphabets), poly=poly, gamma=gamma, sigma=sigma,
        alphabets=list(alphabets), marginals=[list(m) for m in marginals], seed=seed,
    )


def random_biases(count: int, ranges: Sequence[Interval], seed: int) -> np.ndarray:
    """Biases uniform on the union of ``ranges`` (intervals weighted by length)."""
    rng = np.random.default_rng([seed, _BIAS_STREAM])
    lengths = np.array([hi - lo for lo, hi in ranges])
    which = rng.choice(len(ranges), size=count, p=lengths / lengths.sum())
    lows = np.array([ranges[w][0] for w in which])
    return lows + rng.random(count) * lengths[which]


def random_simplex_pmfs(count: int, size: int, seed: int) -> List[List[float]]:
    """pmfs uniform on the probability simplex, renormalized to sum to 1."""
    rng = np.random.default_rng([seed, _PMF_STREAM])
    draws = rng.dirichlet(np.ones(size), size=count)
    return [list(row / row.sum()) for row in draws]


def _build_model(**fields) -> GenerativeModel:
    try:
        return GenerativeModel(**fields)
    except ValidationError as exc:
        raise ModelError("INVALID_MODEL", str(exc.errors()[0]["msg"]), loc=list(exc.errors()[0]["loc"])) from exc


def _draw_coefficients(rng: np.random.Generator, count: int, coeff_range: Interval, signed: bool) -> np.ndarray:
    coeffs = rng.uniform(coeff_range[0], coeff_range[1], size=count)
    if signed:
        coeffs *= rng.choice((-1.0, 1.0), size=count)
    return coeffs


def _with_coefficients(structure: QuadPoly, coeffs: np.ndarray, constant: float) -> QuadPoly:
    nq = len(structure.quad_terms)
    return QuadPoly(
        quad_terms=tuple(
            QuadTerm(i=t.i, j=t.j, beta=float(b)) for t, b in zip(structure.quad_terms, coeffs[:nq])
        ),
        lin_terms=tuple(LinTerm(j=t.j, alpha=float(a)) for t, a in zip(structure.lin_terms, coeffs[nq:])),
        constant=constant,
    )


def _column_blocks(p: int, threads: int) -> List[range]:
    size = max(1, -(-p // max(threads, 1)))
    return [range(start, min(start + size, p)) for start in range(0, p, size)]

"""Hash-based nonlinear correlation test for finite, non-binary alphabets.

Every statistic the test needs is a function of per-column symbol counts and
per-symbol label sums, so the data is scanned once and each hash then costs
O(p * |alphabet|)."""
import logging
from typing import Tuple

import numpy as np

from ..config.settings import HASH_COUNT, HASH_RANGE, HASH_REDRAWS
from ..exceptions import ModelError
from ..models import (
    Alphabet, Dataset, HashAggregate, HashFamily, NonlinearScores, ScreenConfig, ScreenMode,
)
from .linear_screen_service import column_blocks, top_k_indices

logger = logging.getLogger(__name__)


def make_hash_family(alphabet: Alphabet, m: int = HASH_COUNT, U: int = HASH_RANGE, seed: int = 0) -> HashFamily:
    """m tables of uniform integers in [-U, U], indexed by alphabet position."""
    if m < 1 or U < 1:
        raise ModelError("INVALID_HASH_FAMILY", f"need m >= 1 and U >= 1, got m={m}, U={U}")
    tables = np.stack(
        [np.random.default_rng([seed, ell]).integers(-U, U + 1, size=alphabet.size) for ell in range(m)]
    )
    return HashFamily(alphabet=alphabet, m=m, U=U, seed=seed, tables=tables)


def symbol_statistics(data: Dataset, alphabet: Alphabet) -> Tuple[np.ndarray, np.ndarray]:
    """(counts, label_sums), each |alphabet| x p: how often each symbol occurs
    in each column and the sum of labels over those rows."""
    codes = _codes_for(data, alphabet)
    y = data.y.astype(float)
    counts = np.zeros((alphabet.size, data.p))
    label_sums = np.zeros((alphabet.size, data.p))
    for block in column_blocks(data.p):
        cols = slice(block.start, block.stop)
        codes_b = codes[:, cols]
        for a in range(alphabet.size):
            hit = codes_b == a
            counts[a, cols] = hit.sum(axis=0)
            label_sums[a, cols] = y @ hit
    return counts, label_sums


def nonlinear_scores(
    data: Dataset,
    family: HashFamily,
    aggregate: HashAggregate = HashAggregate.SIGNED,
    redraws: int = HASH_REDRAWS,
) -> NonlinearScores:
    """C_i = mean over hashes of sum_k y_k (g(x_ki) - mu) / (n * sd), with sd the
    sample standard deviation (n - 1 denominator) of the hashed column."""
    n, p = data.n, data.p
    if n < 2:
        raise ModelError("INSUFFICIENT_SAMPLES", f"the nonlinear test needs n >= 2, got n={n}")
    counts, label_sums = symbol_statistics(data, family.alphabet)
    observed = (counts > 0).sum(axis=0)
    per_hash = np.zeros((family.m, p))
    degenerate = []

    for ell in range(family.m):
        num, sd = _hashed_moments(family.tables[ell][:, None], counts, label_sums, n)
        bad = np.flatnonzero(sd == 0)
        for i in bad:
            col_num, col_sd = _redraw_column(family, ell, int(i), counts, label_sums, n, redraws, observed[i])
            num[i], sd[i] = col_num, col_sd
            if col_sd == 0:
                degenerate.append((int(i), ell))
        per_hash[ell] = np.divide(num, n * sd, out=np.zeros(p), where=sd > 0)

    if aggregate is HashAggregate.SIGNED:
        c = per_hash.mean(axis=0)
    else:
        c = np.abs(per_hash).mean(axis=0)
    if degenerate:
        logger.warning(f"{len(degenerate)} (column, hash) pairs had zero hashed variance and score 0")
    logger.info(f"nonlinear scores: n={n} p={p} m={family.m} U={family.U} aggregate={aggregate.value}")
    return NonlinearScores(c=c, per_hash=per_hash, degenerate=tuple(degenerate), aggregate=aggregate)


def select_weak_support_nl(scores: NonlinearScores, cfg: ScreenConfig) -> Tuple[int, ...]:
    """Threshold mode keeps C_i > theta on the signed score; top-k ranks by |C_i|."""
    if cfg.mode is ScreenMode.THRESHOLD:
        return tuple(int(i) for i in np.flatnonzero(scores.c > cfg.eps))
    return top_k_indices(np.abs(scores.c), np.ones(scores.p, dtype=bool), cfg.k)


def _hashed_moments(
    table: np.ndarray, counts: np.ndarray, label_sums: np.ndarray, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Numerator sum_k y_k (g - mu) and sample stddev of g(x) for every column
    covered by ``counts``; ``table`` broadcasts against the symbol axis."""
    mean = (table * counts).sum(axis=0) / n
    centered = table - mean
    num = (label_sums * centered).sum(axis=0)
    sd = np.sqrt((counts * centered ** 2).sum(axis=0) / (n - 1))
    return num, sd


def _redraw_column(
    family: HashFamily,
    ell: int,
    i: int,
    counts: np.ndarray,
    label_sums: np.ndarray,
    n: int,
    redraws: int,
    observed: int,
) -> Tuple[float, float]:
    if observed < 2:
        # no table separates a single observed symbol
        return 0.0, 0.0
    for attempt in range(redraws):
        table = family.redraw(ell, i, attempt)[:, None]
        num, sd = _hashed_moments(table, counts[:, i : i + 1], label_sums[:, i : i + 1], n)
        if sd[0] > 0:
            return float(num[0]), float(sd[0])
    return 0.0, 0.0


def _codes_for(data: Dataset, alphabet: Alphabet) -> np.ndarray:
    if data.alphabets is not None and all(a == alphabet for a in data.alphabets):
        return data.codes()
    codes = np.empty(data.x.shape, dtype=np.int8)
    for i in range(data.p):
        try:
            codes[:, i] = alphabet.positions(np.asarray(data.x[:, i], dtype=float))
        except ValueError as exc:
            raise ModelError("VALUE_NOT_IN_ALPHABET", f"column {i}: {exc}", column=i) from exc
    return codes

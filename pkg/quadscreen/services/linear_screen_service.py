"""Linear correlation test for weak-support recovery (one pass over the data)."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Tuple

import numpy as np

from ..config.settings import COLUMN_BLOCK, THREADS
from ..exceptions import ModelError
from ..models import Dataset, ScoreVector, ScreenConfig, ScreenMode

logger = logging.getLogger(__name__)


def correlation_scores(data: Dataset, normalize: bool = False, threads: int = THREADS) -> ScoreVector:
    """rho_i = (1/n) sum_k y_k (x_ki - mu_i), optionally divided by the column's
    sample standard deviation (n - 1 denominator)."""
    n, p = data.n, data.p
    if normalize and n < 2:
        raise ModelError("INSUFFICIENT_SAMPLES", f"normalized scores need n >= 2, got n={n}")
    y = data.y.astype(float)
    rho = np.zeros(p)
    mu = np.zeros(p)
    sd = np.zeros(p)
    degenerate = np.zeros(p, dtype=bool)

    def score_block(block: range) -> None:
        cols = slice(block.start, block.stop)
        xb = np.asarray(data.x[:, cols], dtype=float)
        mu_b = xb.mean(axis=0)
        centered = xb - mu_b
        mu[cols] = mu_b
        rho[cols] = (y @ centered) / n
        if n > 1:
            sd[cols] = np.sqrt(np.einsum("ij,ij->j", centered, centered) / (n - 1))
        degenerate[cols] = np.ptp(xb, axis=0) == 0

    blocks = column_blocks(p)
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(score_block, blocks))
    else:
        for block in blocks:
            score_block(block)

    rho[degenerate] = 0.0
    scores = rho
    if normalize:
        scores = np.divide(rho, sd, out=np.zeros(p), where=~degenerate & (sd > 0))
    logger.info(f"linear scores: n={n} p={p} normalize={normalize}, {int(degenerate.sum())} constant columns")
    return ScoreVector(scores=scores, mu_hat=mu, stddev=sd, degenerate=degenerate, normalized=normalize)


def select_weak_support(scores: ScoreVector, cfg: ScreenConfig) -> Tuple[int, ...]:
    """Threshold on |score| > eps, or the k largest |score| (ties to the lowest
    index). Constant columns are never selected."""
    magnitude = np.abs(scores.scores)
    live = ~scores.degenerate
    if cfg.mode is ScreenMode.THRESHOLD:
        return tuple(int(i) for i in np.flatnonzero((magnitude > cfg.eps) & live))
    return top_k_indices(magnitude, live, cfg.k)


def sample_bound(p: int, eps: float, c: float) -> float:
    """8 c ln(p) / eps^2, the Hoeffding sample bound for range-4 summands."""
    if p < 2 or eps <= 0 or c <= 1:
        raise ModelError("INVALID_PARAMETERS", f"need p >= 2, eps > 0, c > 1; got p={p}, eps={eps}, c={c}")
    return 8.0 * c * math.log(p) / eps ** 2


def min_samples(p: int, eps: float, c: float) -> int:
    return math.ceil(sample_bound(p, eps, c))


def top_k_indices(magnitude: np.ndarray, live: np.ndarray, k: int) -> Tuple[int, ...]:
    if not 1 <= k <= magnitude.shape[0]:
        raise ModelError("INVALID_TOP_K", f"k must be in [1, {magnitude.shape[0]}], got {k}")
    candidates = np.flatnonzero(live)
    order = candidates[np.argsort(-magnitude[candidates], kind="stable")]
    return tuple(sorted(int(i) for i in order[:k]))


def column_blocks(p: int) -> List[range]:
    return [range(s, min(s + COLUMN_BLOCK, p)) for s in range(0, p, COLUMN_BLOCK)]

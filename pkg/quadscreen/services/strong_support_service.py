"""Pairwise conditional-expectation test separating quadratic pairs from
linear terms inside a recovered weak support (binary variables)."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ..config.settings import THREADS
from ..exceptions import ModelError
from ..models import Dataset, PairCheck, StrongSupport, SupportReport
from .linear_screen_service import correlation_scores

logger = logging.getLogger(__name__)

# cell code (1 - [x_i > 0]) * 2 + (1 - [x_j > 0]) -> position in (pp, mm, pm, mp)
_CELL_ORDER = (0, 3, 1, 2)


def pair_check(data: Dataset, i: int, j: int) -> PairCheck:
    """Empirical U_ab(i, j) on the four sign cells; empty cells leave the mean unset."""
    xi, xj = data.x[:, i], data.x[:, j]
    cell = (xi < 0).astype(np.intp) * 2 + (xj < 0).astype(np.intp)
    counts = np.bincount(cell, minlength=4)[list(_CELL_ORDER)]
    sums = np.bincount(cell, weights=data.y.astype(float), minlength=4)[list(_CELL_ORDER)]
    means = [float(s / c) if c else None for s, c in zip(sums, counts)]
    return PairCheck(
        i=i, j=j,
        u_pp=means[0], u_mm=means[1], u_pm=means[2], u_mp=means[3],
        counts=tuple(int(c) for c in counts),
    )


def pair_checks(data: Dataset, weak: Iterable[int], threads: int = THREADS) -> List[PairCheck]:
    weak = sorted(set(weak))
    if len(weak) < 2:
        raise ModelError("WEAK_SUPPORT_TOO_SMALL", f"need at least two weak-support variables, got {weak}")
    if max(weak) >= data.p:
        raise ModelError("INDEX_OUT_OF_RANGE", f"weak-support index {max(weak)} out of range for p={data.p}")
    if not np.isin(data.x[:, weak], (-1, 1)).all():
        raise ModelError("NON_BINARY", "strong-support checks need +-1 features on the weak support")
    pairs = list(combinations(weak, 2))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            checks = list(pool.map(lambda ij: pair_check(data, *ij), pairs))
    else:
        checks = [pair_check(data, i, j) for i, j in pairs]
    undecidable = sum(c.undecidable for c in checks)
    if undecidable:
        logger.warning(f"{undecidable} of {len(checks)} pairs have an empty conditioning cell")
    logger.info(f"pair checks: {len(checks)} pairs over |weak|={len(weak)}, n={data.n}")
    return checks


def default_theta(checks: Sequence[PairCheck], weak_size: int) -> float:
    """4 * sqrt(ln(8 w^2) / (2 t_min)), t_min the smallest cell count."""
    counts = [min(c.counts) for c in checks if c.counts is not None and not c.undecidable]
    if not counts:
        raise ModelError("NO_CELL_COUNTS", "default theta needs empirical checks with non-empty cells")
    return 4.0 * math.sqrt(math.log(8.0 * weak_size ** 2) / (2.0 * min(counts)))


def classify_strong(checks: Sequence[PairCheck], theta: float, weak: Iterable[int]) -> StrongSupport:
    """A pair is quadratic iff |U_pp - U_mm| < theta and |U_pm - U_mp| < theta;
    weak-support variables in no accepted pair are linear."""
    if theta <= 0:
        raise ModelError("INVALID_THETA", f"theta must be positive, got {theta}")
    accepted, undecidable = [], []
    for check in checks:
        pair = (min(check.i, check.j), max(check.i, check.j))
        if check.undecidable:
            undecidable.append(pair)
            continue
        gap_diag, gap_anti = check.gaps
        if gap_diag < theta and gap_anti < theta:
            accepted.append(pair)
    in_pairs = [v for pair in accepted for v in pair]
    heuristic = len(in_pairs) != len(set(in_pairs))
    if heuristic:
        logger.warning("accepted pairs share variables; classification is heuristic")
    return StrongSupport(
        quad_pairs=tuple(sorted(accepted)),
        linear_vars=tuple(sorted(set(weak) - set(in_pairs))),
        undecidable=tuple(sorted(undecidable)),
        theta=theta,
        heuristic=heuristic,
    )


def support_report(
    data: Dataset, weak: Iterable[int], theta: Optional[float] = None, threads: int = THREADS
) -> SupportReport:
    """Linear scores of every column next to the strong support of ``weak``;
    theta defaults to :func:`default_theta`."""
    weak = sorted(set(weak))
    checks = pair_checks(data, weak, threads=threads)
    if theta is None:
        theta = default_theta(checks, len(weak))
    scores = correlation_scores(data, threads=threads)
    return SupportReport(
        scores=scores.scores.tolist(),
        weak_support=tuple(weak),
        strong_support=classify_strong(checks, theta, weak),
        pair_checks=tuple(checks),
    )

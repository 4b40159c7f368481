"""L1-regularized logistic regression on the quadratic expansion of a weak
support, solved by proximal gradient with backtracking, plus AUC / log-loss."""
import logging
from itertools import combinations_with_replacement
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, log_expit
from scipy.stats import rankdata

from ..config.settings import CV_FOLDS, CV_LAMBDAS, SOLVER_MAX_ITER, SOLVER_TOL
from ..exceptions import ModelError
from ..models import CVResult, Dataset, ExpandedDesign, FitResult, Term

logger = logging.getLogger(__name__)

_STEP_GROWTH = 1.5
_MIN_STEP = 1e-20


def expand_features(data: Dataset, weak: Iterable[int]) -> ExpandedDesign:
    """All linear terms of the weak support (ascending), then every Quad(i, j),
    i <= j, in lexicographic order. Squares of +-1 or 0/1 columns duplicate the
    intercept or the linear term and are dropped."""
    base = tuple(sorted(set(int(v) for v in weak)))
    if base and not 0 <= base[0] <= base[-1] < data.p:
        raise ModelError("INDEX_OUT_OF_RANGE", f"weak support {base} out of range for p={data.p}")
    redundant_square = {v for v in base if _is_two_level(data.x[:, v])}
    columns = [Term(kind="linear", i=v) for v in base]
    columns += [
        Term(kind="quad", i=i, j=j)
        for i, j in combinations_with_replacement(base, 2)
        if not (i == j and i in redundant_square)
    ]
    return ExpandedDesign(base_vars=base, columns=tuple(columns), matrix=design_matrix(data, columns))


def design_matrix(data: Dataset, terms: Sequence[Term]) -> np.ndarray:
    matrix = np.empty((data.n, len(terms)), dtype=float)
    for c, term in enumerate(terms):
        if max(term.i, term.j if term.j is not None else 0) >= data.p:
            raise ModelError("INDEX_OUT_OF_RANGE", f"term {term.name} out of range for p={data.p}")
        column = np.asarray(data.x[:, term.i], dtype=float)
        matrix[:, c] = column if term.kind == "linear" else column * data.x[:, term.j]
    return matrix


def logistic_loss(
    matrix: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float
) -> Tuple[float, np.ndarray, float]:
    """(1/n) sum log(1 + exp(-y~ z)) with y~ = 2y - 1, and its gradient in
    (weights, intercept)."""
    z = matrix @ weights + intercept
    signed = 2.0 * y - 1.0
    loss = -float(np.mean(log_expit(signed * z)))
    residual = expit(z) - y
    return loss, matrix.T @ residual / y.shape[0], float(residual.mean())


def lambda_max(design: ExpandedDesign, y: np.ndarray) -> float:
    y = _labels(y, design.n)
    if design.matrix.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(design.matrix.T @ (y.mean() - y))) / design.n)


def fit_logistic(
    design: ExpandedDesign,
    y: np.ndarray,
    lam: float,
    tol: float = SOLVER_TOL,
    max_iter: int = SOLVER_MAX_ITER,
    warm_start: Optional[Tuple[np.ndarray, float]] = None,
) -> FitResult:
    """Minimize logistic loss + lam * ||w||_1 (intercept unpenalized).

    Every accepted step must not increase the penalized objective; the run is
    converged when the subgradient-optimality residual drops to ``tol``.
    """
    if lam < 0:
        raise ModelError("INVALID_LAMBDA", f"lambda must be >= 0, got {lam}")
    x = np.asarray(design.matrix, dtype=float)
    y = _labels(y, design.n)
    if not np.isfinite(x).all():
        raise ModelError("NON_FINITE", "design matrix contains non-finite values")
    y_bar = float(y.mean())
    # one-class labels have no finite MLE, so they are an error, not a flagged FitResult
    if y_bar in (0.0, 1.0):
        raise ModelError("SINGLE_CLASS", "labels contain a single class; the intercept diverges")

    if warm_start is not None:
        w, b = np.array(warm_start[0], dtype=float), float(warm_start[1])
    else:
        w, b = np.zeros(x.shape[1]), float(np.log(y_bar / (1.0 - y_bar)))
    # 1/L for the logistic loss, L = ||[X 1]||_2^2 / (4n)
    augmented = np.hstack([x, np.ones((design.n, 1))])
    step = 4.0 * design.n / max(np.linalg.norm(augmented, 2) ** 2, 1e-12)

    loss, grad_w, grad_b = logistic_loss(x, y, w, b)
    objective = loss + lam * np.abs(w).sum()
    path = [objective]
    residual = _optimality_residual(w, grad_w, grad_b, lam)
    iterations = 0
    while residual > tol and iterations < max_iter:
        step *= _STEP_GROWTH
        while True:
            w_new = _soft_threshold(w - step * grad_w, step * lam)
            b_new = b - step * grad_b
            loss_new, grad_w_new, grad_b_new = logistic_loss(x, y, w_new, b_new)
            delta_w, delta_b = w_new - w, b_new - b
            model_bound = loss + grad_w @ delta_w + grad_b * delta_b + (delta_w @ delta_w + delta_b ** 2) / (2 * step)
            objective_new = loss_new + lam * np.abs(w_new).sum()
            if loss_new <= model_bound and objective_new <= objective:
                break
            step *= 0.5
            if step < _MIN_STEP:
                break
        if step < _MIN_STEP:
            logger.warning("line search stalled; returning the last accepted iterate")
            break
        w, b, loss, grad_w, grad_b, objective = w_new, b_new, loss_new, grad_w_new, grad_b_new, objective_new
        iterations += 1
        path.append(objective)
        residual = _optimality_residual(w, grad_w, grad_b, lam)
        logger.debug("iteration %d objective %.12g residual %.3g", iterations, objective, residual)

    converged = residual <= tol
    if not converged:
        logger.warning(f"solver stopped after {iterations} iterations, residual {residual:.3g} > tol {tol:g}")
    logger.info(f"fit: {x.shape[1]} columns, lambda={lam:g}, {iterations} iterations, nll={loss:.6g}")
    return FitResult(
        terms=design.columns, weights=w, intercept=b, lam=lam, iterations=iterations,
        final_nll=max(loss, 0.0), objective=objective, converged=converged, residual=residual,
        objective_path=tuple(path),
    )


def predict_proba(fit: FitResult, design: ExpandedDesign) -> np.ndarray:
    if design.matrix.shape[1] != fit.weights.shape[0]:
        raise ModelError(
            "DESIGN_MISMATCH",
            f"design has {design.matrix.shape[1]} columns, fit has {fit.weights.shape[0]} weights",
        )
    return expit(design.matrix @ fit.weights + fit.intercept)


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ModelError("SINGLE_CLASS", "AUC needs at least one positive and one negative label")
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def log_loss(probs: np.ndarray, labels: np.ndarray, clip: float = 1e-15) -> float:
    probs = np.clip(np.asarray(probs, dtype=float), clip, 1.0 - clip)
    labels = np.asarray(labels, dtype=float)
    return float(-np.mean(labels * np.log(probs) + (1.0 - labels) * np.log1p(-probs)))


def cross_validate(
    design: ExpandedDesign,
    y: np.ndarray,
    lambdas: Sequence[float] = CV_LAMBDAS,
    folds: int = CV_FOLDS,
    seed: int = 0,
    tol: float = SOLVER_TOL,
    max_iter: int = SOLVER_MAX_ITER,
) -> CVResult:
    """k-fold held-out AUC for every lambda; the best mean AUC wins, ties going
    to the larger lambda. Each fold walks the path from large to small lambda
    with warm starts."""
    y = _labels(y, design.n)
    if folds < 2 or folds > design.n:
        raise ModelError("INVALID_FOLDS", f"need 2 <= folds <= n, got folds={folds}, n={design.n}")
    order = np.random.default_rng([seed, folds]).permutation(design.n)
    lambdas = tuple(float(v) for v in lambdas)
    descending = sorted(range(len(lambdas)), key=lambda q: -lambdas[q])
    scores = np.full((folds, len(lambdas)), np.nan)

    for fold, held in enumerate(np.array_split(order, folds)):
        train = np.setdiff1d(order, held)
        if len(set(y[held])) < 2 or len(set(y[train])) < 2:
            logger.warning(f"fold {fold} has a single class; skipped")
            continue
        train_design = _rows(design, train)
        test_design = _rows(design, held)
        warm = None
        for q in descending:
            fit = fit_logistic(train_design, y[train], lambdas[q], tol=tol, max_iter=max_iter, warm_start=warm)
            warm = (fit.weights, fit.intercept)
            scores[fold, q] = auc(predict_proba(fit, test_design), y[held])

    usable = ~np.isnan(scores).any(axis=1)
    if not usable.any():
        raise ModelError("SINGLE_CLASS", "every cross-validation fold has a single class")
    mean_auc = scores[usable].mean(axis=0)
    best = max(range(len(lambdas)), key=lambda q: (mean_auc[q], lambdas[q]))
    logger.info(f"cross-validation: best lambda {lambdas[best]:g} with mean AUC {mean_auc[best]:.4f}")
    return CVResult(
        lambdas=lambdas, mean_auc=tuple(float(a) for a in mean_auc),
        best_lambda=lambdas[best], folds=int(usable.sum()),
    )


def _rows(design: ExpandedDesign, rows: np.ndarray) -> ExpandedDesign:
    return ExpandedDesign(base_vars=design.base_vars, columns=design.columns, matrix=design.matrix[rows])


def _labels(y: np.ndarray, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ModelError("LABEL_SHAPE", f"expected {n} labels, got shape {y.shape}")
    if n < 1:
        raise ModelError("INSUFFICIENT_SAMPLES", "need at least one sample")
    return y


def _is_two_level(column: np.ndarray) -> bool:
    return bool(np.isin(column, (-1, 1)).all() or np.isin(column, (0, 1)).all())


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _optimality_residual(w: np.ndarray, grad_w: np.ndarray, grad_b: float, lam: float) -> float:
    """Distance of zero from the subdifferential of the penalized objective."""
    per_weight = np.where(w != 0, np.abs(grad_w + lam * np.sign(w)), np.maximum(np.abs(grad_w) - lam, 0.0))
    return float(max(abs(grad_b), per_weight.max(initial=0.0)))

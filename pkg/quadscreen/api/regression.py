import argparse
import logging
from typing import List

from ..config.settings import CV_FOLDS, SOLVER_MAX_ITER, SOLVER_TOL
from ..models import ExpandedDesign
from ..services.data_io_service import read_fit_json, write_fit_json
from ..services.regression_service import (
    auc, cross_validate, design_matrix, expand_features, fit_logistic, log_loss, predict_proba,
)
from .routing import CommandRouter, argument, emit_json, index_list, load_dataset, require_one

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command("fit", help="L1 logistic regression on the quadratic expansion of a weak support")
@argument("--input", required=True)
@argument("--weak", type=index_list, required=True, help="comma-separated weak-support indices")
@argument("--lambda", dest="lam", type=float, help="L1 strength")
@argument("--cv", action="store_true", help="pick lambda by cross-validated AUC")
@argument("--folds", type=int, default=CV_FOLDS)
@argument("--tol", type=float, default=SOLVER_TOL)
@argument("--max-iter", type=int, default=SOLVER_MAX_ITER)
@argument("--out", required=True, help="fit JSON")
def fit(args: argparse.Namespace) -> List[str]:
    mode = require_one(args, ["lam", "cv"])
    data = load_dataset(args)
    design = expand_features(data, args.weak)
    lam = args.lam
    if mode == "cv":
        lam = cross_validate(
            design, data.y, folds=args.folds, seed=args.seed or 0, tol=args.tol, max_iter=args.max_iter
        ).best_lambda
    result = fit_logistic(design, data.y, lam, tol=args.tol, max_iter=args.max_iter)
    write_fit_json(result, args.out)
    return [] if result.converged else [f"solver did not converge (residual {result.residual:.3g})"]


@router.command("eval", help="AUC and log-loss of a saved fit on test data")
@argument("--fit", dest="fit_path", required=True, help="fit JSON")
@argument("--test", required=True, help="test dataset")
@argument("--out", help="metrics JSON (stdout when omitted)")
def evaluate(args: argparse.Namespace) -> List[str]:
    result = read_fit_json(args.fit_path)
    data = load_dataset(args, args.test)
    design = ExpandedDesign(
        base_vars=tuple(sorted({t.i for t in result.terms} | {t.j for t in result.terms if t.j is not None})),
        columns=result.terms,
        matrix=design_matrix(data, result.terms),
    )
    probs = predict_proba(result, design)
    metrics = {"n": data.n, "auc": auc(probs, data.y), "log_loss": log_loss(probs, data.y)}
    logger.info(f"eval on {args.test}: AUC {metrics['auc']:.4f}, log-loss {metrics['log_loss']:.4f}")
    emit_json(metrics, args.out)
    return []

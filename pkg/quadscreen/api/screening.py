import argparse
from typing import List

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..config.settings import HASH_COUNT, HASH_RANGE
from ..exceptions import DataFormatError, UsageError
from ..models import Alphabet, Dataset, HashAggregate, ScreenConfig
from ..services.data_io_service import read_model_json
from ..services.linear_screen_service import correlation_scores, select_weak_support
from ..services.nonlinear_screen_service import make_hash_family, nonlinear_scores, select_weak_support_nl
from ..services.strong_support_service import support_report
from .routing import CommandRouter, argument, emit_json, emit_table, index_list, load_dataset, require_one

router = CommandRouter()


def _screen_config(args: argparse.Namespace, threshold_flag: str, normalize: bool = False) -> ScreenConfig:
    mode = require_one(args, [threshold_flag, "top_k"])
    try:
        if mode == "top_k":
            return ScreenConfig.top_k(args.top_k, normalize=normalize)
        return ScreenConfig.threshold(getattr(args, threshold_flag), normalize=normalize)
    except ValidationError as exc:
        flag = "--" + mode.replace("_", "-")
        raise UsageError("BAD_ARGUMENT", f"{flag}: {exc.errors()[0]['msg']}") from exc


@router.command("screen", help="linear correlation test (binary features)")
@argument("--input", required=True)
@argument("--eps", type=float, help="keep |score| > eps")
@argument("--top-k", type=int, help="keep the k largest |score|")
@argument("--normalize", action="store_true", help="divide by the column standard deviation")
@argument("--out", help="scores CSV (stdout when omitted)")
def screen(args: argparse.Namespace) -> List[str]:
    data = load_dataset(args)
    cfg = _screen_config(args, "eps", args.normalize)
    scores = correlation_scores(data, cfg.normalize, threads=args.threads)
    selected = set(select_weak_support(scores, cfg))
    emit_table(
        pd.DataFrame({
            "index": np.arange(data.p),
            "mu_hat": scores.mu_hat,
            "score": scores.scores,
            "selected": [int(i in selected) for i in range(data.p)],
        }),
        args.out,
    )
    return []


@router.command("screen-nl", help="hashed nonlinear correlation test (finite alphabets)")
@argument("--input", required=True)
@argument("--model", help="model JSON whose alphabet the hashes cover (default: values seen in the data)")
@argument("--hashes", type=int, default=HASH_COUNT)
@argument("--range", dest="hash_range", type=int, default=HASH_RANGE)
@argument("--theta", type=float, help="keep C_i > theta")
@argument("--top-k", type=int, help="keep the k largest |C_i|")
@argument("--aggregate", choices=[a.value for a in HashAggregate], default=HashAggregate.SIGNED.value)
@argument("--out", help="scores CSV (stdout when omitted)")
def screen_nl(args: argparse.Namespace) -> List[str]:
    cfg = _screen_config(args, "theta")
    if args.model:
        model = read_model_json(args.model)
        raw = load_dataset(args)
        try:
            data = Dataset(x=raw.x, y=raw.y, seed=raw.seed, alphabets=model.alphabets)
        except ValidationError as exc:
            raise DataFormatError(exc.errors()[0]["msg"], path=args.input, code="ALPHABET_MISMATCH") from exc
        alphabet = model.alphabets[0]
    else:
        data = load_dataset(args)
        try:
            alphabet = Alphabet(values=tuple(float(v) for v in np.unique(data.x)))
        except ValidationError as exc:
            # the hash tables cover one alphabet shared by every column
            raise DataFormatError(exc.errors()[0]["msg"], path=args.input, code="BAD_ALPHABET") from exc
    family = make_hash_family(alphabet, args.hashes, args.hash_range, seed=args.seed or 0)
    scores = nonlinear_scores(data, family, HashAggregate(args.aggregate))
    selected = set(select_weak_support_nl(scores, cfg))
    emit_table(
        pd.DataFrame({
            "index": np.arange(data.p),
            "score": scores.c,
            "selected": [int(i in selected) for i in range(data.p)],
        }),
        args.out,
    )
    return [f"{len(scores.degenerate)} degenerate (column, hash) pairs"] if scores.warning else []


@router.command("strong", help="split a weak support into quadratic pairs and linear terms")
@argument("--input", required=True)
@argument("--weak", type=index_list, required=True, help="comma-separated weak-support indices")
@argument("--theta", type=float, help="acceptance threshold (default from the smallest cell count)")
@argument("--out", help="strong-support JSON (stdout when omitted)")
def strong(args: argparse.Namespace) -> List[str]:
    report = support_report(load_dataset(args), args.weak, args.theta, threads=args.threads)
    emit_json(report.model_dump(mode="json"), args.out)
    result = report.strong_support
    warnings = []
    if result.undecidable:
        warnings.append(f"{len(result.undecidable)} undecidable pairs")
    if result.heuristic:
        warnings.append("accepted pairs share variables")
    return warnings

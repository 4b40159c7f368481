import argparse
import json
import logging
import sys
from typing import List, Optional

from .api import data, experiments, oracle, regression, screening
from .api.routing import include_router
from .config.settings import LOG_LEVEL, THREADS
from .exceptions import EXIT_OK, NumericWarning, QuadScreenError
from .models import SparseEncoding

logger = logging.getLogger(__name__)

ROUTERS = (data.router, screening.router, regression.router, oracle.router, experiments.router)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadscreen", description="Weak- and strong-support recovery for sparse quadratic logistic models."
    )
    parser.add_argument("--seed", type=int, help="master seed (default: the model's or config's seed, else 0)")
    parser.add_argument("--threads", type=int, default=THREADS)
    parser.add_argument("--format", choices=["csv", "sparse"], default="csv", help="dataset format")
    parser.add_argument("--p", type=int, help="feature count for the sparse format")
    parser.add_argument(
        "--encoding", choices=[e.value for e in SparseEncoding], default=SparseEncoding.PLUS_MINUS_ONE.value,
        help="value of absent features in the sparse format",
    )
    parser.add_argument("--labels", help="label file for the sparse format (default <features>.labels)")
    parser.add_argument("--strict", action="store_true", help="exit 4 on numeric warnings")
    parser.add_argument("--log-level", default=LOG_LEVEL)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for router in ROUTERS:
        include_router(subparsers, router)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s - %(levelname)s - %(message)s",
        datefmt="%H:%M:%S",
    )
    try:
        warnings = args.handler(args)
        if warnings and args.strict:
            raise NumericWarning("NUMERIC_WARNING", "; ".join(warnings), command=args.command)
    except QuadScreenError as exc:
        logger.error(str(exc))
        sys.stderr.write(json.dumps(exc.detail, default=str) + "\n")
        return exc.exit_code
    for warning in warnings:
        logger.warning(f"{args.command}: {warning}")
    return EXIT_OK

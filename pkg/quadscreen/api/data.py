import argparse
import logging
from typing import List

from ..models import SparseEncoding
from ..services.data_io_service import read_model_json, write_dataset
from ..services.generative_service import sample_dataset
from .routing import CommandRouter, argument

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command("gen", help="sample a dataset from a model file")
@argument("--model", required=True, help="model JSON")
@argument("--n", type=int, required=True, help="number of samples")
@argument("--out", required=True, help="output dataset path")
def generate(args: argparse.Namespace) -> List[str]:
    model = read_model_json(args.model)
    seed = args.seed if args.seed is not None else model.seed
    data = sample_dataset(model, args.n, seed, threads=args.threads)
    write_dataset(data, args.out, args.format, SparseEncoding(args.encoding))
    logger.info(f"sampled n={data.n} p={data.p} from {args.model} with seed {seed}")
    return []

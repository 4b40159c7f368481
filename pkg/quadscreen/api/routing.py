"""Decorator registry for subcommands, in the spirit of an APIRouter: modules
declare handlers on a router and the app includes every router into one
argparse parser."""
import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type

import pandas as pd

from ..exceptions import DataFormatError, UsageError
from ..models import Dataset, SparseEncoding
from ..services.data_io_service import ConfigT, load_json, read_dataset, validate_document, write_table

# A handler returns the soft warnings it raised; ``--strict`` escalates them.
Handler = Callable[[argparse.Namespace], List[str]]


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    arguments: List[Tuple[Tuple[Any, ...], Dict[str, Any]]] = field(default_factory=list)


class CommandRouter:
    def __init__(self):
        self.commands: List[Command] = []

    def command(self, name: str, help: str = "") -> Callable[[Handler], Handler]:
        def decorator(handler: Handler) -> Handler:
            arguments = list(reversed(getattr(handler, "__cli_arguments__", [])))
            self.commands.append(Command(name, help, handler, arguments))
            return handler

        return decorator


def argument(*flags: Any, **kwargs: Any) -> Callable[[Handler], Handler]:
    """Attach one argparse argument to a handler (stack below ``@router.command``)."""

    def decorator(handler: Handler) -> Handler:
        handler.__cli_arguments__ = getattr(handler, "__cli_arguments__", []) + [(flags, kwargs)]
        return handler

    return decorator


def include_router(subparsers: argparse._SubParsersAction, router: CommandRouter) -> None:
    for command in router.commands:
        parser = subparsers.add_parser(command.name, help=command.help, description=command.help)
        for flags, kwargs in command.arguments:
            parser.add_argument(*flags, **kwargs)
        parser.set_defaults(handler=command.handler, command=command.name)


def index_list(text: str) -> Tuple[int, ...]:
    """Parse ``"3,5,9"`` into sorted variable indices."""
    try:
        values = sorted({int(token) for token in text.split(",") if token.strip()})
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"indices must be non-negative, got {text!r}")
    return tuple(values)


def int_list(text: str) -> List[int]:
    return list(index_list(text))


def emit_table(frame: pd.DataFrame, out: Optional[str]) -> None:
    text = write_table(frame, out)
    if out is None:
        sys.stdout.write(text)


def emit_json(document: Any, out: Optional[str]) -> None:
    text = json.dumps(document, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as handle:
            handle.write(text)


def require_one(args: argparse.Namespace, names: Sequence[str]) -> str:
    """Exactly one of the options in ``names`` must be set; returns it."""
    given = [n for n in names if getattr(args, n) is not None and getattr(args, n) is not False]
    if len(given) != 1:
        flags = " | ".join("--" + n.replace("_", "-") for n in names)
        raise UsageError("MUTUALLY_EXCLUSIVE", f"give exactly one of {flags}")
    return given[0]


def load_dataset(args: argparse.Namespace, path: Optional[str] = None) -> Dataset:
    """Read ``path`` (default ``--input``) honouring the global format flags."""
    return read_dataset(
        path or args.input, args.format, p=args.p, encoding=SparseEncoding(args.encoding), labels_path=args.labels
    )


def load_config(args: argparse.Namespace, config_cls: Type[ConfigT], **overrides: Any) -> ConfigT:
    """Config file (``--config``) with every flag that was given layered on top."""
    document: Dict[str, Any] = {}
    if getattr(args, "config", None):
        document = load_json(args.config)
        if not isinstance(document, dict):
            raise DataFormatError("config must be a JSON object", path=args.config, code="SCHEMA")
    document.update({k: v for k, v in overrides.items() if v is not None})
    if args.seed is not None:
        document["seed"] = args.seed
    document.setdefault("seed", 0)
    document.setdefault("threads", args.threads)
    return validate_document(config_cls, document, getattr(args, "config", None) or "<flags>")

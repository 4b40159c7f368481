"""Dataset, model, fit and experiment-config persistence.

Readers reject malformed input with a DataFormatError that names the file and
the offending line (or the JSON location); nothing is repaired silently."""
import json
import logging
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Type, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from ..exceptions import DataFormatError
from ..models import Alphabet, Dataset, FitResult, GenerativeModel, SparseEncoding

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ConfigT = TypeVar("ConfigT", bound=BaseModel)

FLOAT_FORMAT = "%.17g"
SEED_PREFIX = "# seed:"
LABEL_SUFFIX = ".labels"


# Dense CSV

def write_csv_dataset(data: Dataset, path: PathLike) -> None:
    """``# seed: <n>`` line, header x0..x{p-1},y, 17 significant digits."""
    frame = pd.DataFrame(np.asarray(data.x, dtype=float), columns=[f"x{i}" for i in range(data.p)])
    frame["y"] = np.asarray(data.y, dtype=int)
    with open(path, "w", newline="") as handle:
        handle.write(f"{SEED_PREFIX} {data.seed}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"wrote {data.n} x {data.p} dataset to {path}")


def read_csv_dataset(path: PathLike, alphabets: Optional[Sequence[Alphabet]] = None) -> Dataset:
    path = Path(path)
    seed, header_line = 0, 1
    first = _read_text(path).split("\n", 1)[0]
    if first.startswith(SEED_PREFIX):
        try:
            seed = int(first[len(SEED_PREFIX):].strip())
        except ValueError as exc:
            raise DataFormatError(f"bad seed line {first.strip()!r}", path=str(path), line=1) from exc
        header_line = 2
    try:
        frame = pd.read_csv(path, skiprows=header_line - 1, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataFormatError(f"unreadable CSV: {exc}", path=str(path), line=header_line) from exc

    expected = [f"x{i}" for i in range(frame.shape[1] - 1)] + ["y"]
    if list(frame.columns) != expected or frame.shape[1] < 2:
        raise DataFormatError(
            f"header must be x0..x{{p-1}},y, got {list(frame.columns)[:5]}...",
            path=str(path), line=header_line, code="BAD_HEADER",
        )
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1).to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DataFormatError(
            f"non-numeric or missing value in row {row}", path=str(path), line=header_line + 1 + row
        )
    # string to double through numpy is correctly rounded, so 17-digit text round-trips
    x = frame.iloc[:, :-1].to_numpy(dtype=str).astype(float)
    y = _normalize_labels(numeric["y"].to_numpy(), path, first_line=header_line + 1)
    return _dataset(x, y, seed, alphabets, path)


# Sparse binary features

def write_sparse_binary(
    data: Dataset,
    path: PathLike,
    encoding: SparseEncoding = SparseEncoding.PLUS_MINUS_ONE,
    labels_path: Optional[PathLike] = None,
) -> None:
    """One line per sample listing the 0-based indices of present features;
    labels go to ``<path>.labels`` unless a path is given."""
    allowed = (encoding.absent, 1)
    if not np.isin(data.x, allowed).all():
        raise DataFormatError(f"dataset is not {allowed}-valued", path=str(path), code="NOT_BINARY")
    lines = [" ".join(str(int(j)) for j in np.flatnonzero(row == 1)) for row in data.x]
    Path(path).write_text("\n".join(lines) + "\n")
    Path(labels_path or f"{path}{LABEL_SUFFIX}").write_text("".join(f"{int(v)}\n" for v in data.y))
    logger.info(f"wrote {data.n} sparse rows ({encoding.value}) to {path}")


def read_sparse_binary(
    path: PathLike,
    p: int,
    encoding: SparseEncoding = SparseEncoding.PLUS_MINUS_ONE,
    labels_path: Optional[PathLike] = None,
) -> Dataset:
    path = Path(path)
    labels_path = Path(labels_path or f"{path}{LABEL_SUFFIX}")
    if p < 1:
        raise DataFormatError(f"p must be >= 1, got {p}", path=str(path), code="BAD_DIMENSION")
    rows = _read_text(path).splitlines()
    x = np.full((len(rows), p), encoding.absent, dtype=np.int8)
    for number, line in enumerate(rows, start=1):
        indices = _parse_indices(line, path, number)
        if indices.size:
            if indices.min() < 0 or indices.max() >= p:
                raise DataFormatError(
                    f"feature index out of range [0, {p})", path=str(path), line=number, code="INDEX_OUT_OF_RANGE"
                )
            if np.any(np.diff(indices) <= 0):
                raise DataFormatError(
                    "feature indices must be strictly ascending", path=str(path), line=number, code="NOT_ASCENDING"
                )
            x[number - 1, indices] = 1

    label_lines = _read_text(labels_path).splitlines()
    if len(label_lines) != len(rows):
        raise DataFormatError(
            f"{len(label_lines)} labels for {len(rows)} feature rows",
            path=str(labels_path), line=min(len(label_lines), len(rows)) + 1, code="LABEL_COUNT",
        )
    raw = []
    for number, line in enumerate(label_lines, start=1):
        try:
            raw.append(float(line.strip()))
        except ValueError as exc:
            raise DataFormatError(f"bad label {line!r}", path=str(labels_path), line=number) from exc
    y = _normalize_labels(np.array(raw), labels_path, first_line=1)
    logger.info(f"read {len(rows)} sparse rows with p={p} from {path}")
    return _dataset(x, y, 0, (encoding.alphabet(),) * p, path)


def read_dataset(
    path: PathLike,
    fmt: str = "csv",
    p: Optional[int] = None,
    encoding: SparseEncoding = SparseEncoding.PLUS_MINUS_ONE,
    labels_path: Optional[PathLike] = None,
    alphabets: Optional[Sequence[Alphabet]] = None,
) -> Dataset:
    if fmt == "csv":
        return read_csv_dataset(path, alphabets)
    if p is None:
        raise DataFormatError("the sparse format needs the feature count p", path=str(path), code="BAD_DIMENSION")
    return read_sparse_binary(path, p, encoding, labels_path)


def write_dataset(
    data: Dataset, path: PathLike, fmt: str = "csv", encoding: SparseEncoding = SparseEncoding.PLUS_MINUS_ONE
) -> None:
    if fmt == "csv":
        write_csv_dataset(data, path)
    else:
        write_sparse_binary(data, path, encoding)


# Model JSON

def model_to_document(model: GenerativeModel) -> Dict[str, Any]:
    """Flat JSON document; a shared alphabet is written once."""
    document: Dict[str, Any] = {"p": model.p}
    if len(set(model.alphabets)) == 1:
        document["alphabet"] = list(model.alphabets[0].values)
    else:
        document["alphabets"] = [list(a.values) for a in model.alphabets]
    document.update(
        quad_terms=[[t.i, t.j, t.beta] for t in model.poly.quad_terms],
        lin_terms=[[t.j, t.alpha] for t in model.poly.lin_terms],
        constant=model.poly.constant,
        gamma=model.gamma,
        sigma=model.sigma.value,
        marginals=[list(m) for m in model.marginals],
        seed=model.seed,
    )
    if model.delta is not None:
        document["delta"] = model.delta
    return document


def model_from_document(document: Dict[str, Any], source: str = "<memory>") -> GenerativeModel:
    if not isinstance(document, dict):
        raise DataFormatError("model document must be a JSON object", path=source, code="SCHEMA")
    document = dict(document)
    if "poly" not in document:
        document["poly"] = {
            "quad_terms": document.pop("quad_terms", []),
            "lin_terms": document.pop("lin_terms", []),
            "constant": document.pop("constant", 0.0),
        }
    return validate_document(GenerativeModel, document, source)


def write_model_json(model: GenerativeModel, path: PathLike) -> None:
    Path(path).write_text(json.dumps(model_to_document(model), indent=2) + "\n")


def read_model_json(path: PathLike) -> GenerativeModel:
    return model_from_document(load_json(path), str(path))


def load_fixture_model(name: str) -> GenerativeModel:
    resource = resources.files("quadscreen.fixtures") / f"{name}.json"
    if not resource.is_file():
        raise DataFormatError(f"no fixture named {name!r}", path=str(resource), code="NOT_FOUND")
    return model_from_document(json.loads(resource.read_text()), str(resource))


# Fits and configs

def write_fit_json(fit: FitResult, path: PathLike) -> None:
    Path(path).write_text(json.dumps(fit.model_dump(mode="json"), indent=2) + "\n")


def read_fit_json(path: PathLike) -> FitResult:
    return validate_document(FitResult, load_json(path), str(path))


def read_experiment_config(path: PathLike, config_cls: Type[ConfigT]) -> ConfigT:
    return validate_document(config_cls, load_json(path), str(path))


def write_table(frame: pd.DataFrame, path: Optional[PathLike]) -> str:
    """CSV text of ``frame``; also written to ``path`` when given."""
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if path is not None:
        Path(path).write_text(text)
        logger.info(f"wrote {len(frame)} rows to {path}")
    return text


def validate_document(model_cls: Type[ConfigT], document: Any, source: str) -> ConfigT:
    try:
        return model_cls.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise DataFormatError(
            f"{first['msg']}", path=source, code="SCHEMA", location=[str(part) for part in first["loc"]]
        ) from exc


def load_json(path: PathLike) -> Any:
    try:
        return json.loads(_read_text(Path(path)))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc


def _parse_indices(line: str, path: Path, number: int) -> np.ndarray:
    try:
        return np.array([int(token) for token in line.split()], dtype=np.int64)
    except ValueError as exc:
        raise DataFormatError(f"non-integer feature index in {line!r}", path=str(path), line=number) from exc


def _normalize_labels(raw: np.ndarray, path: PathLike, first_line: int) -> np.ndarray:
    """{0,1} labels as given; {-1,+1} labels mapped to {0,1}."""
    values = set(np.unique(raw).tolist())
    if values <= {0.0, 1.0}:
        return raw.astype(np.int8)
    if values <= {-1.0, 1.0}:
        return ((raw + 1) // 2).astype(np.int8)
    bad = int(np.flatnonzero(~np.isin(raw, (0.0, 1.0)))[0])
    raise DataFormatError(
        f"label {raw[bad]!r} is not in {{0,1}} or {{-1,+1}}", path=str(path), line=first_line + bad, code="BAD_LABEL"
    )


def _dataset(
    x: np.ndarray, y: np.ndarray, seed: int, alphabets: Optional[Sequence[Alphabet]], path: PathLike
) -> Dataset:
    try:
        return Dataset(x=x, y=y, seed=seed, alphabets=tuple(alphabets) if alphabets is not None else None)
    except ValidationError as exc:
        raise DataFormatError(str(exc.errors()[0]["msg"]), path=str(path), code="SCHEMA") from exc


def _read_text(path: Path) -> str:
    try:
        return path.read_text()
    except FileNotFoundError as exc:
        raise DataFormatError("file not found", path=str(path), code="NOT_FOUND") from exc
    except (IsADirectoryError, PermissionError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"cannot read file: {exc}", path=str(path), code="UNREADABLE") from exc

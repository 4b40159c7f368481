from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from .arrays import NDArray
from .generative import Alphabet


class Dataset(BaseModel):
    """n x p feature matrix over finite alphabets plus {0,1} labels."""

    model_config = ConfigDict(frozen=True)

    x: NDArray
    y: NDArray
    seed: int = Field(default=0, ge=0)
    alphabets: Optional[Tuple[Alphabet, ...]] = None

    _codes: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _shapes(self) -> "Dataset":
        if self.x.ndim != 2:
            raise ValueError(f"x must be a matrix, got shape {self.x.shape}")
        if self.y.ndim != 1 or self.y.shape[0] != self.x.shape[0]:
            raise ValueError(f"y has shape {self.y.shape}, expected ({self.x.shape[0]},)")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be in {0, 1}")
        if self.alphabets is not None:
            if len(self.alphabets) != self.p:
                raise ValueError(f"{len(self.alphabets)} alphabets for {self.p} columns")
            self._codes = self._compute_codes(self.alphabets)
        return self

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def p(self) -> int:
        return int(self.x.shape[1])

    def column_alphabets(self) -> Tuple[Alphabet, ...]:
        """Declared alphabets, or the sorted distinct values of each column."""
        if self.alphabets is not None:
            return self.alphabets
        inferred = []
        for i in range(self.p):
            values = tuple(float(v) for v in np.unique(self.x[:, i]))
            if len(values) < 2:
                # a constant column still needs a two-symbol alphabet
                values = values + (values[0] + 1.0,) if values else (0.0, 1.0)
            inferred.append(Alphabet(values=values))
        return tuple(inferred)

    def codes(self) -> np.ndarray:
        """n x p int8 matrix of alphabet positions."""
        if self._codes is None:
            self._codes = self._compute_codes(self.column_alphabets())
        return self._codes

    def is_binary(self) -> bool:
        return bool(np.isin(self.x, (-1, 1)).all())

    def subset_rows(self, rows: np.ndarray) -> "Dataset":
        return Dataset(x=self.x[rows], y=self.y[rows], seed=self.seed, alphabets=self.alphabets)

    def _compute_codes(self, alphabets: Tuple[Alphabet, ...]) -> np.ndarray:
        codes = np.empty(self.x.shape, dtype=np.int8)
        for i, alphabet in enumerate(alphabets):
            try:
                codes[:, i] = alphabet.positions(self.x[:, i])
            except ValueError as exc:
                raise ValueError(f"column {i}: {exc}") from exc
        codes.setflags(write=False)
        return codes


class SparseEncoding(str, Enum):
    """Value of an absent feature in the sparse binary format (present is 1)."""

    PLUS_MINUS_ONE = "pm1"
    ZERO_ONE = "01"

    @property
    def absent(self) -> int:
        return -1 if self is SparseEncoding.PLUS_MINUS_ONE else 0

    def alphabet(self) -> Alphabet:
        return Alphabet(values=(float(self.absent), 1.0))

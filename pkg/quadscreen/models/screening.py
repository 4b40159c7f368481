from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from .arrays import NDArray
from .generative import Alphabet


class ScreenMode(str, Enum):
    THRESHOLD = "threshold"
    TOP_K = "top_k"


class ScreenConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: ScreenMode
    eps: Optional[PositiveFloat] = None
    k: Optional[int] = Field(default=None, ge=1)
    normalize: bool = False

    @model_validator(mode="after")
    def _mode_parameter(self) -> "ScreenConfig":
        if self.mode is ScreenMode.THRESHOLD and self.eps is None:
            raise ValueError("threshold mode needs eps")
        if self.mode is ScreenMode.TOP_K and self.k is None:
            raise ValueError("top-k mode needs k")
        return self

    @classmethod
    def threshold(cls, eps: float, normalize: bool = False) -> "ScreenConfig":
        return cls(mode=ScreenMode.THRESHOLD, eps=eps, normalize=normalize)

    @classmethod
    def top_k(cls, k: int, normalize: bool = False) -> "ScreenConfig":
        return cls(mode=ScreenMode.TOP_K, k=k, normalize=normalize)


class ScoreVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    scores: NDArray
    mu_hat: NDArray
    stddev: NDArray
    degenerate: NDArray
    normalized: bool = False

    @property
    def p(self) -> int:
        return int(self.scores.shape[0])


class HashAggregate(str, Enum):
    SIGNED = "signed"
    ABSOLUTE = "absolute"


class HashFamily(BaseModel):
    """m seeded lookup tables from alphabet positions to integers in [-U, U]."""

    model_config = ConfigDict(frozen=True)

    alphabet: Alphabet
    m: int = Field(ge=1)
    U: int = Field(ge=1)
    seed: int = Field(ge=0)
    tables: NDArray

    @model_validator(mode="after")
    def _table_shape(self) -> "HashFamily":
        if self.tables.shape != (self.m, self.alphabet.size):
            raise ValueError(f"tables have shape {self.tables.shape}, expected {(self.m, self.alphabet.size)}")
        if np.abs(self.tables).max() > self.U:
            raise ValueError("table entry outside [-U, U]")
        return self

    def redraw(self, ell: int, column: int, attempt: int) -> np.ndarray:
        """Replacement table for hash ``ell`` on ``column``; deterministic."""
        rng = np.random.default_rng([self.seed, ell, column + 1, attempt])
        return rng.integers(-self.U, self.U + 1, size=self.alphabet.size)


class NonlinearScores(BaseModel):
    model_config = ConfigDict(frozen=True)

    c: NDArray
    per_hash: NDArray
    degenerate: Tuple[Tuple[int, int], ...] = ()
    aggregate: HashAggregate = HashAggregate.SIGNED

    @property
    def p(self) -> int:
        return int(self.c.shape[0])

    @property
    def warning(self) -> bool:
        return bool(self.degenerate)
